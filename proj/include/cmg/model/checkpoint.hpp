#pragma once

// Binary checkpoint layout (all little-endian):
//   bytes 0..3   "CMG1"
//   13 x int32   d_model, n_heads, d_ff, lstm_hidden, window, n_features, n_classes,
//                seed_lo, seed_hi, encoder_mask, decoder_mask, cross_mask, lstm_direction
//   float32[]    every tensor in CmgParams::visit order, each column-major
//                (rows of a 1 x n bias are contiguous either way)

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cmg/model/params.hpp"

namespace cmg::model {

inline constexpr std::array<char, 4> kCheckpointMagic = {'C', 'M', 'G', '1'};
inline constexpr std::size_t kCheckpointHeaderInts = 13;

namespace detail {

inline void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::int32_t as_i32(std::uint32_t v) { return std::bit_cast<std::int32_t>(v); }

}  // namespace detail

inline std::vector<unsigned char> serialize_params(const CmgParams& p) {
  const ModelConfig& c = p.config;
  std::vector<unsigned char> buf(kCheckpointMagic.begin(), kCheckpointMagic.end());
  const std::array<std::uint32_t, kCheckpointHeaderInts> header = {
      static_cast<std::uint32_t>(c.d_model),        static_cast<std::uint32_t>(c.n_heads),
      static_cast<std::uint32_t>(c.d_ff),           static_cast<std::uint32_t>(c.lstm_hidden),
      static_cast<std::uint32_t>(c.window),         static_cast<std::uint32_t>(c.n_features),
      static_cast<std::uint32_t>(c.n_classes),      static_cast<std::uint32_t>(c.seed & 0xFFFFFFFFu),
      static_cast<std::uint32_t>(c.seed >> 32),     static_cast<std::uint32_t>(c.encoder_mask),
      static_cast<std::uint32_t>(c.decoder_mask),   static_cast<std::uint32_t>(c.cross_mask),
      static_cast<std::uint32_t>(c.lstm_direction)};
  for (auto v : header) detail::put_u32(buf, v);
  p.visit([&](const std::string&, const Mat& m, bool) {
    for (Eigen::Index k = 0; k < m.size(); ++k)
      detail::put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[k])));
  });
  return buf;
}

inline CmgParams deserialize_params(const std::vector<unsigned char>& buf) {
  if (buf.size() < 4 || !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), buf.begin()))
    throw DataError("checkpoint: bad magic");
  if (buf.size() < 4 + 4 * kCheckpointHeaderInts) throw DataError("checkpoint: truncated file");
  std::array<std::int32_t, kCheckpointHeaderInts> h{};
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = detail::as_i32(detail::get_u32(buf.data() + 4 + 4 * k));
  ModelConfig c;
  c.d_model = h[0];
  c.n_heads = h[1];
  c.d_ff = h[2];
  c.lstm_hidden = h[3];
  c.window = h[4];
  c.n_features = h[5];
  c.n_classes = h[6];
  c.seed = static_cast<std::uint64_t>(static_cast<std::uint32_t>(h[7])) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(h[8])) << 32);
  for (int k = 9; k < 12; ++k)
    if (h[k] < 0 || h[k] > static_cast<int>(MaskKind::diagonal)) throw DataError("checkpoint: shape mismatch (mask)");
  if (h[12] < 0 || h[12] > 1) throw DataError("checkpoint: shape mismatch (lstm direction)");
  c.encoder_mask = static_cast<MaskKind>(h[9]);
  c.decoder_mask = static_cast<MaskKind>(h[10]);
  c.cross_mask = static_cast<MaskKind>(h[11]);
  c.lstm_direction = static_cast<LstmDirection>(h[12]);
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw DataError(std::string("checkpoint: shape mismatch (") + e.what() + ")");
  }
  CmgParams p = zero_params(c);
  const std::size_t expected = 4 + 4 * kCheckpointHeaderInts + 4 * p.parameter_count();
  if (buf.size() < expected) throw DataError("checkpoint: truncated file");
  if (buf.size() > expected) throw DataError("checkpoint: shape mismatch (trailing bytes)");
  std::size_t off = 4 + 4 * kCheckpointHeaderInts;
  p.visit([&](const std::string&, Mat& m, bool) {
    for (Eigen::Index k = 0; k < m.size(); ++k, off += 4)
      m.data()[k] = static_cast<double>(std::bit_cast<float>(detail::get_u32(buf.data() + off)));
  });
  return p;
}

inline void save_params(const CmgParams& p, const std::filesystem::path& path) {
  const auto buf = serialize_params(p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("checkpoint: write failed for " + path.string());
}

inline CmgParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_params(buf);
}

/// Loads and requires the stored dimensions to equal `expected`.
inline CmgParams load_params(const std::filesystem::path& path, const ModelConfig& expected) {
  CmgParams p = load_params(path);
  const ModelConfig& c = p.config;
  if (c.d_model != expected.d_model || c.n_heads != expected.n_heads || c.d_ff != expected.d_ff ||
      c.lstm_hidden != expected.lstm_hidden || c.window != expected.window || c.n_features != expected.n_features ||
      c.n_classes != expected.n_classes)
    throw DataError("checkpoint: shape mismatch with requested config");
  return p;
}

inline double checkpoint_size_kb(const CmgParams& p) {
  return static_cast<double>(4 + 4 * kCheckpointHeaderInts + 4 * p.parameter_count()) / 1024.0;
}

}  // namespace cmg::model
