#include <malloc.h>

#include "cmg/cli.hpp"

int main(int argc, char** argv) {
  // Training allocates many short-lived mid-size matrices; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  return cmg::cli::run(argc, argv);
}
