// Library walk-through on a small synthetic index: features, targets, chaos
// battery, a short CMG training run and the daybreak evaluation.

#include <iostream>

#include "cmg/cmg.hpp"

int main() {
  cmg::PipelineConfig cfg;
  cfg.synth.days = 60;
  cfg.synth.seed = 7;
  cfg.train.max_epochs = 5;

  const cmg::OhlcSeries series = cmg::synth_generate(cfg.synth);
  const cmg::PreparedIndex p = cmg::prepare_index("DEMO", series, cfg);
  std::cout << series.size() << " bars, " << p.days.size() << " days, " << p.events.size() << " crossover events, "
            << p.train.size() << " train / " << p.test.size() << " test samples\n";

  const cmg::IndexResult r = cmg::run_index(p, cfg, cfg.seed);
  if (r.chaos_report)
    std::cout << "chaos: lambda=" << cmg::format_fixed(r.chaos_report->lambda, 4)
              << " D2=" << cmg::format_fixed(r.chaos_report->d2, 4) << '\n';
  for (std::size_t k = 0; k < r.model_names.size(); ++k)
    std::cout << r.model_names[k] << ": daybreak accuracy " << cmg::format_fixed(r.evaluations[k].accuracy, 4) << '\n';
  std::cout << "majority direction: " << cmg::format_fixed(r.majority_accuracy, 4) << '\n';
  for (const auto& n : r.notices) std::cout << "notice: " << n << '\n';
  std::cout << "checkpoint size: " << cmg::format_fixed(cmg::model::checkpoint_size_kb(r.cmg.params), 1) << " KB\n";
  return 0;
}
