#ifndef MARL_METRICS_IO_HPP
#define MARL_METRICS_IO_HPP

#include <string>

#include "marl/trainer.hpp"

namespace marl {

// Plot-ready per-iteration rows. Stable column order:
//   iteration,seed,train_return,eval_mean,eval_ci95,loss,epsilon,degraded
// Evaluation columns repeat the cross-seed aggregate on every seed row of an
// evaluation iteration and stay empty elsewhere.
std::string metrics_csv_text(const MetricsRecord& metrics);
void emit_metrics_csv(const MetricsRecord& metrics, const std::string& path);

void write_run_summary(const RunResult& result, const TrainConfig& config,
                       const std::string& path);

}  // namespace marl

#endif
