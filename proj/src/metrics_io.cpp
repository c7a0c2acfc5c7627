#include "marl/metrics_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "marl/parsing.hpp"

namespace marl {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string metrics_csv_text(const MetricsRecord& metrics) {
    if (metrics.rows.empty()) throw std::invalid_argument("metrics: no rows to emit");

    std::map<int, const EvalPoint*> eval_at;
    for (const auto& e : metrics.evals) eval_at[e.iteration] = &e;

    std::ostringstream os;
    os << "iteration,seed,train_return,eval_mean,eval_ci95,loss,epsilon,degraded\n";
    for (const auto& row : metrics.rows) {
        os << row.iteration << "," << row.seed << "," << shortest(row.train_return) << ",";
        const auto it = eval_at.find(row.iteration);
        if (it != eval_at.end())
            os << shortest(it->second->mean) << "," << shortest(it->second->ci95);
        else
            os << ",";
        os << "," << shortest(row.loss) << "," << shortest(row.epsilon) << ","
           << (row.degraded ? 1 : 0) << "\n";
    }
    return os.str();
}

void emit_metrics_csv(const MetricsRecord& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("metrics: cannot open " + path + " for writing");
    out << metrics_csv_text(metrics);
    if (!out) throw std::runtime_error("metrics: write failed for " + path);
}

void write_run_summary(const RunResult& result, const TrainConfig& config,
                       const std::string& path) {
    nlohmann::json j;
    j["run_id"] = config.run_id;
    j["env"] = config.env.to_string();
    j["critic"] = config.critic_kind;
    j["seeds"] = config.seeds;
    j["iterations"] = config.iterations;
    j["episodes_per_iteration"] = config.episodes_per_iteration;
    j["normalization"] = normalization_mode_name(config.normalization);
    j["degraded"] = result.any_degraded;
    j["final_eval"] = {{"iteration", result.final_eval.iteration},
                       {"mean", result.final_eval.mean},
                       {"ci95", result.final_eval.ci95},
                       {"per_seed_means", result.final_eval.per_seed_means},
                       {"collisions", result.final_eval.collisions}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("summary: cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("summary: write failed for " + path);
}

}  // namespace marl
