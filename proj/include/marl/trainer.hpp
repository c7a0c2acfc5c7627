#ifndef MARL_TRAINER_HPP
#define MARL_TRAINER_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marl/core.hpp"
#include "marl/critic.hpp"
#include "marl/dataset.hpp"
#include "marl/env_factory.hpp"
#include "marl/llm_client.hpp"
#include "marl/llm_critic.hpp"
#include "marl/policy.hpp"

namespace marl {

// Everything needed to reproduce a run: flags override file values, which
// override these defaults.
struct TrainConfig {
    EnvConfig env;
    std::string critic_kind = "oracle";  // shared | oracle | llm_mca | llm_taca
    int episodes_per_iteration = 8;
    int iterations = 100;
    int update_epochs = 4;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    PolicyConfig policy;  // obs/action dims are filled in from the env spec
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_anneal_fraction = 0.6;
    TaskInputSchedule task_schedule;

    NormalizationMode normalization = NormalizationMode::symmetric;
    OracleConfig oracle;
    ChatConfig chat;
    int llm_max_parse_retries = 2;

    int eval_interval = 10;   // iterations between evaluation points (0 = final only)
    int eval_episodes = 50;
    std::uint64_t eval_seed = 424242;

    bool parallel_seeds = false;
    std::string run_id = "run";
    std::string out_dir;       // metrics/summary/checkpoints root ("" = none)
    bool export_dataset = false;

    bool llm_critic() const {
        return critic_kind == "llm_mca" || critic_kind == "llm_taca";
    }
    void validate() const;
};

struct IterationMetrics {
    int iteration = 0;
    std::uint64_t seed = 0;
    double train_return = 0.0;  // mean episode return of the collected batch
    double loss = 0.0;          // mean minibatch loss over this iteration's updates
    double epsilon = 0.0;
    bool degraded = false;
    int parse_retries = 0;
};

struct EvalPoint {
    int iteration = 0;
    std::vector<double> per_seed_means;
    double mean = 0.0;
    double ci95 = 0.0;
    std::int64_t collisions = 0;
};

struct MetricsRecord {
    std::vector<IterationMetrics> rows;
    std::vector<EvalPoint> evals;
};

struct EvalStats {
    std::vector<double> returns;
    std::int64_t collisions = 0;
    std::int64_t completions = 0;
    std::int64_t timeouts = 0;

    double mean_return() const;
};

// Sample mean and 95% half-width from the t distribution with n-1 dof.
std::pair<double, double> confidence_interval(const std::vector<double>& values);

// Greedy decentralized evaluation: epsilon forced to 0, task inputs zero.
EvalStats evaluate_policies(std::vector<QNetwork>& policies, Env& env, int episodes,
                            std::uint64_t eval_seed);

// One seed's training state: per-agent networks and replay buffers, the
// critic instance serving this run, and this run's random streams.
class TrainRun {
public:
    TrainRun(TrainConfig config, std::uint64_t seed);

    // Collect -> one critic verdict -> replay fill -> update epochs. The
    // critic is consulted before any learner state mutates, so a critic
    // failure aborts the iteration with the run still intact.
    IterationMetrics run_iteration();

    EvalStats evaluate_stats(int episodes, std::uint64_t eval_seed);
    std::vector<double> evaluate(int episodes, std::uint64_t eval_seed);

    int iteration() const { return iteration_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<QNetwork>& policies() const { return policies_; }
    std::vector<QNetwork>& policies() { return policies_; }
    Critic& critic() { return *critic_; }
    Env& env() { return *env_; }
    bool any_degraded() const { return any_degraded_; }
    const TrainConfig& config() const { return config_; }

    void attach_dataset_writer(std::shared_ptr<DatasetWriter> writer) {
        dataset_writer_ = std::move(writer);
    }

    double epsilon_at(int iteration) const;
    double progress_at(int iteration) const;

    // Decentralized rollout: each agent acts from its own observation plus
    // its current task slot (zero when no assignment is pending).
    static EpisodeBatch collect_rollouts(std::vector<QNetwork>& policies, Env& env,
                                         int episodes, double epsilon, Rng& rng,
                                         const std::vector<std::vector<double>>& task_slots,
                                         std::uint64_t run_seed,
                                         std::int64_t& episode_counter);

private:
    void fill_replay(const EpisodeBatch& batch, const CriticVerdict& verdict, double progress);
    void export_episodes(const EpisodeBatch& batch, const CriticVerdict& verdict);

    TrainConfig config_;
    std::uint64_t seed_;
    std::unique_ptr<Env> env_;
    std::unique_ptr<Env> eval_env_;
    std::unique_ptr<Critic> critic_;
    std::vector<QNetwork> policies_;
    std::vector<ReplayBuffer> buffers_;
    std::vector<std::vector<double>> task_slots_;  // persisted per-agent task inputs
    Rng rollout_rng_;
    std::vector<Rng> update_rngs_;
    std::vector<Rng> dropout_rngs_;
    Rng blank_rng_;
    std::int64_t episode_counter_ = 0;
    int iteration_ = 0;
    bool any_degraded_ = false;
    bool taca_ = false;
    std::shared_ptr<DatasetWriter> dataset_writer_;
};

struct RunResult {
    MetricsRecord metrics;
    bool any_degraded = false;
    EvalPoint final_eval;
};

// Multi-seed orchestration: one TrainRun per seed (optionally on parallel
// threads), shared evaluation schedule, metrics aggregation across seeds.
class Trainer {
public:
    explicit Trainer(TrainConfig config);

    RunResult run();

private:
    TrainConfig config_;
};

}  // namespace marl

#endif
