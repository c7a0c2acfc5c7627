#include "marl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <thread>

namespace marl {

void TrainConfig::validate() const {
    if (episodes_per_iteration < 1)
        throw std::invalid_argument("config: episodes_per_iteration must be >= 1");
    if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
    if (update_epochs < 0) throw std::invalid_argument("config: update_epochs must be >= 0");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (critic_kind != "shared" && critic_kind != "oracle" && critic_kind != "llm_mca" &&
        critic_kind != "llm_taca")
        throw std::invalid_argument("config: unknown critic '" + critic_kind + "'");
    if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1)
        throw std::invalid_argument("config: epsilon bounds must lie in [0,1]");
    if (task_schedule.dropout_end < 0 || task_schedule.dropout_end >= 1)
        throw std::invalid_argument("config: dropout endpoint must lie in [0,1)");
    if (llm_critic()) {
        if (chat.mode != ChatMode::replay && chat.endpoint.empty())
            throw std::invalid_argument(
                "config: llm critic in live/record mode needs an endpoint");
        if (chat.mode != ChatMode::live && chat.cassette_path.empty())
            throw std::invalid_argument(
                "config: llm critic in record/replay mode needs a cassette");
        if (chat.mode != ChatMode::replay && chat.api_key.empty())
            throw std::invalid_argument(
                "config: live llm critic needs an API key; set the LLM_API_KEY "
                "environment variable");
    }
    if (eval_episodes < 1) throw std::invalid_argument("config: eval_episodes must be >= 1");
}

double EvalStats::mean_return() const {
    if (returns.empty()) return 0.0;
    return std::accumulate(returns.begin(), returns.end(), 0.0) /
           static_cast<double>(returns.size());
}

namespace {

// Two-sided 97.5% quantiles of the t distribution, dof 1..30.
constexpr double kT975[30] = {
    12.70620474, 4.30265273, 3.18244631, 2.77644511, 2.57058184, 2.44691185,
    2.36462425,  2.30600414, 2.26215716, 2.22813885, 2.20098516, 2.17881283,
    2.16036866,  2.14478669, 2.13144955, 2.11990530, 2.10981558, 2.10092204,
    2.09302405,  2.08596345, 2.07961384, 2.07387307, 2.06865761, 2.06389856,
    2.05953855,  2.05552944, 2.05183052, 2.04841007, 2.04523075, 2.04227246};

double t_quantile_975(int dof) {
    if (dof < 1) throw std::invalid_argument("t quantile needs dof >= 1");
    if (dof <= 30) return kT975[dof - 1];
    return 1.95996398;  // normal limit
}

std::unique_ptr<Critic> build_critic(const TrainConfig& config, std::uint64_t seed,
                                     std::size_t seed_count) {
    if (!config.llm_critic())
        return make_scripted_critic(config.critic_kind, config.env, config.oracle);

    LlmCriticConfig llm;
    llm.mode = config.critic_kind == "llm_taca" ? PromptMode::taca : PromptMode::mca;
    llm.d_task = config.policy.d_task;
    llm.normalization = config.normalization;
    llm.max_parse_retries = config.llm_max_parse_retries;

    ChatConfig chat = config.chat;
    if (seed_count > 1 && !chat.cassette_path.empty())
        chat.cassette_path += ".seed" + std::to_string(seed);
    return std::make_unique<LlmCritic>(config.env, llm, std::move(chat));
}

}  // namespace

std::pair<double, double> confidence_interval(const std::vector<double>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("confidence_interval: need at least 2 values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / (n - 1.0));
    const double half = t_quantile_975(static_cast<int>(values.size()) - 1) * stddev /
                        std::sqrt(n);
    return {mean, half};
}

TrainRun::TrainRun(TrainConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      env_(make_env(config_.env)),
      eval_env_(make_env(config_.env)),
      rollout_rng_(mix_seed(seed, 1)),
      blank_rng_(mix_seed(seed, 0x300)) {
    config_.validate();
    taca_ = config_.critic_kind == "llm_taca";

    critic_ = build_critic(config_, seed, config_.seeds.size());

    const EnvSpec& spec = env_->spec();
    PolicyConfig pc = config_.policy;
    pc.obs_dim = spec.obs_dim_per_agent;
    pc.action_count = spec.action_count_per_agent;
    config_.policy = pc;

    for (int i = 0; i < spec.num_agents; ++i) {
        policies_.emplace_back(pc, mix_seed(seed, 0x200 + i));
        buffers_.emplace_back(static_cast<std::size_t>(pc.replay_capacity));
        update_rngs_.emplace_back(mix_seed(seed, 0x100 + i));
        dropout_rngs_.emplace_back(mix_seed(seed, 0x400 + i));
    }
    task_slots_.assign(spec.num_agents, std::vector<double>(pc.d_task, 0.0));
}

double TrainRun::epsilon_at(int iteration) const {
    const double anneal_span = config_.epsilon_anneal_fraction * config_.iterations;
    if (anneal_span <= 0.0) return config_.epsilon_end;
    const double frac = std::min(1.0, iteration / anneal_span);
    return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

double TrainRun::progress_at(int iteration) const {
    if (config_.iterations <= 1) return 1.0;
    return static_cast<double>(iteration) / (config_.iterations - 1);
}

EpisodeBatch TrainRun::collect_rollouts(std::vector<QNetwork>& policies, Env& env,
                                        int episodes, double epsilon, Rng& rng,
                                        const std::vector<std::vector<double>>& task_slots,
                                        std::uint64_t run_seed,
                                        std::int64_t& episode_counter) {
    const int n = env.spec().num_agents;
    EpisodeBatch batch;
    batch.trajectories.reserve(episodes);
    for (int e = 0; e < episodes; ++e) {
        const std::uint64_t env_seed =
            mix_seed(run_seed, 0x10000 + static_cast<std::uint64_t>(episode_counter++));
        auto obs = env.reset(env_seed);
        Trajectory traj(env.spec().env_kind, env_seed);
        while (true) {
            std::vector<int> actions(n);
            for (int i = 0; i < n; ++i) {
                const auto q = policies[i].q_forward(obs[i], task_slots[i]);
                actions[i] = act_epsilon_greedy(q, epsilon, rng);
            }
            const StepResult result = env.step(actions);
            traj.add_step(TimeStep{obs, actions, result.reward, result.done});
            obs = result.joint_obs;
            if (result.done) break;
        }
        batch.trajectories.push_back(std::move(traj));
    }
    batch.batch_id = episode_counter;
    return batch;
}

void TrainRun::fill_replay(const EpisodeBatch& batch, const CriticVerdict& verdict,
                           double progress) {
    const int n = env_->spec().num_agents;
    const int d_task = config_.policy.d_task;
    const double blank = taca_ ? config_.task_schedule.blank_fraction(progress) : 0.0;
    const std::vector<double> zero_task(d_task, 0.0);

    for (std::size_t t = 0; t < batch.trajectories.size(); ++t) {
        const auto& traj = batch.trajectories[t];
        const auto& credits = verdict.credits[t];
        const TaskAssignmentMatrix* tasks =
            (taca_ && t < verdict.tasks.size()) ? &verdict.tasks[t] : nullptr;

        // Task vectors persist from the step the critic issued them until the
        // agent's next assignment; the run-level slot carries over iterations.
        std::vector<std::vector<std::vector<double>>> step_tasks(
            traj.length(), std::vector<std::vector<double>>(n));
        for (std::size_t k = 0; k < traj.length(); ++k) {
            for (int i = 0; i < n; ++i) {
                if (tasks && tasks->entries[i][k]) {
                    std::vector<double> vec(d_task, 0.0);
                    const auto& assigned = *tasks->entries[i][k];
                    for (int d = 0; d < d_task; ++d) vec[d] = assigned[d];
                    task_slots_[i] = vec;
                }
                step_tasks[k][i] = task_slots_[i];
            }
        }

        for (std::size_t k = 0; k < traj.length(); ++k) {
            const auto& step = traj.steps()[k];
            const bool last = k + 1 == traj.length();
            for (int i = 0; i < n; ++i) {
                Transition tr;
                tr.obs = step.joint_obs[i];
                tr.task = step_tasks[k][i];
                if (taca_ && blank > 0.0 && blank_rng_.uniform01() < blank)
                    tr.task = zero_task;
                tr.action = step.joint_action[i];
                tr.credit = credits.values[i][k];
                tr.next_obs = last ? step.joint_obs[i] : traj.steps()[k + 1].joint_obs[i];
                tr.next_task = last ? zero_task : step_tasks[k + 1][i];
                tr.done = step.done;
                buffers_[i].push(std::move(tr));
            }
        }
    }
}

void TrainRun::export_episodes(const EpisodeBatch& batch, const CriticVerdict& verdict) {
    if (!dataset_writer_) return;
    const int n = env_->spec().num_agents;
    for (std::size_t t = 0; t < batch.trajectories.size(); ++t) {
        const auto& traj = batch.trajectories[t];
        DatasetRecord record;
        record.header.env_kind = env_->spec().env_kind;
        record.header.scenario = env_->scenario_name();
        record.header.num_agents = n;
        record.header.seed = traj.seed();
        record.header.critic_kind = config_.critic_kind;
        record.header.run_id = config_.run_id + "-seed" + std::to_string(seed_);
        record.header.normalization = normalization_mode_name(config_.normalization);
        for (std::size_t k = 0; k < traj.length(); ++k) {
            const auto& step = traj.steps()[k];
            DatasetStep ds;
            ds.joint_obs = step.joint_obs;
            ds.joint_action = step.joint_action;
            ds.global_reward = step.global_reward;
            for (int i = 0; i < n; ++i) ds.credits.push_back(verdict.credits[t].values[i][k]);
            if (t < verdict.tasks.size()) {
                for (int i = 0; i < n; ++i) ds.tasks.push_back(verdict.tasks[t].entries[i][k]);
            } else {
                ds.tasks.assign(n, std::nullopt);
            }
            ds.done = step.done;
            record.steps.push_back(std::move(ds));
        }
        record.episode_return = episode_return(traj);
        record.explanation = verdict.explanation;
        record.degraded = verdict.degraded;
        dataset_writer_->write_episode(record);
    }
}

IterationMetrics TrainRun::run_iteration() {
    const double eps = epsilon_at(iteration_);
    const double progress = progress_at(iteration_);

    EpisodeBatch batch =
        collect_rollouts(policies_, *env_, config_.episodes_per_iteration, eps, rollout_rng_,
                         task_slots_, seed_, episode_counter_);

    // Single whole-batch critic call; nothing has mutated yet, so a throwing
    // critic leaves the run exactly as it was before this iteration.
    const CriticVerdict verdict = critic_->assign(batch);
    any_degraded_ = any_degraded_ || verdict.degraded;

    fill_replay(batch, verdict, progress);
    export_episodes(batch, verdict);

    const double dropout =
        taca_ ? config_.task_schedule.dropout_rate(progress) : 0.0;
    const int n = env_->spec().num_agents;
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int epoch = 0; epoch < config_.update_epochs; ++epoch) {
        for (int i = 0; i < n; ++i) {
            if (buffers_[i].size() < static_cast<std::size_t>(config_.policy.minibatch))
                continue;
            const auto minibatch = buffers_[i].sample(
                static_cast<std::size_t>(config_.policy.minibatch), update_rngs_[i]);
            loss_sum += policies_[i].apply_update(minibatch, config_.policy.learning_rate,
                                                  dropout, &dropout_rngs_[i]);
            ++loss_count;
        }
    }

    IterationMetrics metrics;
    metrics.iteration = iteration_;
    metrics.seed = seed_;
    double ret = 0.0;
    for (const auto& traj : batch.trajectories) ret += episode_return(traj);
    metrics.train_return = ret / static_cast<double>(batch.trajectories.size());
    metrics.loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    metrics.epsilon = eps;
    metrics.degraded = verdict.degraded;
    metrics.parse_retries = verdict.retry_count;
    ++iteration_;
    return metrics;
}

EvalStats evaluate_policies(std::vector<QNetwork>& policies, Env& env, int episodes,
                            std::uint64_t eval_seed) {
    // Decentralized deployment: greedy actions, no critic, task inputs zero.
    EvalStats stats;
    const int n = env.spec().num_agents;
    const std::vector<double> zero_task(policies.empty() ? 0 : policies[0].config().d_task,
                                        0.0);
    for (int e = 0; e < episodes; ++e) {
        auto obs = env.reset(mix_seed(eval_seed, static_cast<std::uint64_t>(e)));
        double ret = 0.0;
        while (true) {
            std::vector<int> actions(n);
            for (int i = 0; i < n; ++i)
                actions[i] = argmax_lowest(policies[i].q_forward(obs[i], zero_task));
            const StepResult result = env.step(actions);
            ret += result.reward;
            obs = result.joint_obs;
            if (result.done) {
                switch (result.termination) {
                    case TerminationKind::collision: ++stats.collisions; break;
                    case TerminationKind::complete: ++stats.completions; break;
                    case TerminationKind::timeout: ++stats.timeouts; break;
                    case TerminationKind::none: break;
                }
                break;
            }
        }
        stats.returns.push_back(ret);
    }
    return stats;
}

EvalStats TrainRun::evaluate_stats(int episodes, std::uint64_t eval_seed) {
    return evaluate_policies(policies_, *eval_env_, episodes, eval_seed);
}

std::vector<double> TrainRun::evaluate(int episodes, std::uint64_t eval_seed) {
    return evaluate_stats(episodes, eval_seed).returns;
}

Trainer::Trainer(TrainConfig config) : config_(std::move(config)) { config_.validate(); }

RunResult Trainer::run() {
    const std::size_t seed_count = config_.seeds.size();
    std::vector<std::unique_ptr<TrainRun>> runs(seed_count);
    std::vector<MetricsRecord> per_seed_metrics(seed_count);
    std::vector<std::vector<std::pair<int, EvalStats>>> per_seed_evals(seed_count);
    std::vector<std::exception_ptr> failures(seed_count);

    auto run_one_seed = [&](std::size_t idx) {
        try {
            const std::uint64_t seed = config_.seeds[idx];
            auto run = std::make_unique<TrainRun>(config_, seed);
            if (config_.export_dataset && !config_.out_dir.empty()) {
                const std::string rel = dataset_relative_path(
                    config_.env.kind, run->env().scenario_name(), config_.critic_kind,
                    config_.run_id + "-seed" + std::to_string(seed));
                const auto path = std::filesystem::path(config_.out_dir) / "dataset" / rel;
                std::filesystem::create_directories(path.parent_path());
                run->attach_dataset_writer(std::make_shared<DatasetWriter>(path.string()));
            }
            for (int iter = 0; iter < config_.iterations; ++iter) {
                per_seed_metrics[idx].rows.push_back(run->run_iteration());
                const bool eval_now =
                    (config_.eval_interval > 0 && (iter + 1) % config_.eval_interval == 0) ||
                    iter + 1 == config_.iterations;
                if (eval_now)
                    per_seed_evals[idx].emplace_back(
                        iter, run->evaluate_stats(config_.eval_episodes, config_.eval_seed));
            }
            if (!config_.out_dir.empty()) {
                const auto dir = std::filesystem::path(config_.out_dir) / "checkpoints" /
                                 ("seed" + std::to_string(seed));
                std::filesystem::create_directories(dir);
                for (std::size_t i = 0; i < run->policies().size(); ++i)
                    run->policies()[i].save_file(
                        (dir / ("agent" + std::to_string(i) + ".ckpt")).string());
            }
            runs[idx] = std::move(run);
        } catch (...) {
            failures[idx] = std::current_exception();
        }
    };

    if (config_.parallel_seeds && seed_count > 1) {
        std::vector<std::thread> threads;
        threads.reserve(seed_count);
        for (std::size_t i = 0; i < seed_count; ++i) threads.emplace_back(run_one_seed, i);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < seed_count; ++i) run_one_seed(i);
    }
    for (auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    RunResult result;
    for (auto& m : per_seed_metrics)
        result.metrics.rows.insert(result.metrics.rows.end(), m.rows.begin(), m.rows.end());
    std::stable_sort(result.metrics.rows.begin(), result.metrics.rows.end(),
                     [](const IterationMetrics& a, const IterationMetrics& b) {
                         return a.iteration < b.iteration;
                     });

    // Aggregate evaluation points across seeds (all seeds share the schedule).
    const std::size_t eval_points = per_seed_evals.empty() ? 0 : per_seed_evals[0].size();
    for (std::size_t p = 0; p < eval_points; ++p) {
        EvalPoint point;
        point.iteration = per_seed_evals[0][p].first;
        for (std::size_t s = 0; s < seed_count; ++s) {
            const auto& stats = per_seed_evals[s][p].second;
            point.per_seed_means.push_back(stats.mean_return());
            point.collisions += stats.collisions;
        }
        if (point.per_seed_means.size() >= 2) {
            const auto [mean, ci] = confidence_interval(point.per_seed_means);
            point.mean = mean;
            point.ci95 = ci;
        } else {
            point.mean = point.per_seed_means.empty() ? 0.0 : point.per_seed_means[0];
            point.ci95 = 0.0;
        }
        result.metrics.evals.push_back(std::move(point));
    }
    if (!result.metrics.evals.empty()) result.final_eval = result.metrics.evals.back();

    for (const auto& run : runs) result.any_degraded = result.any_degraded || run->any_degraded();
    return result;
}

}  // namespace marl
