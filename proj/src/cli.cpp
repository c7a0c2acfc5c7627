#include "marl/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "marl/metrics_io.hpp"
#include "marl/parsing.hpp"
#include "marl/trainer.hpp"

namespace marl {

namespace {

struct CliOptions {
    std::string env_string = "matrix";
    std::string critic = "oracle";
    int seeds = 5;
    std::string seed_list;
    int iterations = 100;
    int episodes_per_iter = 8;
    int update_epochs = 4;
    std::string normalization = "symmetric";
    std::string endpoint;
    std::string model = "gemma-7b";
    std::string record_path;
    std::string replay_path;
    std::string out_dir;
    bool parallel = false;
    std::string run_id = "run";
    bool export_dataset = false;

    double lr = 5e-4;
    double gamma = 0.99;
    std::string hidden = "64,64";
    int replay_capacity = 50000;
    int minibatch = 64;
    int sync_interval = 200;
    int d_task = 4;
    bool sgd = false;

    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_anneal_fraction = 0.6;
    double dropout_end = 0.5;

    double matrix_bonus = 1.0;
    double collision_penalty = 5.0;
    double harvest_scale = 1.0;
    double delivery_credit = 1.0;
    double pickup_bonus = 0.1;

    int eval_interval = 10;
    int eval_episodes = 50;
    std::uint64_t eval_seed = 424242;

    std::int64_t token_budget = 60000;
    int max_parse_retries = 2;
    int backoff_base_ms = 1000;
};

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad " + what + " list entry '" + token + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(what + " list is empty");
    return out;
}

TrainConfig to_train_config(const CliOptions& opt) {
    TrainConfig config;
    config.env = parse_env_string(opt.env_string);
    config.critic_kind = opt.critic;
    config.iterations = opt.iterations;
    config.episodes_per_iteration = opt.episodes_per_iter;
    config.update_epochs = opt.update_epochs;

    if (!opt.seed_list.empty()) {
        config.seeds.clear();
        for (int s : parse_int_list(opt.seed_list, "seed"))
            config.seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
        if (opt.seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
        config.seeds.clear();
        for (int s = 1; s <= opt.seeds; ++s) config.seeds.push_back(s);
    }

    config.policy.learning_rate = opt.lr;
    config.policy.gamma = opt.gamma;
    config.policy.hidden = parse_int_list(opt.hidden, "hidden layer");
    config.policy.replay_capacity = opt.replay_capacity;
    config.policy.minibatch = opt.minibatch;
    config.policy.sync_interval = opt.sync_interval;
    config.policy.d_task = opt.d_task;
    config.policy.use_adam = !opt.sgd;

    config.epsilon_start = opt.epsilon_start;
    config.epsilon_end = opt.epsilon_end;
    config.epsilon_anneal_fraction = opt.epsilon_anneal_fraction;
    config.task_schedule.dropout_end = opt.dropout_end;

    config.normalization = normalization_mode_from_name(opt.normalization);
    config.oracle.matrix_optimal_bonus = opt.matrix_bonus;
    config.oracle.spaceworld_collision_penalty = opt.collision_penalty;
    config.oracle.foraging_harvest_scale = opt.harvest_scale;
    config.oracle.warehouse_delivery_credit = opt.delivery_credit;
    config.oracle.warehouse_pickup_bonus = opt.pickup_bonus;

    config.eval_interval = opt.eval_interval;
    config.eval_episodes = opt.eval_episodes;
    config.eval_seed = opt.eval_seed;
    config.parallel_seeds = opt.parallel;
    config.run_id = opt.run_id;
    config.export_dataset = opt.export_dataset;
    config.out_dir = opt.out_dir.empty() ? "out/" + opt.run_id : opt.out_dir;

    config.chat.endpoint = opt.endpoint;
    config.chat.model_name = opt.model;
    config.chat.token_budget = opt.token_budget;
    config.chat.backoff_base_ms = opt.backoff_base_ms;
    config.llm_max_parse_retries = opt.max_parse_retries;
    if (!opt.replay_path.empty() && !opt.record_path.empty())
        throw std::invalid_argument("--replay and --record are mutually exclusive");
    if (!opt.replay_path.empty()) {
        config.chat.mode = ChatMode::replay;
        config.chat.cassette_path = opt.replay_path;
    } else if (!opt.record_path.empty()) {
        config.chat.mode = ChatMode::record;
        config.chat.cassette_path = opt.record_path;
    } else {
        config.chat.mode = ChatMode::live;
    }
    if (config.llm_critic() && config.chat.mode != ChatMode::replay) {
        const char* key = std::getenv("LLM_API_KEY");
        config.chat.api_key = key == nullptr ? "" : key;
    }
    return config;
}

void add_run_options(CLI::App* cmd, CliOptions& opt) {
    cmd->set_config("--config", "", "run configuration file (TOML-style sections)");
    cmd->add_option("--env", opt.env_string,
                    "environment, e.g. matrix, spaceworld:10x10, lbf:8x8-2p-2f-c, "
                    "rware:tiny-2p");
    cmd->add_option("--critic", opt.critic, "shared | oracle | llm_mca | llm_taca");
    cmd->add_option("--seeds", opt.seeds, "number of training seeds (1..N)");
    cmd->add_option("--seed-list", opt.seed_list, "explicit comma-separated seeds");
    cmd->add_option("--iterations", opt.iterations, "training iterations per seed");
    cmd->add_option("--episodes-per-iter", opt.episodes_per_iter, "episodes per iteration");
    cmd->add_option("--update-epochs", opt.update_epochs, "update epochs per iteration");
    cmd->add_option("--normalization", opt.normalization,
                    "credit normalization: none | symmetric | sum_preserving");
    cmd->add_option("--endpoint", opt.endpoint, "chat-completions endpoint (http)");
    cmd->add_option("--model", opt.model, "model name sent to the endpoint");
    cmd->add_option("--record", opt.record_path, "record live responses to this cassette");
    cmd->add_option("--replay", opt.replay_path, "replay responses from this cassette");
    cmd->add_option("--out", opt.out_dir, "output directory (default out/<run-id>)");
    cmd->add_flag("--parallel", opt.parallel, "run seeds on parallel threads");
    cmd->add_option("--run-id", opt.run_id, "identifier for outputs");
    cmd->add_flag("--export-dataset", opt.export_dataset,
                  "write annotated episodes under <out>/dataset/");

    cmd->add_option("--policy.lr", opt.lr, "learning rate");
    cmd->add_option("--policy.gamma", opt.gamma, "discount factor");
    cmd->add_option("--policy.hidden", opt.hidden, "hidden sizes, comma separated");
    cmd->add_option("--policy.replay-capacity", opt.replay_capacity, "replay buffer size");
    cmd->add_option("--policy.minibatch", opt.minibatch, "minibatch size");
    cmd->add_option("--policy.sync-interval", opt.sync_interval, "target sync interval");
    cmd->add_option("--policy.d-task", opt.d_task, "task input slots");
    cmd->add_flag("--policy.sgd", opt.sgd, "plain SGD instead of Adam");

    cmd->add_option("--train.epsilon-start", opt.epsilon_start, "initial exploration rate");
    cmd->add_option("--train.epsilon-end", opt.epsilon_end, "final exploration rate");
    cmd->add_option("--train.epsilon-anneal-fraction", opt.epsilon_anneal_fraction,
                    "fraction of training spent annealing epsilon");
    cmd->add_option("--train.dropout-end", opt.dropout_end,
                    "task-slot dropout rate at the end of training");
    cmd->add_option("--train.eval-interval", opt.eval_interval,
                    "iterations between evaluations");
    cmd->add_option("--train.eval-episodes", opt.eval_episodes, "episodes per evaluation");
    cmd->add_option("--train.eval-seed", opt.eval_seed, "seed for evaluation episodes");

    cmd->add_option("--oracle.matrix-bonus", opt.matrix_bonus,
                    "credit bonus on the optimal joint action");
    cmd->add_option("--oracle.collision-penalty", opt.collision_penalty,
                    "credit deducted from colliding movers");
    cmd->add_option("--oracle.harvest-scale", opt.harvest_scale,
                    "scale on proportional harvest credits");
    cmd->add_option("--oracle.delivery-credit", opt.delivery_credit,
                    "credit for the delivering robot");
    cmd->add_option("--oracle.pickup-bonus", opt.pickup_bonus,
                    "credit for lifting a requested shelf");

    cmd->add_option("--llm.token-budget", opt.token_budget, "history budget (tokens)");
    cmd->add_option("--llm.max-parse-retries", opt.max_parse_retries,
                    "corrective re-asks before shared-reward fallback");
    cmd->add_option("--llm.backoff-base-ms", opt.backoff_base_ms,
                    "initial transport retry delay");
}

int run_train(const CliOptions& opt, bool force_replay) {
    TrainConfig config = to_train_config(opt);
    if (force_replay && config.chat.mode != ChatMode::replay)
        throw std::invalid_argument("replay requires --replay <cassette>");
    config.validate();

    Trainer trainer(config);
    const RunResult result = trainer.run();

    std::filesystem::create_directories(config.out_dir);
    const auto out = std::filesystem::path(config.out_dir);
    emit_metrics_csv(result.metrics, (out / "metrics.csv").string());
    write_run_summary(result, config, (out / "summary.json").string());

    for (const auto& point : result.metrics.evals)
        std::cout << "iteration " << point.iteration << ": eval mean " << point.mean << " +/- "
                  << point.ci95 << "\n";
    std::cout << "run '" << config.run_id << "' finished; outputs in " << config.out_dir
              << (result.any_degraded ? " (degraded: critic fallback was used)" : "") << "\n";
    return result.any_degraded ? 3 : 0;
}

int run_eval(const CliOptions& opt) {
    TrainConfig config = to_train_config(opt);
    const auto checkpoint_root = std::filesystem::path(config.out_dir) / "checkpoints";
    if (!std::filesystem::exists(checkpoint_root))
        throw std::invalid_argument("no checkpoints under " + config.out_dir);

    std::vector<std::filesystem::path> seed_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(checkpoint_root))
        if (entry.is_directory()) seed_dirs.push_back(entry.path());
    std::sort(seed_dirs.begin(), seed_dirs.end());
    if (seed_dirs.empty())
        throw std::invalid_argument("no seed checkpoints under " + checkpoint_root.string());

    std::vector<double> per_seed_means;
    for (const auto& dir : seed_dirs) {
        std::vector<QNetwork> policies;
        for (int i = 0;; ++i) {
            const auto file = dir / ("agent" + std::to_string(i) + ".ckpt");
            if (!std::filesystem::exists(file)) break;
            policies.push_back(QNetwork::load_file(file.string()));
        }
        if (policies.empty())
            throw std::invalid_argument("no agent checkpoints in " + dir.string());
        auto env = make_env(config.env);
        auto stats = evaluate_policies(policies, *env, config.eval_episodes, config.eval_seed);
        per_seed_means.push_back(stats.mean_return());
        std::cout << dir.filename().string() << ": mean return " << stats.mean_return()
                  << " over " << config.eval_episodes << " episodes (collisions "
                  << stats.collisions << ")\n";
    }
    if (per_seed_means.size() >= 2) {
        const auto [mean, ci] = confidence_interval(per_seed_means);
        std::cout << "overall: " << mean << " +/- " << ci << " (95% CI over "
                  << per_seed_means.size() << " seeds)\n";
    }
    return 0;
}

int run_export(const std::string& in_path, const std::string& out_path,
               const std::string& filter_env, const std::string& filter_critic,
               const std::string& filter_run, bool strict) {
    DatasetFilter filter;
    if (!filter_env.empty()) filter.env_kind = env_kind_from_name(filter_env);
    if (!filter_critic.empty()) filter.critic_kind = filter_critic;
    if (!filter_run.empty()) filter.run_id = filter_run;

    DatasetReader reader(in_path, filter, strict);
    const auto parent = std::filesystem::path(out_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    DatasetWriter writer(out_path);
    std::size_t count = 0;
    while (auto record = reader.next()) {
        writer.write_episode(*record);
        ++count;
    }
    for (const auto& w : reader.warnings()) std::cerr << "warning: " << w << "\n";
    std::cout << "exported " << count << " episodes to " << out_path << "\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"centralized-critic multi-agent RL trainer"};
    app.require_subcommand(1);

    CliOptions opt;
    auto* train = app.add_subcommand("train", "train decentralized policies");
    add_run_options(train, opt);
    auto* eval = app.add_subcommand("eval", "evaluate saved checkpoints");
    add_run_options(eval, opt);
    auto* replay = app.add_subcommand("replay", "re-run a recorded critic session");
    add_run_options(replay, opt);

    std::string in_path, out_path, filter_env, filter_critic, filter_run;
    bool strict = false;
    auto* exp = app.add_subcommand("export-dataset", "filter and re-emit dataset files");
    exp->add_option("--in", in_path, "input .jsonl file")->required();
    exp->add_option("--out-file", out_path, "output .jsonl file")->required();
    exp->add_option("--filter-env", filter_env, "keep only this environment");
    exp->add_option("--filter-critic", filter_critic, "keep only this critic kind");
    exp->add_option("--filter-run", filter_run, "keep only this run id");
    exp->add_flag("--strict", strict, "fail on corrupt records instead of skipping");

    auto* validate = app.add_subcommand("validate-config", "check a run configuration");
    add_run_options(validate, opt);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return run_train(opt, false);
        if (replay->parsed()) return run_train(opt, true);
        if (eval->parsed()) return run_eval(opt);
        if (exp->parsed())
            return run_export(in_path, out_path, filter_env, filter_critic, filter_run, strict);
        if (validate->parsed()) {
            TrainConfig config = to_train_config(opt);
            config.validate();
            make_env(config.env);  // surfaces bad scenario strings
            std::cout << "config ok\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace marl
