#include "marl/critic.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "marl/foraging.hpp"
#include "marl/matrix_game.hpp"
#include "marl/spaceworld.hpp"
#include "marl/warehouse.hpp"

namespace marl {

CriticVerdict Critic::assign(const EpisodeBatch& batch) {
    batch.validate();
    ++invocations_;
    CriticVerdict verdict = do_assign(batch);
    const auto violations = validate_credit_matrix(verdict.credits, batch);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "critic produced an invalid verdict: " << violations.front().message;
        throw CriticError(os.str(), verdict.raw_response);
    }
    return verdict;
}

std::vector<CreditMatrix> SharedRewardCritic::shared_credits(const EpisodeBatch& batch) {
    std::vector<CreditMatrix> credits;
    credits.reserve(batch.trajectories.size());
    const int n = batch.num_agents();
    for (const auto& traj : batch.trajectories) {
        CreditMatrix m;
        m.source = CreditSource::shared;
        std::vector<double> rewards;
        rewards.reserve(traj.length());
        for (const auto& step : traj.steps()) rewards.push_back(step.global_reward);
        m.values.assign(n, rewards);
        credits.push_back(std::move(m));
    }
    return credits;
}

CriticVerdict SharedRewardCritic::do_assign(const EpisodeBatch& batch) {
    CriticVerdict verdict;
    verdict.credits = shared_credits(batch);
    return verdict;
}

OracleCritic::OracleCritic(EnvConfig env_config, OracleConfig config)
    : env_config_(std::move(env_config)), config_(config), sim_(make_env(env_config_)) {}

CriticVerdict OracleCritic::do_assign(const EpisodeBatch& batch) {
    CriticVerdict verdict;
    verdict.credits.reserve(batch.trajectories.size());
    for (const auto& traj : batch.trajectories) {
        switch (traj.env_kind()) {
            case EnvKind::matrix:
                verdict.credits.push_back(assign_matrix(traj));
                break;
            case EnvKind::spaceworld:
                verdict.credits.push_back(assign_spaceworld(traj));
                break;
            case EnvKind::foraging:
                verdict.credits.push_back(assign_foraging(traj));
                break;
            case EnvKind::warehouse:
                verdict.credits.push_back(assign_warehouse(traj));
                break;
        }
        verdict.credits.back().source = CreditSource::oracle;
    }
    return verdict;
}

CreditMatrix OracleCritic::assign_matrix(const Trajectory& traj) {
    const auto& game = dynamic_cast<const MatrixGame&>(*sim_);
    const auto optimal = game.optimal_joint_action();
    CreditMatrix m;
    m.values.assign(2, std::vector<double>(traj.length(), 0.0));
    for (std::size_t k = 0; k < traj.length(); ++k) {
        const auto& step = traj.steps()[k];
        const bool best =
            step.joint_action[0] == optimal.first && step.joint_action[1] == optimal.second;
        for (int i = 0; i < 2; ++i)
            m.values[i][k] = step.global_reward / 2.0 +
                             (best ? config_.matrix_optimal_bonus : 0.0);
    }
    return m;
}

namespace {

// Distance left in agent i's color-matched task: walk to the mirror, lift it,
// walk to the target, set it down. Drops to zero exactly at delivery, so
// per-step decreases telescope to the initial potential over a clean episode.
double spaceworld_potential(const Spaceworld& env, int agent) {
    const GridPos target = env.placement().targets[agent];
    const GridPos mirror = env.mirror_positions()[agent];
    const int carrier = env.carrier_of(agent);
    if (carrier < 0 && mirror == target) return 0.0;
    if (carrier >= 0)
        return manhattan(env.agent_positions()[carrier], target) + 1.0;
    return manhattan(env.agent_positions()[agent], mirror) + manhattan(mirror, target) + 2.0;
}

}  // namespace

CreditMatrix OracleCritic::assign_spaceworld(const Trajectory& traj) {
    auto& env = dynamic_cast<Spaceworld&>(*sim_);
    env.reset(traj.seed());

    CreditMatrix m;
    m.values.assign(2, std::vector<double>(traj.length(), 0.0));
    for (std::size_t k = 0; k < traj.length(); ++k) {
        const auto& step = traj.steps()[k];
        const std::array<GridPos, 2> before = env.agent_positions();
        const std::array<double, 2> phi_before = {spaceworld_potential(env, 0),
                                                  spaceworld_potential(env, 1)};
        const StepResult result = env.step(step.joint_action);
        if (std::abs(result.reward - step.global_reward) > 1e-9)
            throw CriticError("oracle replay diverged from recorded spaceworld trajectory");

        if (result.termination == TerminationKind::collision) {
            // Blame every agent whose attempted move created the conflict.
            for (int i = 0; i < 2; ++i) {
                const GridPos desired =
                    Spaceworld::apply_move(before[i], step.joint_action[i], env.grid_size());
                if (!(desired == before[i]))
                    m.values[i][k] -= config_.spaceworld_collision_penalty;
            }
            continue;
        }
        for (int i = 0; i < 2; ++i) {
            m.values[i][k] = phi_before[i] - spaceworld_potential(env, i);
            if (result.termination == TerminationKind::complete)
                m.values[i][k] += result.reward / 2.0;
        }
    }
    return m;
}

CreditMatrix OracleCritic::assign_foraging(const Trajectory& traj) {
    auto& env = dynamic_cast<Foraging&>(*sim_);
    env.reset(traj.seed());

    const int n = env.spec().num_agents;
    CreditMatrix m;
    m.values.assign(n, std::vector<double>(traj.length(), 0.0));
    for (std::size_t k = 0; k < traj.length(); ++k) {
        const auto& step = traj.steps()[k];
        const StepResult result = env.step(step.joint_action);
        if (std::abs(result.reward - step.global_reward) > 1e-9)
            throw CriticError("oracle replay diverged from recorded foraging trajectory");
        for (const auto& harvest : env.last_step_harvests()) {
            const double level_sum =
                std::accumulate(harvest.loader_levels.begin(), harvest.loader_levels.end(), 0.0);
            for (std::size_t j = 0; j < harvest.loaders.size(); ++j)
                m.values[harvest.loaders[j]][k] += config_.foraging_harvest_scale *
                                                   harvest.reward * harvest.loader_levels[j] /
                                                   level_sum;
        }
    }
    return m;
}

CreditMatrix OracleCritic::assign_warehouse(const Trajectory& traj) {
    auto& env = dynamic_cast<Warehouse&>(*sim_);
    env.reset(traj.seed());

    const int n = env.spec().num_agents;
    CreditMatrix m;
    m.values.assign(n, std::vector<double>(traj.length(), 0.0));
    for (std::size_t k = 0; k < traj.length(); ++k) {
        const auto& step = traj.steps()[k];
        const StepResult result = env.step(step.joint_action);
        if (std::abs(result.reward - step.global_reward) > 1e-9)
            throw CriticError("oracle replay diverged from recorded warehouse trajectory");
        for (int robot : env.last_step_events().deliveries)
            m.values[robot][k] += config_.warehouse_delivery_credit;
        for (int robot : env.last_step_events().requested_pickups)
            m.values[robot][k] += config_.warehouse_pickup_bonus;
    }
    return m;
}

std::unique_ptr<Critic> make_scripted_critic(const std::string& critic_kind,
                                             const EnvConfig& env_config,
                                             const OracleConfig& oracle_config) {
    if (critic_kind == "shared") return std::make_unique<SharedRewardCritic>();
    if (critic_kind == "oracle")
        return std::make_unique<OracleCritic>(env_config, oracle_config);
    throw std::invalid_argument("unknown scripted critic kind: " + critic_kind);
}

}  // namespace marl
