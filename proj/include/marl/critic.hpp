#ifndef MARL_CRITIC_HPP
#define MARL_CRITIC_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "marl/core.hpp"
#include "marl/env_factory.hpp"

namespace marl {

struct CriticError : std::runtime_error {
    explicit CriticError(const std::string& message, std::string transcript_text = {})
        : std::runtime_error(message), transcript(std::move(transcript_text)) {}
    std::string transcript;
};

struct CriticVerdict {
    std::vector<CreditMatrix> credits;          // one per trajectory
    std::vector<TaskAssignmentMatrix> tasks;    // empty for non-task critics
    std::string explanation;
    std::string raw_response;                   // transcript kept for audit
    bool degraded = false;                      // fallback credits in effect
    int retry_count = 0;
};

// Centralized critic: one whole-batch verdict per training iteration. The
// base class counts invocations and refuses to release a verdict that fails
// the credit shape checks.
class Critic {
public:
    virtual ~Critic() = default;

    CriticVerdict assign(const EpisodeBatch& batch);

    virtual CreditSource source() const = 0;
    std::int64_t invocation_count() const { return invocations_; }

protected:
    virtual CriticVerdict do_assign(const EpisodeBatch& batch) = 0;

private:
    std::int64_t invocations_ = 0;
};

// No-credit-assignment baseline: every agent receives the raw shared reward.
class SharedRewardCritic : public Critic {
public:
    CreditSource source() const override { return CreditSource::shared; }

    static std::vector<CreditMatrix> shared_credits(const EpisodeBatch& batch);

protected:
    CriticVerdict do_assign(const EpisodeBatch& batch) override;
};

struct OracleConfig {
    double matrix_optimal_bonus = 1.0;        // added on the globally optimal pair
    double spaceworld_collision_penalty = 5.0;
    double foraging_harvest_scale = 1.0;
    double warehouse_delivery_credit = 1.0;
    double warehouse_pickup_bonus = 0.1;
};

// Deterministic environment-aware stand-in for the language-model critic so
// the full training stack runs offline. Trajectories are replayed through a
// private environment instance (they carry their reset seeds), which gives
// the oracle exact state access for shaping and event attribution.
class OracleCritic : public Critic {
public:
    OracleCritic(EnvConfig env_config, OracleConfig config = {});

    CreditSource source() const override { return CreditSource::oracle; }
    const OracleConfig& oracle_config() const { return config_; }

protected:
    CriticVerdict do_assign(const EpisodeBatch& batch) override;

private:
    CreditMatrix assign_matrix(const Trajectory& traj);
    CreditMatrix assign_spaceworld(const Trajectory& traj);
    CreditMatrix assign_foraging(const Trajectory& traj);
    CreditMatrix assign_warehouse(const Trajectory& traj);

    EnvConfig env_config_;
    OracleConfig config_;
    std::unique_ptr<Env> sim_;  // replay instance
};

std::unique_ptr<Critic> make_scripted_critic(const std::string& critic_kind,
                                             const EnvConfig& env_config,
                                             const OracleConfig& oracle_config);

}  // namespace marl

#endif
