#ifndef MARL_CORE_HPP
#define MARL_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace marl {

using Obs = std::vector<double>;

enum class EnvKind { matrix, spaceworld, foraging, warehouse };

std::string env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string& name);

// Static dimensions of a scenario: N agents, per-agent observation width,
// per-agent action count and the episode cap. Dynamics live in each Env.
struct EnvSpec {
    int num_agents = 0;
    int obs_dim_per_agent = 0;
    int action_count_per_agent = 0;
    int max_episode_steps = 0;
    EnvKind env_kind = EnvKind::matrix;

    void validate() const;
};

// One transition: the joint observation the agents acted from, the joint
// action, the single shared reward and the terminal flag.
struct TimeStep {
    std::vector<Obs> joint_obs;
    std::vector<int> joint_action;
    double global_reward = 0.0;
    bool done = false;
};

// An ordered episode. Steps are appended through add_step which rejects
// appends after a terminal step.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(EnvKind kind, std::uint64_t seed) : env_kind_(kind), seed_(seed) {}

    void add_step(TimeStep step);

    const std::vector<TimeStep>& steps() const { return steps_; }
    std::size_t length() const { return steps_.size(); }
    bool finished() const { return !steps_.empty() && steps_.back().done; }
    EnvKind env_kind() const { return env_kind_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::vector<TimeStep> steps_;
    EnvKind env_kind_ = EnvKind::matrix;
    std::uint64_t seed_ = 0;
};

struct EpisodeBatch {
    std::vector<Trajectory> trajectories;
    std::int64_t batch_id = 0;

    int num_agents() const;
    std::size_t total_steps() const;
    void validate() const;  // shared env_kind and N across trajectories
};

enum class CreditSource { shared, oracle, llm_mca, llm_taca };

std::string credit_source_name(CreditSource source);

// N x K per-agent per-timestep credit values for one trajectory.
struct CreditMatrix {
    std::vector<std::vector<double>> values;  // [agent][step]
    CreditSource source = CreditSource::shared;

    int num_agents() const { return static_cast<int>(values.size()); }
    std::size_t num_steps() const { return values.empty() ? 0 : values[0].size(); }
};

using TaskVector = std::vector<int>;

// Optional short integer task vectors per (agent, step). Absent means the
// critic issued nothing for that slot.
struct TaskAssignmentMatrix {
    std::vector<std::vector<std::optional<TaskVector>>> entries;  // [agent][step]

    bool empty() const;
    static TaskAssignmentMatrix absent(int num_agents, std::size_t num_steps);
};

// Undiscounted episode return.
double episode_return(const Trajectory& traj);

// Per-agent sum of credits; the quantity each decentralized learner maximizes.
std::vector<double> per_agent_surrogate_return(const Trajectory& traj,
                                               const CreditMatrix& credits);

struct CreditViolation {
    std::string message;
};

// Shape / finiteness checks on a batch worth of credit matrices. Violations
// come back as data so callers can decide whether to degrade or abort.
std::vector<CreditViolation> validate_credit_matrix(
    const std::vector<CreditMatrix>& credits, const EpisodeBatch& batch);

}  // namespace marl

#endif
