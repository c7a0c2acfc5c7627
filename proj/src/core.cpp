#include "marl/core.hpp"

#include <cmath>
#include <sstream>

namespace marl {

std::string env_kind_name(EnvKind kind) {
    switch (kind) {
        case EnvKind::matrix: return "matrix";
        case EnvKind::spaceworld: return "spaceworld";
        case EnvKind::foraging: return "foraging";
        case EnvKind::warehouse: return "warehouse";
    }
    return "unknown";
}

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "matrix") return EnvKind::matrix;
    if (name == "spaceworld") return EnvKind::spaceworld;
    if (name == "foraging" || name == "lbf") return EnvKind::foraging;
    if (name == "warehouse" || name == "rware") return EnvKind::warehouse;
    throw std::invalid_argument("unknown environment kind: " + name);
}

void EnvSpec::validate() const {
    if (num_agents < 1) throw std::invalid_argument("EnvSpec: num_agents must be >= 1");
    if (action_count_per_agent < 2)
        throw std::invalid_argument("EnvSpec: action_count_per_agent must be >= 2");
    if (max_episode_steps < 1)
        throw std::invalid_argument("EnvSpec: max_episode_steps must be >= 1");
    if (obs_dim_per_agent < 1)
        throw std::invalid_argument("EnvSpec: obs_dim_per_agent must be >= 1");
}

void Trajectory::add_step(TimeStep step) {
    if (finished()) throw std::logic_error("Trajectory: step appended after terminal step");
    steps_.push_back(std::move(step));
}

int EpisodeBatch::num_agents() const {
    if (trajectories.empty() || trajectories[0].steps().empty()) return 0;
    return static_cast<int>(trajectories[0].steps()[0].joint_obs.size());
}

std::size_t EpisodeBatch::total_steps() const {
    std::size_t total = 0;
    for (const auto& t : trajectories) total += t.length();
    return total;
}

void EpisodeBatch::validate() const {
    if (trajectories.empty()) throw std::invalid_argument("EpisodeBatch: no trajectories");
    const EnvKind kind = trajectories[0].env_kind();
    const int n = num_agents();
    for (const auto& traj : trajectories) {
        if (traj.env_kind() != kind)
            throw std::invalid_argument("EpisodeBatch: mixed env kinds");
        if (traj.steps().empty())
            throw std::invalid_argument("EpisodeBatch: empty trajectory");
        for (const auto& step : traj.steps()) {
            if (static_cast<int>(step.joint_obs.size()) != n ||
                static_cast<int>(step.joint_action.size()) != n)
                throw std::invalid_argument("EpisodeBatch: agent count mismatch");
        }
    }
}

std::string credit_source_name(CreditSource source) {
    switch (source) {
        case CreditSource::shared: return "shared";
        case CreditSource::oracle: return "oracle";
        case CreditSource::llm_mca: return "llm_mca";
        case CreditSource::llm_taca: return "llm_taca";
    }
    return "unknown";
}

bool TaskAssignmentMatrix::empty() const {
    for (const auto& row : entries)
        for (const auto& e : row)
            if (e.has_value()) return false;
    return true;
}

TaskAssignmentMatrix TaskAssignmentMatrix::absent(int num_agents, std::size_t num_steps) {
    TaskAssignmentMatrix m;
    m.entries.assign(num_agents, std::vector<std::optional<TaskVector>>(num_steps));
    return m;
}

double episode_return(const Trajectory& traj) {
    if (traj.steps().empty()) throw std::invalid_argument("episode_return: empty trajectory");
    double total = 0.0;
    for (const auto& step : traj.steps()) total += step.global_reward;
    return total;
}

std::vector<double> per_agent_surrogate_return(const Trajectory& traj,
                                               const CreditMatrix& credits) {
    if (credits.num_steps() != traj.length())
        throw std::invalid_argument("per_agent_surrogate_return: credit length mismatch");
    std::vector<double> out(credits.values.size(), 0.0);
    for (std::size_t i = 0; i < credits.values.size(); ++i) {
        if (credits.values[i].size() != traj.length())
            throw std::invalid_argument("per_agent_surrogate_return: ragged credit matrix");
        for (double c : credits.values[i]) out[i] += c;
    }
    return out;
}

std::vector<CreditViolation> validate_credit_matrix(
    const std::vector<CreditMatrix>& credits, const EpisodeBatch& batch) {
    std::vector<CreditViolation> violations;
    auto report = [&](const std::string& msg) { violations.push_back({msg}); };

    if (credits.size() != batch.trajectories.size()) {
        std::ostringstream os;
        os << "credit matrix count " << credits.size() << " != trajectory count "
           << batch.trajectories.size();
        report(os.str());
        return violations;
    }
    const int n = batch.num_agents();
    for (std::size_t t = 0; t < credits.size(); ++t) {
        const auto& m = credits[t];
        const std::size_t k = batch.trajectories[t].length();
        if (m.num_agents() != n) {
            std::ostringstream os;
            os << "trajectory " << t << ": expected " << n << " agent rows, got "
               << m.num_agents();
            report(os.str());
            continue;
        }
        for (int i = 0; i < m.num_agents(); ++i) {
            if (m.values[i].size() != k) {
                std::ostringstream os;
                os << "trajectory " << t << " agent " << i << ": length mismatch ("
                   << m.values[i].size() << " != " << k << ")";
                report(os.str());
                continue;
            }
            for (std::size_t s = 0; s < k; ++s) {
                if (!std::isfinite(m.values[i][s])) {
                    std::ostringstream os;
                    os << "trajectory " << t << ": non-finite at (" << i << "," << s << ")";
                    report(os.str());
                }
            }
        }
    }
    return violations;
}

}  // namespace marl
