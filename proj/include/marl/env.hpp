#ifndef MARL_ENV_HPP
#define MARL_ENV_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "marl/core.hpp"

namespace marl {

struct GridPos {
    int x = 0;
    int y = 0;
    bool operator==(const GridPos&) const = default;
};

inline int manhattan(GridPos a, GridPos b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

enum class TerminationKind { none, complete, collision, timeout };

struct StepResult {
    std::vector<Obs> joint_obs;
    double reward = 0.0;
    bool done = false;
    TerminationKind termination = TerminationKind::none;
};

// Seeded, deterministic episode simulator. One instance per rollout worker;
// reset(seed) fully re-derives the episode so trajectories can be replayed
// from (seed, action sequence) alone.
class Env {
public:
    virtual ~Env() = default;

    virtual const EnvSpec& spec() const = 0;
    virtual std::string scenario_name() const = 0;
    virtual std::vector<Obs> reset(std::uint64_t seed) = 0;
    virtual StepResult step(const std::vector<int>& joint_action) = 0;
    virtual std::string action_name(int action) const = 0;
    virtual std::string render_text() const { return {}; }
};

}  // namespace marl

#endif
