#ifndef MARL_SPACEWORLD_HPP
#define MARL_SPACEWORLD_HPP

#include <array>

#include "marl/env.hpp"
#include "marl/rng.hpp"

namespace marl {

// Two satellite agents each ferry a color-matched mirror to a target cell on
// an open grid. Any attempt by both agents to occupy one cell (or swap cells)
// destroys them and ends the episode with reward zero. Completion pays on a
// 0..10 scale that loses one point per step beyond the minimal plan.
class Spaceworld : public Env {
public:
    enum Action { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kStay = 4, kInteract = 5 };

    // Exact joint-plan search is affordable up to this grid size; larger
    // grids fall back to the closed-form bound.
    static constexpr int kExactSearchMaxGrid = 6;
    static constexpr int kExtraStepBudget = 10;  // t_limit - t_min

    struct Placement {
        std::array<GridPos, 2> agents;
        std::array<GridPos, 2> mirrors;
        std::array<GridPos, 2> targets;
    };

    explicit Spaceworld(int grid_size = 10);

    const EnvSpec& spec() const override { return spec_; }
    std::string scenario_name() const override;
    std::vector<Obs> reset(std::uint64_t seed) override;
    // Deterministic episode from an explicit placement (scripted scenarios).
    std::vector<Obs> reset_to(const Placement& placement);
    StepResult step(const std::vector<int>& joint_action) override;
    std::string action_name(int action) const override;
    std::string render_text() const override;

    int grid_size() const { return grid_size_; }
    int minimal_steps() const { return t_min_; }
    int step_limit() const { return t_limit_; }
    const Placement& placement() const { return placement_; }
    const std::array<GridPos, 2>& agent_positions() const { return agent_pos_; }
    const std::array<GridPos, 2>& mirror_positions() const { return mirror_pos_; }
    int carrier_of(int mirror) const { return carried_by_[mirror]; }

    // Where a move action lands from p (walls clamp to p); stay/interact stay put.
    static GridPos apply_move(GridPos p, int action, int grid_size);

    // Max over agents of the color-matched solo plan: walk to the mirror,
    // one pickup, walk to the target, one drop. Ignores agent interference.
    static int formula_minimal_steps(const Placement& p);

    // Breadth-first search over the joint product state space under the real
    // step dynamics (simultaneous moves, collision exclusion, cross pickups).
    static int search_minimal_steps(int grid_size, const Placement& p);

    // Dispatcher used for reward normalization: exact search on small grids,
    // formula elsewhere.
    static int minimal_steps(int grid_size, const Placement& p);

    static Placement sample_placement(int grid_size, Rng& rng);

private:
    std::vector<Obs> observe() const;
    bool mirror_delivered(int m) const;

    EnvSpec spec_;
    int grid_size_;
    Placement placement_;
    std::array<GridPos, 2> agent_pos_;
    std::array<GridPos, 2> mirror_pos_;   // position of carrier while carried
    std::array<int, 2> carried_by_{-1, -1};  // mirror -> agent or -1
    std::array<int, 2> carrying_{-1, -1};    // agent -> mirror or -1
    int step_count_ = 0;
    int t_min_ = 0;
    int t_limit_ = 0;
    bool live_ = false;
};

}  // namespace marl

#endif
