#ifndef MARL_FORAGING_HPP
#define MARL_FORAGING_HPP

#include <optional>

#include "marl/env.hpp"
#include "marl/rng.hpp"

namespace marl {

// Scenario parameters, usually parsed from names shaped like
// "8x8-2p-2f-c" or "10x10-3p-3f-2s" (grid, players, food, optional sight
// radius, optional cooperative flag). Absent sight means full observability.
struct ForagingConfig {
    int grid_size = 8;
    int num_players = 2;
    int num_food = 2;
    std::optional<int> sight_radius;  // nullopt = full observability
    bool cooperative = false;

    std::string name() const;
};

ForagingConfig lbf_parse_scenario(const std::string& name);

// Grid foraging: each agent has a level, each food has a level, and a food is
// harvested when the combined levels of adjacent agents that chose "load"
// reach the food's level. Harvest rewards are scaled so a full clear sums to 1.
class Foraging : public Env {
public:
    enum Action { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kStay = 4, kLoad = 5 };

    struct Harvest {
        int food_index = 0;
        double reward = 0.0;
        std::vector<int> loaders;        // agent indices
        std::vector<int> loader_levels;  // aligned with loaders
    };

    explicit Foraging(ForagingConfig config);

    const EnvSpec& spec() const override { return spec_; }
    std::string scenario_name() const override { return config_.name(); }
    std::vector<Obs> reset(std::uint64_t seed) override;
    // Scripted episode with explicit placements and levels.
    std::vector<Obs> reset_to(std::vector<GridPos> agents, std::vector<int> agent_levels,
                              std::vector<GridPos> foods, std::vector<int> food_levels);
    StepResult step(const std::vector<int>& joint_action) override;
    std::string action_name(int action) const override;
    std::string render_text() const override;

    const ForagingConfig& config() const { return config_; }
    const std::vector<GridPos>& agent_positions() const { return agent_pos_; }
    const std::vector<int>& agent_levels() const { return agent_levels_; }
    const std::vector<int>& food_levels() const { return food_levels_; }
    const std::vector<Harvest>& last_step_harvests() const { return last_harvests_; }

private:
    std::vector<Obs> observe() const;
    bool in_sight(int viewer, GridPos cell) const;

    ForagingConfig config_;
    EnvSpec spec_;
    int step_cap_;
    std::vector<GridPos> agent_pos_;
    std::vector<int> agent_levels_;
    std::vector<GridPos> food_pos_;
    std::vector<int> food_levels_;
    std::vector<bool> food_alive_;
    double total_food_level_ = 0.0;
    std::vector<Harvest> last_harvests_;
    int step_count_ = 0;
    bool live_ = false;
};

}  // namespace marl

#endif
