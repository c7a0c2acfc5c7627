#ifndef MARL_WAREHOUSE_HPP
#define MARL_WAREHOUSE_HPP

#include <deque>

#include "marl/env.hpp"
#include "marl/rng.hpp"

namespace marl {

enum class WarehouseLayout { tiny, small };

struct WarehouseConfig {
    WarehouseLayout layout = WarehouseLayout::tiny;
    int num_robots = 2;

    std::string name() const;
};

WarehouseConfig rware_parse_scenario(const std::string& name);

// Shelf-delivery grid with translation-only kinematics. Robots pick shelves
// with toggle_load, haul requested ones to a workstation for +1, then return
// them to any empty rack cell. Each robot sees only a 3x3 window plus its own
// carrying flag and position. Fixed 500-step horizon.
class Warehouse : public Env {
public:
    enum Action { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kStay = 4, kToggleLoad = 5 };

    static constexpr int kHorizon = 500;

    struct StepEvents {
        std::vector<int> deliveries;         // robots that completed a delivery
        std::vector<int> requested_pickups;  // robots that lifted a requested shelf
    };

    explicit Warehouse(WarehouseConfig config);

    const EnvSpec& spec() const override { return spec_; }
    std::string scenario_name() const override { return config_.name(); }
    std::vector<Obs> reset(std::uint64_t seed) override;
    // Scripted episode: explicit robot cells and request queue.
    std::vector<Obs> reset_to(const std::vector<GridPos>& robots,
                              const std::vector<int>& requests, std::uint64_t seed = 0);
    StepResult step(const std::vector<int>& joint_action) override;
    std::string action_name(int action) const override;
    std::string render_text() const override;

    const WarehouseConfig& config() const { return config_; }
    const std::vector<GridPos>& robot_positions() const { return robot_pos_; }
    const std::vector<int>& carrying() const { return carrying_; }
    const StepEvents& last_step_events() const { return events_; }
    const std::deque<int>& request_queue() const { return requests_; }
    int width() const { return width_; }
    int height() const { return height_; }

private:
    int cell_index(GridPos p) const { return p.y * width_ + p.x; }
    bool is_rack(GridPos p) const { return rack_[cell_index(p)]; }
    bool is_workstation(GridPos p) const;
    int stored_shelf_at(GridPos p) const { return shelf_at_[cell_index(p)]; }
    bool requested(int shelf) const;
    bool delivery_pose(int robot) const;
    std::vector<Obs> observe() const;

    WarehouseConfig config_;
    EnvSpec spec_;
    int width_ = 0;
    int height_ = 0;
    std::vector<bool> rack_;        // shelf home cells
    std::vector<GridPos> workstations_;
    int num_shelves_ = 0;

    std::vector<int> shelf_at_;     // cell -> stored shelf id or -1
    std::vector<GridPos> robot_pos_;
    std::vector<int> carrying_;     // robot -> shelf id or -1
    std::deque<int> requests_;
    Rng request_rng_{0};
    StepEvents events_;
    int step_count_ = 0;
    bool live_ = false;
};

}  // namespace marl

#endif
