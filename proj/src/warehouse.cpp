#include "marl/warehouse.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace marl {

namespace {

constexpr int kDx[4] = {0, 0, 1, -1};  // N, S, E, W
constexpr int kDy[4] = {-1, 1, 0, 0};

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::string WarehouseConfig::name() const {
    std::ostringstream os;
    os << (layout == WarehouseLayout::tiny ? "tiny" : "small") << " " << num_robots << "p";
    return os.str();
}

WarehouseConfig rware_parse_scenario(const std::string& name) {
    std::string s = lower(name);
    std::replace(s.begin(), s.end(), '-', ' ');
    std::istringstream is(s);
    std::string size_token, robots_token;
    if (!(is >> size_token >> robots_token))
        throw std::invalid_argument("scenario parse error: expected '{tiny|small} {N}p' in '" +
                                    name + "'");
    WarehouseConfig config;
    if (size_token == "tiny") {
        config.layout = WarehouseLayout::tiny;
    } else if (size_token == "small") {
        config.layout = WarehouseLayout::small;
    } else {
        throw std::invalid_argument("scenario parse error: unknown layout token '" + size_token +
                                    "'");
    }
    if (robots_token.empty() || robots_token.back() != 'p')
        throw std::invalid_argument("scenario parse error: bad robot token '" + robots_token + "'");
    try {
        config.num_robots = std::stoi(robots_token.substr(0, robots_token.size() - 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("scenario parse error: bad robot token '" + robots_token + "'");
    }
    if (config.num_robots < 1)
        throw std::invalid_argument("scenario parse error: bad robot token '" + robots_token + "'");
    return config;
}

Warehouse::Warehouse(WarehouseConfig config) : config_(config) {
    width_ = 10;
    height_ = config_.layout == WarehouseLayout::tiny ? 11 : 20;

    rack_.assign(width_ * height_, false);
    const std::vector<int> rack_cols = {1, 2, 4, 5, 7, 8};
    std::vector<int> rack_rows;
    for (int band = 0; band * 4 + 4 < height_ - 1; ++band)
        for (int r = 0; r < 3; ++r) rack_rows.push_back(2 + band * 4 + r);
    for (int y : rack_rows)
        for (int x : rack_cols) rack_[y * width_ + x] = true;
    num_shelves_ = static_cast<int>(rack_cols.size() * rack_rows.size());

    workstations_ = {GridPos{4, height_ - 1}, GridPos{5, height_ - 1}};

    if (config_.num_robots < 1) throw std::invalid_argument("Warehouse: need at least one robot");
    if (config_.num_robots >= num_shelves_)
        throw std::invalid_argument("Warehouse: more robots than shelves");

    spec_.num_agents = config_.num_robots;
    spec_.obs_dim_per_agent = 9 * 4 + 1 + 2;
    spec_.action_count_per_agent = 6;
    spec_.max_episode_steps = kHorizon;
    spec_.env_kind = EnvKind::warehouse;
    spec_.validate();
}

bool Warehouse::is_workstation(GridPos p) const {
    return std::find(workstations_.begin(), workstations_.end(), p) != workstations_.end();
}

bool Warehouse::requested(int shelf) const {
    return std::find(requests_.begin(), requests_.end(), shelf) != requests_.end();
}

std::vector<Obs> Warehouse::reset(std::uint64_t seed) {
    Rng rng(seed);
    request_rng_ = Rng(split_mix64(seed ^ 0x5eedULL));

    shelf_at_.assign(width_ * height_, -1);
    int shelf_id = 0;
    for (int c = 0; c < width_ * height_; ++c)
        if (rack_[c]) shelf_at_[c] = shelf_id++;

    // Robots start on distinct corridor cells.
    robot_pos_.clear();
    while (static_cast<int>(robot_pos_.size()) < config_.num_robots) {
        GridPos c{rng.below_int(width_), rng.below_int(height_)};
        if (is_rack(c)) continue;
        bool taken = false;
        for (const auto& r : robot_pos_)
            if (r == c) taken = true;
        if (!taken) robot_pos_.push_back(c);
    }
    carrying_.assign(config_.num_robots, -1);

    requests_.clear();
    while (static_cast<int>(requests_.size()) < config_.num_robots) {
        const int s = rng.below_int(num_shelves_);
        if (!requested(s)) requests_.push_back(s);
    }

    events_ = {};
    step_count_ = 0;
    live_ = true;
    return observe();
}

std::vector<Obs> Warehouse::reset_to(const std::vector<GridPos>& robots,
                                     const std::vector<int>& requests, std::uint64_t seed) {
    if (static_cast<int>(robots.size()) != config_.num_robots)
        throw std::invalid_argument("Warehouse: robot placement count mismatch");
    request_rng_ = Rng(split_mix64(seed ^ 0x5eedULL));
    shelf_at_.assign(width_ * height_, -1);
    int shelf_id = 0;
    for (int c = 0; c < width_ * height_; ++c)
        if (rack_[c]) shelf_at_[c] = shelf_id++;
    robot_pos_ = robots;
    carrying_.assign(config_.num_robots, -1);
    requests_.assign(requests.begin(), requests.end());
    events_ = {};
    step_count_ = 0;
    live_ = true;
    return observe();
}

bool Warehouse::delivery_pose(int robot) const {
    return carrying_[robot] >= 0 && requested(carrying_[robot]) &&
           is_workstation(robot_pos_[robot]);
}

StepResult Warehouse::step(const std::vector<int>& joint_action) {
    if (!live_) throw std::logic_error("Warehouse: step on finished episode");
    const int n = config_.num_robots;
    if (static_cast<int>(joint_action.size()) != n)
        throw std::invalid_argument("Warehouse: wrong action count");
    for (int a : joint_action)
        if (a < 0 || a > 5) throw std::invalid_argument("Warehouse: action out of range");

    ++step_count_;
    events_ = {};

    std::vector<bool> was_delivery_pose(n);
    for (int i = 0; i < n; ++i) was_delivery_pose[i] = delivery_pose(i);

    std::vector<GridPos> desired(robot_pos_);
    for (int i = 0; i < n; ++i) {
        const int a = joint_action[i];
        if (a >= kStay) continue;
        GridPos q{robot_pos_[i].x + kDx[a], robot_pos_[i].y + kDy[a]};
        if (q.x < 0 || q.x >= width_ || q.y < 0 || q.y >= height_) continue;
        // Loaded robots cannot slide under stored shelves.
        if (carrying_[i] >= 0 && stored_shelf_at(q) >= 0) continue;
        desired[i] = q;
    }

    // Same index-symmetric conflict rule as the foraging grid: per sweep,
    // every mover in a conflict cancels against the snapshot, then repeat.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<bool> cancel(n, false);
        for (int i = 0; i < n; ++i) {
            if (desired[i] == robot_pos_[i]) continue;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const bool same_target = desired[j] == desired[i];
                const bool swap = desired[i] == robot_pos_[j] && desired[j] == robot_pos_[i];
                const bool blocked = robot_pos_[j] == desired[i] && desired[j] == robot_pos_[j];
                if (same_target || swap || blocked) {
                    cancel[i] = true;
                    break;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (cancel[i]) {
                desired[i] = robot_pos_[i];
                changed = true;
            }
        }
    }
    robot_pos_ = desired;

    for (int i = 0; i < n; ++i) {
        if (joint_action[i] != kToggleLoad) continue;
        if (carrying_[i] >= 0) {
            // Return only onto an empty rack cell.
            if (is_rack(robot_pos_[i]) && stored_shelf_at(robot_pos_[i]) < 0) {
                shelf_at_[cell_index(robot_pos_[i])] = carrying_[i];
                carrying_[i] = -1;
            }
        } else {
            const int s = stored_shelf_at(robot_pos_[i]);
            if (s >= 0) {
                shelf_at_[cell_index(robot_pos_[i])] = -1;
                carrying_[i] = s;
                if (requested(s)) events_.requested_pickups.push_back(i);
            }
        }
    }

    StepResult result;
    for (int i = 0; i < n; ++i) {
        if (!was_delivery_pose[i] && delivery_pose(i)) {
            const int s = carrying_[i];
            requests_.erase(std::find(requests_.begin(), requests_.end(), s));
            result.reward += 1.0;
            events_.deliveries.push_back(i);
            // Replacement request: any shelf neither queued nor in transit.
            std::vector<int> candidates;
            for (int shelf = 0; shelf < num_shelves_; ++shelf) {
                if (requested(shelf)) continue;
                if (std::find(carrying_.begin(), carrying_.end(), shelf) != carrying_.end())
                    continue;
                candidates.push_back(shelf);
            }
            if (!candidates.empty())
                requests_.push_back(candidates[request_rng_.below_int(
                    static_cast<int>(candidates.size()))]);
        }
    }

    if (step_count_ >= kHorizon) {
        result.done = true;
        result.termination = TerminationKind::timeout;
        live_ = false;
    }
    result.joint_obs = observe();
    return result;
}

std::vector<Obs> Warehouse::observe() const {
    std::vector<Obs> joint;
    joint.reserve(config_.num_robots);
    for (int i = 0; i < config_.num_robots; ++i) {
        Obs o;
        o.reserve(spec_.obs_dim_per_agent);
        const GridPos me = robot_pos_[i];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const GridPos c{me.x + dx, me.y + dy};
                const bool wall = c.x < 0 || c.x >= width_ || c.y < 0 || c.y >= height_;
                const int shelf = wall ? -1 : stored_shelf_at(c);
                bool robot_here = false;
                if (!wall)
                    for (int j = 0; j < config_.num_robots; ++j)
                        if (robot_pos_[j] == c) robot_here = true;
                o.push_back(wall ? 1.0 : 0.0);
                o.push_back(shelf >= 0 ? 1.0 : 0.0);
                o.push_back(shelf >= 0 && requested(shelf) ? 1.0 : 0.0);
                o.push_back(robot_here ? 1.0 : 0.0);
            }
        }
        o.push_back(carrying_[i] >= 0 ? 1.0 : 0.0);
        o.push_back(static_cast<double>(me.x) / width_);
        o.push_back(static_cast<double>(me.y) / height_);
        joint.push_back(std::move(o));
    }
    return joint;
}

std::string Warehouse::action_name(int action) const {
    switch (action) {
        case kNorth: return "N";
        case kSouth: return "S";
        case kEast: return "E";
        case kWest: return "W";
        case kStay: return "stay";
        case kToggleLoad: return "toggle_load";
    }
    throw std::invalid_argument("Warehouse: action out of range");
}

std::string Warehouse::render_text() const {
    std::ostringstream os;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const GridPos c{x, y};
            char ch = '.';
            if (is_rack(c)) ch = stored_shelf_at(c) >= 0 ? '#' : '_';
            if (stored_shelf_at(c) >= 0 && requested(stored_shelf_at(c))) ch = '!';
            if (is_workstation(c)) ch = 'W';
            for (int i = 0; i < config_.num_robots; ++i)
                if (robot_pos_[i] == c) ch = carrying_[i] >= 0 ? static_cast<char>('A' + i)
                                                               : static_cast<char>('a' + i);
            os << ch;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace marl
