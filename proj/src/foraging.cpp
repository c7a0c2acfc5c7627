#include "marl/foraging.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace marl {

namespace {

constexpr int kDx[4] = {0, 0, 1, -1};  // N, S, E, W
constexpr int kDy[4] = {-1, 1, 0, 0};

int parse_positive_int(const std::string& token, const std::string& what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value <= 0)
        throw std::invalid_argument("scenario parse error: bad " + what + " token '" + token + "'");
    return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::string ForagingConfig::name() const {
    std::ostringstream os;
    os << grid_size << "x" << grid_size << "-" << num_players << "p-" << num_food << "f";
    if (sight_radius) os << "-" << *sight_radius << "s";
    if (cooperative) os << "-c";
    return os.str();
}

ForagingConfig lbf_parse_scenario(const std::string& name) {
    const auto parts = split(name, '-');
    if (parts.size() < 3)
        throw std::invalid_argument("scenario parse error: expected at least GRIDxGRID-Np-Mf in '" +
                                    name + "'");

    ForagingConfig config;

    const auto grid = split(parts[0], 'x');
    if (grid.size() != 2)
        throw std::invalid_argument("scenario parse error: bad grid token '" + parts[0] + "'");
    const int w = parse_positive_int(grid[0], "grid size");
    const int h = parse_positive_int(grid[1], "grid size");
    if (w != h)
        throw std::invalid_argument("scenario parse error: non-square grid token '" + parts[0] +
                                    "'");
    config.grid_size = w;

    if (parts[1].empty() || parts[1].back() != 'p')
        throw std::invalid_argument("scenario parse error: bad player token '" + parts[1] + "'");
    config.num_players = parse_positive_int(parts[1].substr(0, parts[1].size() - 1), "player count");

    if (parts[2].empty() || parts[2].back() != 'f')
        throw std::invalid_argument("scenario parse error: bad food token '" + parts[2] + "'");
    config.num_food = parse_positive_int(parts[2].substr(0, parts[2].size() - 1), "food count");

    for (std::size_t i = 3; i < parts.size(); ++i) {
        const auto& token = parts[i];
        if (token == "c" || token == "coop") {
            config.cooperative = true;
        } else if (!token.empty() && token.back() == 's') {
            config.sight_radius = parse_positive_int(token.substr(0, token.size() - 1), "sight");
        } else {
            throw std::invalid_argument("scenario parse error: unknown token '" + token + "'");
        }
    }
    return config;
}

Foraging::Foraging(ForagingConfig config) : config_(config) {
    if (config_.grid_size < 3) throw std::invalid_argument("Foraging: grid too small");
    if (config_.cooperative && config_.num_players < 2)
        throw std::invalid_argument("Foraging: cooperative mode needs at least 2 players");
    const int interior = (config_.grid_size - 2) * (config_.grid_size - 2);
    if (config_.num_food > interior / 2)
        throw std::invalid_argument("Foraging: too many foods for grid");
    step_cap_ = 50 * config_.grid_size / 8;
    spec_.num_agents = config_.num_players;
    spec_.obs_dim_per_agent = 3 * (config_.num_food + config_.num_players);
    spec_.action_count_per_agent = 6;
    spec_.max_episode_steps = step_cap_;
    spec_.env_kind = EnvKind::foraging;
    spec_.validate();
}

std::vector<Obs> Foraging::reset(std::uint64_t seed) {
    Rng rng(seed);
    const int g = config_.grid_size;

    agent_levels_.assign(config_.num_players, 1);
    for (auto& level : agent_levels_) level = 1 + rng.below_int(3);

    food_levels_.assign(config_.num_food, 1);
    if (config_.cooperative) {
        // Force multi-agent loads: every food outlevels every single agent but
        // stays within reach of the two strongest together.
        std::vector<int> sorted = agent_levels_;
        std::sort(sorted.rbegin(), sorted.rend());
        const int lo = sorted[0] + 1;
        const int hi = std::max(lo, sorted[0] + sorted[1]);
        for (auto& level : food_levels_) level = lo + rng.below_int(hi - lo + 1);
    } else {
        const int team = std::accumulate(agent_levels_.begin(), agent_levels_.end(), 0);
        for (auto& level : food_levels_) level = std::min(1 + rng.below_int(3), team);
    }
    total_food_level_ = std::accumulate(food_levels_.begin(), food_levels_.end(), 0.0);

    // Foods sit inside a one-cell border margin, pairwise separated.
    food_pos_.clear();
    while (static_cast<int>(food_pos_.size()) < config_.num_food) {
        GridPos c{1 + rng.below_int(g - 2), 1 + rng.below_int(g - 2)};
        bool ok = true;
        for (const auto& f : food_pos_)
            if (std::max(std::abs(f.x - c.x), std::abs(f.y - c.y)) < 2) ok = false;
        if (ok) food_pos_.push_back(c);
    }
    food_alive_.assign(config_.num_food, true);

    agent_pos_.clear();
    while (static_cast<int>(agent_pos_.size()) < config_.num_players) {
        GridPos c{rng.below_int(g), rng.below_int(g)};
        bool ok = true;
        for (const auto& f : food_pos_)
            if (f == c) ok = false;
        for (const auto& a : agent_pos_)
            if (a == c) ok = false;
        if (ok) agent_pos_.push_back(c);
    }

    last_harvests_.clear();
    step_count_ = 0;
    live_ = true;
    return observe();
}

std::vector<Obs> Foraging::reset_to(std::vector<GridPos> agents, std::vector<int> agent_levels,
                                    std::vector<GridPos> foods, std::vector<int> food_levels) {
    if (static_cast<int>(agents.size()) != config_.num_players ||
        agents.size() != agent_levels.size())
        throw std::invalid_argument("Foraging: agent placement count mismatch");
    if (static_cast<int>(foods.size()) != config_.num_food || foods.size() != food_levels.size())
        throw std::invalid_argument("Foraging: food placement count mismatch");
    agent_pos_ = std::move(agents);
    agent_levels_ = std::move(agent_levels);
    food_pos_ = std::move(foods);
    food_levels_ = std::move(food_levels);
    food_alive_.assign(config_.num_food, true);
    total_food_level_ = std::accumulate(food_levels_.begin(), food_levels_.end(), 0.0);
    last_harvests_.clear();
    step_count_ = 0;
    live_ = true;
    return observe();
}

bool Foraging::in_sight(int viewer, GridPos cell) const {
    if (!config_.sight_radius) return true;
    const GridPos me = agent_pos_[viewer];
    return std::max(std::abs(me.x - cell.x), std::abs(me.y - cell.y)) <= *config_.sight_radius;
}

std::vector<Obs> Foraging::observe() const {
    const double scale = 1.0 / config_.grid_size;
    std::vector<Obs> joint;
    joint.reserve(config_.num_players);
    for (int i = 0; i < config_.num_players; ++i) {
        Obs o;
        o.reserve(spec_.obs_dim_per_agent);
        const GridPos me = agent_pos_[i];
        for (int f = 0; f < config_.num_food; ++f) {
            if (food_alive_[f] && in_sight(i, food_pos_[f])) {
                o.push_back((food_pos_[f].x - me.x) * scale);
                o.push_back((food_pos_[f].y - me.y) * scale);
                o.push_back(static_cast<double>(food_levels_[f]));
            } else {
                o.insert(o.end(), {-1.0, -1.0, -1.0});
            }
        }
        for (int j = 0; j < config_.num_players; ++j) {
            if (in_sight(i, agent_pos_[j])) {
                o.push_back((agent_pos_[j].x - me.x) * scale);
                o.push_back((agent_pos_[j].y - me.y) * scale);
                o.push_back(static_cast<double>(agent_levels_[j]));
            } else {
                o.insert(o.end(), {-1.0, -1.0, -1.0});
            }
        }
        joint.push_back(std::move(o));
    }
    return joint;
}

StepResult Foraging::step(const std::vector<int>& joint_action) {
    if (!live_) throw std::logic_error("Foraging: step on finished episode");
    const int n = config_.num_players;
    if (static_cast<int>(joint_action.size()) != n)
        throw std::invalid_argument("Foraging: wrong action count");
    for (int a : joint_action)
        if (a < 0 || a > 5) throw std::invalid_argument("Foraging: action out of range");

    ++step_count_;
    const int g = config_.grid_size;

    std::vector<GridPos> desired(agent_pos_);
    for (int i = 0; i < n; ++i) {
        const int a = joint_action[i];
        if (a >= kStay) continue;
        GridPos q{agent_pos_[i].x + kDx[a], agent_pos_[i].y + kDy[a]};
        if (q.x < 0 || q.x >= g || q.y < 0 || q.y >= g) continue;
        bool blocked = false;
        for (int f = 0; f < config_.num_food; ++f)
            if (food_alive_[f] && food_pos_[f] == q) blocked = true;
        if (!blocked) desired[i] = q;
    }

    // Conflicting movers all stay put. Cancellations come from a snapshot per
    // sweep so the outcome never depends on agent index; sweeps repeat until
    // cascaded blocking settles.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<bool> cancel(n, false);
        for (int i = 0; i < n; ++i) {
            if (desired[i] == agent_pos_[i]) continue;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const bool same_target = desired[j] == desired[i];
                const bool swap = desired[i] == agent_pos_[j] && desired[j] == agent_pos_[i];
                const bool blocked = agent_pos_[j] == desired[i] && desired[j] == agent_pos_[j];
                if (same_target || swap || blocked) {
                    cancel[i] = true;
                    break;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (cancel[i]) {
                desired[i] = agent_pos_[i];
                changed = true;
            }
        }
    }
    agent_pos_ = desired;

    // Per-food harvest check over adjacent loading agents.
    last_harvests_.clear();
    StepResult result;
    for (int f = 0; f < config_.num_food; ++f) {
        if (!food_alive_[f]) continue;
        Harvest h;
        h.food_index = f;
        int level_sum = 0;
        for (int i = 0; i < n; ++i) {
            if (joint_action[i] != kLoad) continue;
            if (manhattan(agent_pos_[i], food_pos_[f]) != 1) continue;
            h.loaders.push_back(i);
            h.loader_levels.push_back(agent_levels_[i]);
            level_sum += agent_levels_[i];
        }
        if (!h.loaders.empty() && level_sum >= food_levels_[f]) {
            food_alive_[f] = false;
            h.reward = food_levels_[f] / total_food_level_;
            result.reward += h.reward;
            last_harvests_.push_back(std::move(h));
        }
    }

    const bool cleared = std::none_of(food_alive_.begin(), food_alive_.end(),
                                      [](bool alive) { return alive; });
    if (cleared) {
        result.done = true;
        result.termination = TerminationKind::complete;
        live_ = false;
    } else if (step_count_ >= step_cap_) {
        result.done = true;
        result.termination = TerminationKind::timeout;
        live_ = false;
    }
    result.joint_obs = observe();
    return result;
}

std::string Foraging::action_name(int action) const {
    switch (action) {
        case kNorth: return "N";
        case kSouth: return "S";
        case kEast: return "E";
        case kWest: return "W";
        case kStay: return "stay";
        case kLoad: return "load";
    }
    throw std::invalid_argument("Foraging: action out of range");
}

std::string Foraging::render_text() const {
    const int g = config_.grid_size;
    std::ostringstream os;
    for (int y = 0; y < g; ++y) {
        for (int x = 0; x < g; ++x) {
            char ch = '.';
            for (int f = 0; f < config_.num_food; ++f)
                if (food_alive_[f] && food_pos_[f] == GridPos{x, y})
                    ch = static_cast<char>('0' + food_levels_[f]);
            for (int i = 0; i < config_.num_players; ++i)
                if (agent_pos_[i] == GridPos{x, y}) ch = static_cast<char>('a' + i);
            os << ch;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace marl
