// Test-only reference for Spaceworld minimal completion steps: a breadth-first
// search over joint plans written directly from the environment rules, kept
// deliberately separate from the library's search implementation.
#ifndef MARL_TESTS_SPACEWORLD_ORACLE_HPP
#define MARL_TESTS_SPACEWORLD_ORACLE_HPP

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "marl/spaceworld.hpp"

namespace spaceworld_oracle {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

// Mirror location: grid cell, or "in the hands of agent h".
struct MirrorState {
    bool carried = false;
    int holder = 0;
    Cell at;
};

struct JointState {
    Cell agents[2];
    MirrorState mirrors[2];
};

inline std::uint64_t pack(const JointState& s, int grid) {
    auto cell_code = [grid](Cell c) { return static_cast<std::uint64_t>(c.y * grid + c.x); };
    auto mirror_code = [&](const MirrorState& m) {
        return m.carried ? static_cast<std::uint64_t>(grid * grid + m.holder) : cell_code(m.at);
    };
    const std::uint64_t base = static_cast<std::uint64_t>(grid * grid + 2);
    std::uint64_t code = cell_code(s.agents[0]);
    code = code * base + cell_code(s.agents[1]);
    code = code * base + mirror_code(s.mirrors[0]);
    code = code * base + mirror_code(s.mirrors[1]);
    return code;
}

inline Cell walk(Cell c, int action, int grid) {
    Cell out = c;
    switch (action) {
        case 0: out.y -= 1; break;  // N
        case 1: out.y += 1; break;  // S
        case 2: out.x += 1; break;  // E
        case 3: out.x -= 1; break;  // W
        default: break;             // stay / interact
    }
    if (out.x < 0 || out.x >= grid || out.y < 0 || out.y >= grid) return c;
    return out;
}

inline int min_completion_steps(int grid, const marl::Spaceworld::Placement& p) {
    JointState start;
    start.agents[0] = {p.agents[0].x, p.agents[0].y};
    start.agents[1] = {p.agents[1].x, p.agents[1].y};
    start.mirrors[0] = {false, 0, {p.mirrors[0].x, p.mirrors[0].y}};
    start.mirrors[1] = {false, 0, {p.mirrors[1].x, p.mirrors[1].y}};
    const Cell goals[2] = {{p.targets[0].x, p.targets[0].y}, {p.targets[1].x, p.targets[1].y}};

    auto solved = [&](const JointState& s) {
        return !s.mirrors[0].carried && s.mirrors[0].at == goals[0] &&
               !s.mirrors[1].carried && s.mirrors[1].at == goals[1];
    };
    if (solved(start)) return 0;

    std::unordered_set<std::uint64_t> seen;
    std::queue<std::pair<JointState, int>> frontier;
    seen.insert(pack(start, grid));
    frontier.push({start, 0});

    while (!frontier.empty()) {
        const auto [state, depth] = frontier.front();
        frontier.pop();
        for (int act0 = 0; act0 < 6; ++act0) {
            for (int act1 = 0; act1 < 6; ++act1) {
                const Cell next0 = walk(state.agents[0], act0, grid);
                const Cell next1 = walk(state.agents[1], act1, grid);
                if (next0 == next1) continue;  // both destroyed
                if (next0 == state.agents[1] && next1 == state.agents[0]) continue;

                JointState next = state;
                next.agents[0] = next0;
                next.agents[1] = next1;
                const int acts[2] = {act0, act1};
                for (int agent = 0; agent < 2; ++agent) {
                    if (acts[agent] != marl::Spaceworld::kInteract) continue;
                    int held = -1;
                    for (int m = 0; m < 2; ++m)
                        if (next.mirrors[m].carried && next.mirrors[m].holder == agent)
                            held = m;
                    if (held >= 0) {
                        next.mirrors[held] = {false, 0, next.agents[agent]};
                    } else {
                        for (int m : {agent, 1 - agent}) {
                            if (!next.mirrors[m].carried &&
                                next.mirrors[m].at == next.agents[agent]) {
                                next.mirrors[m] = {true, agent, {}};
                                break;
                            }
                        }
                    }
                }
                if (solved(next)) return depth + 1;
                const auto code = pack(next, grid);
                if (seen.insert(code).second) frontier.push({next, depth + 1});
            }
        }
    }
    throw std::logic_error("oracle: no completion found");
}

inline marl::Spaceworld::Placement random_placement(int grid, marl::Rng& rng) {
    int cells[6];
    for (int i = 0; i < 6; ++i) {
        bool fresh = false;
        while (!fresh) {
            cells[i] = rng.below_int(grid * grid);
            fresh = true;
            for (int j = 0; j < i; ++j)
                if (cells[j] == cells[i]) fresh = false;
        }
    }
    auto at = [&](int i) { return marl::GridPos{cells[i] % grid, cells[i] / grid}; };
    marl::Spaceworld::Placement p;
    p.agents = {at(0), at(1)};
    p.mirrors = {at(2), at(3)};
    p.targets = {at(4), at(5)};
    return p;
}

}  // namespace spaceworld_oracle

#endif
