#include <doctest.h>

#include "marl/rng.hpp"
#include "marl/spaceworld.hpp"
#include "spaceworld_oracle.hpp"

using namespace marl;

TEST_CASE("closed-form bound: pickup and drop each cost one step") {
    Spaceworld::Placement p;
    p.agents = {GridPos{2, 2}, GridPos{7, 7}};
    p.mirrors = {GridPos{2, 2}, GridPos{7, 7}};  // agent standing on its mirror
    p.targets = {GridPos{2, 3}, GridPos{7, 6}};  // mirror adjacent to target
    CHECK(Spaceworld::formula_minimal_steps(p) == 3);  // pickup, move, drop
}

TEST_CASE("closed-form bound: symmetric placements give either agent's solo time") {
    Spaceworld::Placement p;
    p.agents = {GridPos{0, 0}, GridPos{9, 9}};
    p.mirrors = {GridPos{0, 2}, GridPos{9, 7}};
    p.targets = {GridPos{3, 2}, GridPos{6, 7}};
    const int solo = 2 + 1 + 3 + 1;
    CHECK(Spaceworld::formula_minimal_steps(p) == solo);
}

TEST_CASE("exact search agrees with the independent joint-plan oracle on 5x5") {
    Rng rng(2024);
    for (int instance = 0; instance < 60; ++instance) {
        const auto p = spaceworld_oracle::random_placement(5, rng);
        const int expected = spaceworld_oracle::min_completion_steps(5, p);
        const int actual = Spaceworld::minimal_steps(5, p);
        CAPTURE(instance);
        REQUIRE(actual == expected);
    }
}

TEST_CASE("exact search agrees with the oracle on 6x6") {
    Rng rng(81);
    for (int instance = 0; instance < 12; ++instance) {
        const auto p = spaceworld_oracle::random_placement(6, rng);
        REQUIRE(Spaceworld::minimal_steps(6, p) ==
                spaceworld_oracle::min_completion_steps(6, p));
    }
}

TEST_CASE("large grids fall back to the color-matched bound") {
    Rng rng(7);
    for (int instance = 0; instance < 20; ++instance) {
        const auto p = spaceworld_oracle::random_placement(10, rng);
        CHECK(Spaceworld::minimal_steps(10, p) == Spaceworld::formula_minimal_steps(p));
    }
}

TEST_CASE("joint search exploits cross assignments the bound cannot see") {
    // Agent 0 starts on top of agent 1's mirror; swapping tasks is faster.
    Spaceworld::Placement p;
    p.agents = {GridPos{0, 0}, GridPos{2, 2}};
    p.mirrors = {GridPos{4, 4}, GridPos{0, 1}};
    p.targets = {GridPos{3, 3}, GridPos{0, 2}};
    const int matched = Spaceworld::formula_minimal_steps(p);
    const int exact = Spaceworld::minimal_steps(5, p);
    CHECK(exact < matched);
    CHECK(exact == spaceworld_oracle::min_completion_steps(5, p));
}

TEST_CASE("search minimum is achievable in the environment") {
    // Drive the env along an optimal plan found by hand for a fixed placement
    // and check the search value matches the achieved completion step.
    Spaceworld env(5);
    Spaceworld::Placement p;
    p.agents = {GridPos{0, 0}, GridPos{4, 4}};
    p.mirrors = {GridPos{1, 0}, GridPos{3, 4}};
    p.targets = {GridPos{2, 0}, GridPos{2, 4}};
    env.reset_to(p);
    REQUIRE(env.minimal_steps() == 4);  // E, pickup, E, drop on both sides

    using A = Spaceworld;
    StepResult last;
    for (const auto& joint : std::vector<std::vector<int>>{{A::kEast, A::kWest},
                                                           {A::kInteract, A::kInteract},
                                                           {A::kEast, A::kWest},
                                                           {A::kInteract, A::kInteract}})
        last = env.step(joint);
    CHECK(last.done);
    CHECK(last.termination == TerminationKind::complete);
    CHECK(last.reward == doctest::Approx(10.0));
}
