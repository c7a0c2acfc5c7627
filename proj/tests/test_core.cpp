#include <doctest.h>

#include <limits>

#include "marl/core.hpp"
#include "marl/rng.hpp"

using namespace marl;

namespace {

Trajectory make_traj(const std::vector<double>& rewards, int num_agents = 2) {
    Trajectory traj(EnvKind::matrix, 7);
    for (std::size_t k = 0; k < rewards.size(); ++k) {
        TimeStep step;
        step.joint_obs.assign(num_agents, Obs{1.0});
        step.joint_action.assign(num_agents, 0);
        step.global_reward = rewards[k];
        step.done = k + 1 == rewards.size();
        traj.add_step(step);
    }
    return traj;
}

}  // namespace

TEST_CASE("episode_return sums rewards") {
    CHECK(episode_return(make_traj(std::vector<double>(25, 7.0))) == doctest::Approx(175.0));
    CHECK(episode_return(make_traj(std::vector<double>(10, 0.0))) == 0.0);
    CHECK(episode_return(make_traj({10.0})) == 10.0);
    CHECK_THROWS_AS(episode_return(Trajectory{}), std::invalid_argument);
}

TEST_CASE("per_agent_surrogate_return sums credit rows") {
    const auto traj = make_traj({1.0, 2.0});
    CreditMatrix credits;
    credits.values = {{1.0, 2.0}, {0.0, -1.0}};
    const auto result = per_agent_surrogate_return(traj, credits);
    REQUIRE(result.size() == 2);
    CHECK(result[0] == doctest::Approx(3.0));
    CHECK(result[1] == doctest::Approx(-1.0));

    CreditMatrix wrong;
    wrong.values = {{1.0}, {1.0}};
    CHECK_THROWS_AS(per_agent_surrogate_return(traj, wrong), std::invalid_argument);
}

TEST_CASE("shared-reward credits reproduce the episode return for every agent") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + rng.below_int(4);
        const int len = 1 + rng.below_int(30);
        std::vector<double> rewards;
        for (int k = 0; k < len; ++k) rewards.push_back(rng.uniform(-5.0, 5.0));
        const auto traj = make_traj(rewards, n);
        CreditMatrix credits;
        credits.values.assign(n, rewards);
        const auto surrogate = per_agent_surrogate_return(traj, credits);
        const double ret = episode_return(traj);
        for (double v : surrogate) CHECK(v == ret);  // exact: same summation order
    }
}

TEST_CASE("single-agent surrogate reduces to the credit-row sum") {
    const auto traj = make_traj({2.0, 3.0}, 1);
    CreditMatrix credits;
    credits.values = {{2.5, -0.5}};
    const auto result = per_agent_surrogate_return(traj, credits);
    REQUIRE(result.size() == 1);
    CHECK(result[0] == doctest::Approx(2.0));
}

TEST_CASE("trajectory rejects steps after done") {
    auto traj = make_traj({1.0});
    TimeStep extra;
    extra.joint_obs.assign(2, Obs{1.0});
    extra.joint_action.assign(2, 0);
    CHECK_THROWS_AS(traj.add_step(extra), std::logic_error);
}

TEST_CASE("validate_credit_matrix reports shape and finiteness violations") {
    EpisodeBatch batch;
    batch.trajectories = {make_traj({0.0, 0.0, 5.0})};

    CreditMatrix good;
    good.values = {{0.0, 0.0, 5.0}, {0.0, 0.0, 5.0}};
    CHECK(validate_credit_matrix({good}, batch).empty());

    CreditMatrix nan_entry = good;
    nan_entry.values[1][2] = std::numeric_limits<double>::quiet_NaN();
    const auto nan_violations = validate_credit_matrix({nan_entry}, batch);
    REQUIRE(nan_violations.size() == 1);
    CHECK(nan_violations[0].message.find("non-finite at (1,2)") != std::string::npos);

    CreditMatrix short_row = good;
    short_row.values[0].pop_back();
    const auto short_violations = validate_credit_matrix({short_row}, batch);
    REQUIRE(short_violations.size() == 1);
    CHECK(short_violations[0].message.find("length mismatch") != std::string::npos);

    CreditMatrix wrong_n = good;
    wrong_n.values.pop_back();
    CHECK_FALSE(validate_credit_matrix({wrong_n}, batch).empty());
}

TEST_CASE("episode_return is pure under repeated validation") {
    const auto traj = make_traj({1.0, -2.0, 4.0});
    const double first = episode_return(traj);
    EpisodeBatch batch;
    batch.trajectories = {traj};
    CreditMatrix m;
    m.values.assign(2, {1.0, -2.0, 4.0});
    (void)validate_credit_matrix({m}, batch);
    CHECK(episode_return(traj) == first);
    CHECK(episode_return(traj) == first);
}
