#include <doctest.h>

#include <cmath>
#include <sstream>

#include "marl/policy.hpp"
#include "marl/rng.hpp"

using namespace marl;

namespace {

PolicyConfig small_config(int obs_dim, int d_task, int actions, std::vector<int> hidden) {
    PolicyConfig c;
    c.obs_dim = obs_dim;
    c.d_task = d_task;
    c.action_count = actions;
    c.hidden = std::move(hidden);
    return c;
}

std::vector<Transition> random_batch(const PolicyConfig& c, int size, Rng& rng) {
    std::vector<Transition> batch;
    for (int s = 0; s < size; ++s) {
        Transition t;
        for (int i = 0; i < c.obs_dim; ++i) t.obs.push_back(rng.uniform(-1.0, 1.0));
        for (int i = 0; i < c.d_task; ++i) t.task.push_back(rng.uniform(-1.0, 1.0));
        t.action = rng.below_int(c.action_count);
        t.credit = rng.uniform(-2.0, 2.0);
        for (int i = 0; i < c.obs_dim; ++i) t.next_obs.push_back(rng.uniform(-1.0, 1.0));
        for (int i = 0; i < c.d_task; ++i) t.next_task.push_back(rng.uniform(-1.0, 1.0));
        t.done = rng.uniform01() < 0.3;
        batch.push_back(std::move(t));
    }
    return batch;
}

// Central finite differences against the frozen-target TD loss.
double max_gradient_mismatch(QNetwork& net, const std::vector<Transition>& batch) {
    const auto targets = net.compute_targets(batch);
    const auto loss_and_grad = net.td_loss_grad(batch, targets);
    const auto& grad = loss_and_grad.second;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < net.params().size(); ++p) {
        const double saved = net.params()[p];
        net.params()[p] = saved + h;
        const double up = net.td_loss(batch, targets);
        net.params()[p] = saved - h;
        const double down = net.td_loss(batch, targets);
        net.params()[p] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({1e-6, std::abs(grad[p]), std::abs(numeric)});
        worst = std::max(worst, std::abs(grad[p] - numeric) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("q_forward basics") {
    QNetwork net(small_config(2, 2, 3, {4}), 11);

    SUBCASE("zero weights produce zero q-values") {
        std::fill(net.params().begin(), net.params().end(), 0.0);
        const auto q = net.q_forward({0.4, -0.2}, {1.0, 2.0});
        CHECK(q == std::vector<double>{0.0, 0.0, 0.0});
    }
    SUBCASE("no dropout means deterministic outputs") {
        const auto a = net.q_forward({0.4, -0.2}, {1.0, 2.0});
        const auto b = net.q_forward({0.4, -0.2}, {1.0, 2.0});
        CHECK(a == b);
    }
    SUBCASE("an all-zero task vector matches the absent-task sentinel") {
        const auto padded = net.q_forward({0.4, -0.2}, {0.0, 0.0});
        const auto absent = net.q_forward({0.4, -0.2}, {});
        CHECK(padded == absent);
    }
    SUBCASE("dropout touches only the task slots") {
        Rng rng(3);
        const auto dropped = net.q_forward({0.4, -0.2}, {0.0, 0.0}, 0.9, &rng);
        CHECK(dropped == net.q_forward({0.4, -0.2}, {0.0, 0.0}));
    }
    SUBCASE("dimension mismatches are rejected") {
        CHECK_THROWS_AS(net.q_forward({0.4}, {0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(net.q_forward({0.4, 0.1}, {0.0}), std::invalid_argument);
    }
}

TEST_CASE("epsilon-greedy action selection") {
    Rng rng(5);
    CHECK(act_epsilon_greedy({1.0, 5.0, 2.0}, 0.0, rng) == 1);
    CHECK(act_epsilon_greedy({7.0, 7.0}, 0.0, rng) == 0);  // exact tie -> lowest index
    CHECK_THROWS_AS(act_epsilon_greedy({}, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(act_epsilon_greedy({1.0}, 1.5, rng), std::invalid_argument);

    SUBCASE("epsilon=1 is uniform within 3 sigma over 1e5 draws") {
        const int draws = 100000;
        const int actions = 4;
        std::vector<int> counts(actions, 0);
        for (int i = 0; i < draws; ++i)
            ++counts[act_epsilon_greedy({9.0, 0.0, 0.0, 0.0}, 1.0, rng)];
        const double expected = draws / static_cast<double>(actions);
        const double sigma = std::sqrt(draws * (1.0 / actions) * (1.0 - 1.0 / actions));
        for (int a = 0; a < actions; ++a)
            CHECK(std::abs(counts[a] - expected) <= 3.0 * sigma);
    }
}

TEST_CASE("double DQN target") {
    auto config = small_config(1, 0, 3, {});
    QNetwork net(config, 1);
    // Linear head: params are W (3x1) then b (3). Stage the target copy first.
    net.params() = {0.0, 0.0, 4.0, 0.0, 0.0, 0.0};
    net.sync_target();
    net.params() = {0.0, 0.0, 1.0, 0.0, 0.0, 0.0};  // online argmax at action 2

    SUBCASE("terminal transitions return the raw credit") {
        CHECK(double_dqn_target(3.0, {1.0}, {}, true, 0.9, net) == 3.0);
    }
    SUBCASE("gamma zero is myopic") {
        CHECK(double_dqn_target(1.5, {1.0}, {}, false, 0.0, net) == 1.5);
    }
    SUBCASE("bootstraps the target net at the online argmax") {
        // online argmax = 2, Q_target(next, 2) = 4, credit 1, gamma 0.5 -> 3.
        CHECK(double_dqn_target(1.0, {1.0}, {}, false, 0.5, net) == doctest::Approx(3.0));
    }
    SUBCASE("invalid gamma is rejected") {
        CHECK_THROWS_AS(double_dqn_target(0.0, {1.0}, {}, false, 1.0, net),
                        std::invalid_argument);
    }
}

TEST_CASE("analytic TD gradients match central finite differences") {
    Rng rng(99);

    SUBCASE("4-parameter linear net") {
        auto config = small_config(3, 0, 1, {});
        QNetwork net(config, 21);
        REQUIRE(net.params().size() == 4);
        const auto batch = random_batch(config, 8, rng);
        CHECK(max_gradient_mismatch(net, batch) <= 1e-4);
    }
    SUBCASE("random small architectures") {
        for (int trial = 0; trial < 25; ++trial) {
            const int obs = 1 + rng.below_int(4);
            const int d_task = rng.below_int(3);
            const int actions = 2 + rng.below_int(3);
            std::vector<int> hidden;
            const int layers = rng.below_int(3);
            for (int l = 0; l < layers; ++l) hidden.push_back(2 + rng.below_int(5));
            auto config = small_config(obs, d_task, actions, hidden);
            QNetwork net(config, split_mix64(trial));
            const auto batch = random_batch(config, 1 + rng.below_int(8), rng);
            CAPTURE(trial);
            REQUIRE(max_gradient_mismatch(net, batch) <= 1e-4);
        }
    }
}

TEST_CASE("apply_update behavior") {
    auto config = small_config(2, 0, 2, {3});
    config.sync_interval = 2;

    SUBCASE("a fixed point has zero loss and unchanged parameters") {
        QNetwork net(config, 3);
        std::fill(net.params().begin(), net.params().end(), 0.0);
        net.sync_target();
        Transition t;
        t.obs = {0.5, -0.5};
        t.action = 1;
        t.credit = 0.0;  // equals Q(obs, 1) under zero weights
        t.next_obs = {0.0, 0.0};
        t.done = true;
        const auto before = net.params();
        const double loss = net.apply_update({t}, 0.05);
        CHECK(loss == 0.0);
        CHECK(net.params() == before);
    }
    SUBCASE("zero learning rate leaves parameters unchanged") {
        QNetwork net(config, 4);
        Rng rng(8);
        const auto before = net.params();
        net.apply_update(random_batch(config, 4, rng), 0.0);
        CHECK(net.params() == before);
    }
    SUBCASE("updates reduce the loss on a fixed batch") {
        QNetwork net(config, 5);
        Rng rng(9);
        const auto batch = random_batch(config, 16, rng);
        const double first = net.apply_update(batch, 1e-2);
        double last = first;
        for (int i = 0; i < 200; ++i) last = net.apply_update(batch, 1e-2);
        CHECK(last < first);
    }
    SUBCASE("target net syncs every sync_interval updates") {
        QNetwork net(config, 6);
        Rng rng(10);
        const auto batch = random_batch(config, 4, rng);
        net.apply_update(batch, 1e-2);
        CHECK_FALSE(net.params() == net.target_params());
        net.apply_update(batch, 1e-2);  // update 2 hits the sync interval
        CHECK(net.params() == net.target_params());
    }
    SUBCASE("empty minibatch is rejected") {
        QNetwork net(config, 7);
        CHECK_THROWS_AS(net.apply_update({}, 0.1), std::invalid_argument);
    }
}

TEST_CASE("task input schedule") {
    TaskInputSchedule schedule;
    CHECK(schedule.blank_fraction(0.0) == 0.0);
    CHECK(schedule.dropout_rate(0.0) == 0.0);
    CHECK(schedule.blank_fraction(1.0) == 1.0);
    CHECK(schedule.dropout_rate(1.0) == 0.5);
    CHECK(schedule.blank_fraction(0.5) == 0.5);
    CHECK(schedule.dropout_rate(0.5) == 0.25);
    CHECK_THROWS_AS(schedule.blank_fraction(1.5), std::invalid_argument);

    double prev_blank = 0.0;
    double prev_drop = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        CHECK(schedule.blank_fraction(p) >= prev_blank);
        CHECK(schedule.dropout_rate(p) >= prev_drop);
        prev_blank = schedule.blank_fraction(p);
        prev_drop = schedule.dropout_rate(p);
    }
}

TEST_CASE("checkpoints round-trip bitwise") {
    auto config = small_config(3, 2, 4, {8, 8});
    QNetwork net(config, 42);
    Rng rng(12);
    for (int i = 0; i < 5; ++i) net.apply_update(random_batch(config, 8, rng), 1e-3);

    std::stringstream first;
    net.save(first);
    auto loaded = QNetwork::load(first);
    CHECK(loaded.params() == net.params());
    CHECK(loaded.target_params() == net.target_params());
    CHECK(loaded.update_count() == net.update_count());
    CHECK(loaded.config().hidden == config.hidden);

    std::stringstream second;
    loaded.save(second);
    CHECK(first.str() == second.str());

    // A resumed net continues identically to the original.
    const auto batch = random_batch(config, 8, rng);
    net.apply_update(batch, 1e-3);
    loaded.apply_update(batch, 1e-3);
    CHECK(loaded.params() == net.params());
}

TEST_CASE("replay buffer ring and sampling") {
    ReplayBuffer buffer(4);
    for (int i = 0; i < 6; ++i) {
        Transition t;
        t.obs = {static_cast<double>(i)};
        t.credit = i;
        buffer.push(t);
    }
    CHECK(buffer.size() == 4);  // oldest two evicted

    Rng rng(77);
    const auto sample = buffer.sample(100, rng);
    double lo = 1e9;
    double hi = -1e9;
    for (const auto& t : sample) {
        lo = std::min(lo, t.credit);
        hi = std::max(hi, t.credit);
    }
    CHECK(lo >= 2.0);  // entries 0 and 1 are gone
    CHECK(hi <= 5.0);

    ReplayBuffer empty(4);
    CHECK_THROWS_AS(empty.sample(1, rng), std::logic_error);
}
