#ifndef MARL_MATRIX_GAME_HPP
#define MARL_MATRIX_GAME_HPP

#include <array>

#include "marl/env.hpp"

namespace marl {

// Repeated 3x3 common-payoff climbing game. Two agents, constant observations,
// exactly 25 steps per episode. The default payoff has a high-payoff action
// pair (0,0) guarded by a -30 miscoordination penalty and two tamer equilibria.
class MatrixGame : public Env {
public:
    static constexpr int kEpisodeLength = 25;

    using Payoff = std::array<std::array<double, 3>, 3>;

    static Payoff climbing_payoff() {
        return {{{11.0, -30.0, 0.0}, {-30.0, 7.0, 6.0}, {0.0, 0.0, 5.0}}};
    }

    explicit MatrixGame(Payoff payoff = climbing_payoff());

    const EnvSpec& spec() const override { return spec_; }
    std::string scenario_name() const override { return "climbing"; }
    std::vector<Obs> reset(std::uint64_t seed) override;
    StepResult step(const std::vector<int>& joint_action) override;
    std::string action_name(int action) const override;

    const Payoff& payoff() const { return payoff_; }

    // The joint action maximizing the common payoff (ties: lowest indices).
    std::pair<int, int> optimal_joint_action() const;

private:
    std::vector<Obs> constant_obs() const;

    Payoff payoff_;
    EnvSpec spec_;
    int step_count_ = 0;
    bool live_ = false;
};

}  // namespace marl

#endif
