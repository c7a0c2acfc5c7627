#include "marl/matrix_game.hpp"

namespace marl {

MatrixGame::MatrixGame(Payoff payoff) : payoff_(payoff) {
    spec_.num_agents = 2;
    spec_.obs_dim_per_agent = 1;
    spec_.action_count_per_agent = 3;
    spec_.max_episode_steps = kEpisodeLength;
    spec_.env_kind = EnvKind::matrix;
    spec_.validate();
}

std::vector<Obs> MatrixGame::constant_obs() const {
    return {Obs{1.0}, Obs{1.0}};
}

std::vector<Obs> MatrixGame::reset(std::uint64_t /*seed*/) {
    step_count_ = 0;
    live_ = true;
    return constant_obs();
}

StepResult MatrixGame::step(const std::vector<int>& joint_action) {
    if (!live_) throw std::logic_error("MatrixGame: step on finished episode");
    if (joint_action.size() != 2) throw std::invalid_argument("MatrixGame: need 2 actions");
    for (int a : joint_action)
        if (a < 0 || a > 2) throw std::invalid_argument("MatrixGame: action out of range");

    StepResult result;
    result.reward = payoff_[joint_action[0]][joint_action[1]];
    ++step_count_;
    result.done = step_count_ >= kEpisodeLength;
    result.termination = result.done ? TerminationKind::timeout : TerminationKind::none;
    result.joint_obs = constant_obs();
    if (result.done) live_ = false;
    return result;
}

std::string MatrixGame::action_name(int action) const {
    switch (action) {
        case 0: return "a0";
        case 1: return "a1";
        case 2: return "a2";
    }
    throw std::invalid_argument("MatrixGame: action out of range");
}

std::pair<int, int> MatrixGame::optimal_joint_action() const {
    std::pair<int, int> best{0, 0};
    double best_value = payoff_[0][0];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (payoff_[a][b] > best_value) {
                best_value = payoff_[a][b];
                best = {a, b};
            }
    return best;
}

}  // namespace marl
