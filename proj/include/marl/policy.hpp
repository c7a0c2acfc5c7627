#ifndef MARL_POLICY_HPP
#define MARL_POLICY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "marl/rng.hpp"

namespace marl {

struct PolicyConfig {
    int obs_dim = 0;
    int d_task = 4;           // zero-padded task-assignment input slots
    int action_count = 0;
    std::vector<int> hidden = {64, 64};
    double learning_rate = 5e-4;
    double gamma = 0.99;
    int replay_capacity = 50000;
    int minibatch = 64;
    int sync_interval = 200;  // target refresh, counted in updates
    bool use_adam = true;

    int input_dim() const { return obs_dim + d_task; }
};

struct Transition {
    std::vector<double> obs;
    std::vector<double> task;
    int action = 0;
    double credit = 0.0;
    std::vector<double> next_obs;
    std::vector<double> next_task;
    bool done = false;
};

// Fully-connected Q-network over [obs ++ task] with rectifier hidden layers
// and a linear head, plus a lagged target copy. All math in double; gradients
// are hand-derived and covered by a finite-difference oracle in the tests.
class QNetwork {
public:
    QNetwork(PolicyConfig config, std::uint64_t init_seed);

    const PolicyConfig& config() const { return config_; }

    // Q-values from the online parameters. Dropout hits only the task slots
    // and only when a rate and generator are supplied (training mode).
    std::vector<double> q_forward(const std::vector<double>& obs,
                                  const std::vector<double>& task,
                                  double dropout_rate = 0.0, Rng* dropout_rng = nullptr) const;

    std::vector<double> q_target_forward(const std::vector<double>& obs,
                                         const std::vector<double>& task) const;

    // Double-DQN targets for a minibatch (online argmax, target evaluation).
    std::vector<double> compute_targets(const std::vector<Transition>& minibatch) const;

    // Mean squared TD error against frozen targets; exposed for the
    // finite-difference gradient oracle.
    double td_loss(const std::vector<Transition>& minibatch,
                   const std::vector<double>& targets) const;
    std::pair<double, std::vector<double>> td_loss_grad(
        const std::vector<Transition>& minibatch, const std::vector<double>& targets) const;

    // One optimizer step on the minibatch; returns the pre-step loss and
    // refreshes the target copy every sync_interval updates.
    double apply_update(const std::vector<Transition>& minibatch, double learning_rate,
                        double dropout_rate = 0.0, Rng* dropout_rng = nullptr);

    void sync_target() { target_params_ = params_; }
    std::uint64_t update_count() const { return update_count_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<double>& target_params() const { return target_params_; }

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static QNetwork load(std::istream& in);
    static QNetwork load_file(const std::string& path);

private:
    struct LayerShape {
        int in = 0;
        int out = 0;
        std::size_t weight_offset = 0;
        std::size_t bias_offset = 0;
    };

    std::vector<double> forward_from(const std::vector<double>& params,
                                     const std::vector<double>& input,
                                     std::vector<std::vector<double>>* cache) const;
    std::vector<double> make_input(const std::vector<double>& obs,
                                   const std::vector<double>& task) const;

    PolicyConfig config_;
    std::vector<LayerShape> shapes_;
    std::size_t param_count_ = 0;
    std::vector<double> params_;
    std::vector<double> target_params_;
    std::vector<double> adam_m_;
    std::vector<double> adam_v_;
    std::uint64_t adam_t_ = 0;
    std::uint64_t update_count_ = 0;
};

// Epsilon-greedy over a Q-row; exact ties resolve to the lowest index.
int act_epsilon_greedy(const std::vector<double>& qvalues, double epsilon, Rng& rng);

int argmax_lowest(const std::vector<double>& values);

// Semi-gradient double-DQN target for a single transition.
double double_dqn_target(double credit, const std::vector<double>& next_obs,
                         const std::vector<double>& next_task, bool done, double gamma,
                         const QNetwork& net);

// Uniform ring buffer of transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    std::size_t size() const { return entries_.size(); }
    std::vector<Transition> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> entries_;
};

// Training-time decay of the task-assignment inputs: by the end of training
// every task slot is blanked and the associated units see peak dropout, so
// deployment without a critic matches what the net was trained on.
struct TaskInputSchedule {
    double dropout_end = 0.5;  // must stay in [0,1)

    double blank_fraction(double progress) const;
    double dropout_rate(double progress) const;
};

}  // namespace marl

#endif
