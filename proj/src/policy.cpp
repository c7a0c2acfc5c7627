#include "marl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace marl {

namespace {

constexpr char kCheckpointMagic[8] = {'M', 'R', 'L', 'Q', 'N', 'E', 'T', '1'};
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

QNetwork::QNetwork(PolicyConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
    if (config_.obs_dim < 1) throw std::invalid_argument("QNetwork: obs_dim must be >= 1");
    if (config_.d_task < 0) throw std::invalid_argument("QNetwork: d_task must be >= 0");
    if (config_.action_count < 1) throw std::invalid_argument("QNetwork: need actions");

    int in = config_.input_dim();
    std::size_t offset = 0;
    for (int width : config_.hidden) {
        if (width < 1) throw std::invalid_argument("QNetwork: bad hidden width");
        shapes_.push_back({in, width, offset, offset + static_cast<std::size_t>(in) * width});
        offset += static_cast<std::size_t>(in) * width + width;
        in = width;
    }
    shapes_.push_back({in, config_.action_count, offset,
                       offset + static_cast<std::size_t>(in) * config_.action_count});
    offset += static_cast<std::size_t>(in) * config_.action_count + config_.action_count;
    param_count_ = offset;

    params_.assign(param_count_, 0.0);
    Rng rng(init_seed);
    for (const auto& shape : shapes_) {
        const double scale = std::sqrt(2.0 / shape.in);
        for (int r = 0; r < shape.out; ++r)
            for (int c = 0; c < shape.in; ++c)
                params_[shape.weight_offset + static_cast<std::size_t>(r) * shape.in + c] =
                    rng.normal() * scale;
        // biases start at zero
    }
    target_params_ = params_;
    adam_m_.assign(param_count_, 0.0);
    adam_v_.assign(param_count_, 0.0);
}

std::vector<double> QNetwork::make_input(const std::vector<double>& obs,
                                         const std::vector<double>& task) const {
    if (static_cast<int>(obs.size()) != config_.obs_dim)
        throw std::invalid_argument("QNetwork: obs dim mismatch");
    if (static_cast<int>(task.size()) != config_.d_task && !task.empty())
        throw std::invalid_argument("QNetwork: task dim mismatch");
    std::vector<double> input(config_.input_dim(), 0.0);
    std::copy(obs.begin(), obs.end(), input.begin());
    if (!task.empty()) std::copy(task.begin(), task.end(), input.begin() + config_.obs_dim);
    return input;
}

std::vector<double> QNetwork::forward_from(const std::vector<double>& params,
                                           const std::vector<double>& input,
                                           std::vector<std::vector<double>>* cache) const {
    std::vector<double> act = input;
    if (cache) cache->push_back(act);
    for (std::size_t l = 0; l < shapes_.size(); ++l) {
        const auto& s = shapes_[l];
        std::vector<double> next(s.out, 0.0);
        for (int r = 0; r < s.out; ++r) {
            double sum = params[s.bias_offset + r];
            const double* w = params.data() + s.weight_offset + static_cast<std::size_t>(r) * s.in;
            for (int c = 0; c < s.in; ++c) sum += w[c] * act[c];
            next[r] = sum;
        }
        const bool last = l + 1 == shapes_.size();
        if (!last)
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        act = std::move(next);
        if (cache) cache->push_back(act);
    }
    return act;
}

std::vector<double> QNetwork::q_forward(const std::vector<double>& obs,
                                        const std::vector<double>& task, double dropout_rate,
                                        Rng* dropout_rng) const {
    std::vector<double> input = make_input(obs, task);
    if (dropout_rate > 0.0 && dropout_rng != nullptr) {
        const double keep = 1.0 - dropout_rate;
        for (int i = config_.obs_dim; i < config_.input_dim(); ++i)
            input[i] = dropout_rng->uniform01() < dropout_rate ? 0.0 : input[i] / keep;
    }
    return forward_from(params_, input, nullptr);
}

std::vector<double> QNetwork::q_target_forward(const std::vector<double>& obs,
                                               const std::vector<double>& task) const {
    return forward_from(target_params_, make_input(obs, task), nullptr);
}

int argmax_lowest(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("argmax over empty vector");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double double_dqn_target(double credit, const std::vector<double>& next_obs,
                         const std::vector<double>& next_task, bool done, double gamma,
                         const QNetwork& net) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("double_dqn_target: gamma must be in [0,1)");
    if (done) return credit;
    const auto online_q = net.q_forward(next_obs, next_task);
    const int best = argmax_lowest(online_q);
    const auto target_q = net.q_target_forward(next_obs, next_task);
    return credit + gamma * target_q[best];
}

std::vector<double> QNetwork::compute_targets(const std::vector<Transition>& minibatch) const {
    std::vector<double> targets;
    targets.reserve(minibatch.size());
    for (const auto& t : minibatch)
        targets.push_back(
            double_dqn_target(t.credit, t.next_obs, t.next_task, t.done, config_.gamma, *this));
    return targets;
}

double QNetwork::td_loss(const std::vector<Transition>& minibatch,
                         const std::vector<double>& targets) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < minibatch.size(); ++i) {
        const auto q = forward_from(params_, make_input(minibatch[i].obs, minibatch[i].task),
                                    nullptr);
        const double diff = q[minibatch[i].action] - targets[i];
        loss += diff * diff;
    }
    return loss / static_cast<double>(minibatch.size());
}

std::pair<double, std::vector<double>> QNetwork::td_loss_grad(
    const std::vector<Transition>& minibatch, const std::vector<double>& targets) const {
    std::vector<double> grad(param_count_, 0.0);
    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(minibatch.size());

    for (std::size_t i = 0; i < minibatch.size(); ++i) {
        std::vector<std::vector<double>> cache;
        const auto input = make_input(minibatch[i].obs, minibatch[i].task);
        const auto q = forward_from(params_, input, &cache);
        const int action = minibatch[i].action;
        if (action < 0 || action >= static_cast<int>(q.size()))
            throw std::invalid_argument("QNetwork: action out of range in minibatch");
        const double diff = q[action] - targets[i];
        loss += diff * diff;

        // Backprop: delta over the output layer is zero except the taken action.
        std::vector<double> delta(q.size(), 0.0);
        delta[action] = 2.0 * diff * inv_batch;

        for (int l = static_cast<int>(shapes_.size()) - 1; l >= 0; --l) {
            const auto& s = shapes_[l];
            const auto& pre = cache[l];  // activations feeding this layer
            std::vector<double> prev_delta(s.in, 0.0);
            for (int r = 0; r < s.out; ++r) {
                const double d = delta[r];
                if (d == 0.0) continue;
                grad[s.bias_offset + r] += d;
                double* gw =
                    grad.data() + s.weight_offset + static_cast<std::size_t>(r) * s.in;
                const double* w =
                    params_.data() + s.weight_offset + static_cast<std::size_t>(r) * s.in;
                for (int c = 0; c < s.in; ++c) {
                    gw[c] += d * pre[c];
                    prev_delta[c] += d * w[c];
                }
            }
            if (l > 0) {
                // Rectifier mask of the previous layer's post-activation.
                for (int c = 0; c < s.in; ++c)
                    if (cache[l][c] <= 0.0) prev_delta[c] = 0.0;
            }
            delta = std::move(prev_delta);
        }
    }
    return {loss * inv_batch, std::move(grad)};
}

double QNetwork::apply_update(const std::vector<Transition>& minibatch, double learning_rate,
                              double dropout_rate, Rng* dropout_rng) {
    if (minibatch.empty()) throw std::invalid_argument("QNetwork: empty minibatch");

    std::vector<Transition> batch = minibatch;
    if (dropout_rate > 0.0 && dropout_rng != nullptr) {
        const double keep = 1.0 - dropout_rate;
        for (auto& t : batch)
            for (auto& v : t.task)
                v = dropout_rng->uniform01() < dropout_rate ? 0.0 : v / keep;
    }

    const auto targets = compute_targets(batch);
    auto [loss, grad] = td_loss_grad(batch, targets);
    if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "QNetwork: non-finite loss " << loss << " at update " << update_count_
           << " (batch size " << batch.size() << ")";
        throw std::runtime_error(os.str());
    }

    if (config_.use_adam) {
        ++adam_t_;
        const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t_));
        const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t_));
        for (std::size_t p = 0; p < param_count_; ++p) {
            adam_m_[p] = kAdamBeta1 * adam_m_[p] + (1.0 - kAdamBeta1) * grad[p];
            adam_v_[p] = kAdamBeta2 * adam_v_[p] + (1.0 - kAdamBeta2) * grad[p] * grad[p];
            const double mhat = adam_m_[p] / bc1;
            const double vhat = adam_v_[p] / bc2;
            params_[p] -= learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
        }
    } else {
        for (std::size_t p = 0; p < param_count_; ++p)
            params_[p] -= learning_rate * grad[p];
    }

    ++update_count_;
    if (config_.sync_interval > 0 && update_count_ % config_.sync_interval == 0) sync_target();
    return loss;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated stream");
    return value;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_pod<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated stream");
    return v;
}

}  // namespace

void QNetwork::save(std::ostream& out) const {
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod<std::int32_t>(out, config_.obs_dim);
    write_pod<std::int32_t>(out, config_.d_task);
    write_pod<std::int32_t>(out, config_.action_count);
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(config_.hidden.size()));
    for (int h : config_.hidden) write_pod<std::int32_t>(out, h);
    write_pod<double>(out, config_.learning_rate);
    write_pod<double>(out, config_.gamma);
    write_pod<std::int32_t>(out, config_.replay_capacity);
    write_pod<std::int32_t>(out, config_.minibatch);
    write_pod<std::int32_t>(out, config_.sync_interval);
    write_pod<std::uint8_t>(out, config_.use_adam ? 1 : 0);
    write_doubles(out, params_);
    write_doubles(out, target_params_);
    write_doubles(out, adam_m_);
    write_doubles(out, adam_v_);
    write_pod<std::uint64_t>(out, adam_t_);
    write_pod<std::uint64_t>(out, update_count_);
}

void QNetwork::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    save(out);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

QNetwork QNetwork::load(std::istream& in) {
    char magic[sizeof(kCheckpointMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    PolicyConfig config;
    config.obs_dim = read_pod<std::int32_t>(in);
    config.d_task = read_pod<std::int32_t>(in);
    config.action_count = read_pod<std::int32_t>(in);
    const auto hidden_count = read_pod<std::int32_t>(in);
    config.hidden.clear();
    for (int i = 0; i < hidden_count; ++i) config.hidden.push_back(read_pod<std::int32_t>(in));
    config.learning_rate = read_pod<double>(in);
    config.gamma = read_pod<double>(in);
    config.replay_capacity = read_pod<std::int32_t>(in);
    config.minibatch = read_pod<std::int32_t>(in);
    config.sync_interval = read_pod<std::int32_t>(in);
    config.use_adam = read_pod<std::uint8_t>(in) != 0;

    QNetwork net(config, 0);
    net.params_ = read_doubles(in);
    net.target_params_ = read_doubles(in);
    net.adam_m_ = read_doubles(in);
    net.adam_v_ = read_doubles(in);
    if (net.params_.size() != net.param_count_ || net.target_params_.size() != net.param_count_)
        throw std::runtime_error("checkpoint: parameter count mismatch");
    net.adam_t_ = read_pod<std::uint64_t>(in);
    net.update_count_ = read_pod<std::uint64_t>(in);
    return net;
}

QNetwork QNetwork::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    return load(in);
}

int act_epsilon_greedy(const std::vector<double>& qvalues, double epsilon, Rng& rng) {
    if (qvalues.empty()) throw std::invalid_argument("act_epsilon_greedy: empty q-values");
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("act_epsilon_greedy: epsilon out of range");
    const double u = rng.uniform01();
    if (u < epsilon) return rng.below_int(static_cast<int>(qvalues.size()));
    return argmax_lowest(qvalues);
}

void ReplayBuffer::push(Transition t) {
    if (capacity_ == 0) return;
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(t));
    } else {
        entries_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
    if (entries_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
    std::vector<Transition> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(entries_[rng.below(entries_.size())]);
    return out;
}

double TaskInputSchedule::blank_fraction(double progress) const {
    if (progress < 0.0 || progress > 1.0)
        throw std::invalid_argument("TaskInputSchedule: progress out of [0,1]");
    return progress;
}

double TaskInputSchedule::dropout_rate(double progress) const {
    if (progress < 0.0 || progress > 1.0)
        throw std::invalid_argument("TaskInputSchedule: progress out of [0,1]");
    return dropout_end * progress;
}

}  // namespace marl
