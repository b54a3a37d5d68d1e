#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/nn/network.hpp"
#include "pecf/rng.hpp"

namespace pecf::nn {

/// One supervised window: an input sequence, a target tensor, a sample
/// weight, and an optional per-target-row mask (empty means every row is
/// scored; 0 marks rows excluded from the loss, e.g. vintage padding).
struct training_sample {
    tensor input;
    tensor target;
    double weight = 1.0;
    std::vector<std::uint8_t> row_mask;

    [[nodiscard]] bool row_scored(std::size_t r) const {
        return row_mask.empty() || row_mask[r] != 0;
    }

    [[nodiscard]] std::size_t scored_cells() const {
        std::size_t n = 0;
        for (std::size_t r = 0; r < target.rows(); ++r)
            if (row_scored(r)) n += target.cols();
        return n;
    }
};

/// Mean squared residual over the unmasked cells of one prediction.
/// Returns {sum of squares, cell count}; the caller decides how a window
/// with nothing to score enters an aggregate.
inline std::pair<double, std::size_t> masked_sum_sq(const tensor& pred, const tensor& target,
                                                    const std::vector<std::uint8_t>& row_mask) {
    if (!pred.same_shape(target))
        throw std::runtime_error("masked_sum_sq: prediction and target shapes differ");
    if (!row_mask.empty() && row_mask.size() != target.rows())
        throw std::runtime_error("masked_sum_sq: mask length does not match target rows");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < target.rows(); ++r) {
        if (!row_mask.empty() && row_mask[r] == 0) continue;
        for (std::size_t c = 0; c < target.cols(); ++c) {
            const double d = pred(r, c) - target(r, c);
            sum += d * d;
        }
        n += target.cols();
    }
    return {sum, n};
}

/// Sample-weighted mean squared error across a set of windows:
///   loss = sum_i w_i * mean_i / sum_i w_i
/// with mean_i the per-window mean over unmasked cells. Windows with no
/// scorable cells drop out of both sums; if nothing at all is scorable the
/// loss is undefined and that is an error.
inline double weighted_mse(std::span<const tensor> preds, std::span<const tensor> targets,
                           std::span<const double> weights,
                           std::span<const std::vector<std::uint8_t>> masks) {
    const std::size_t n = preds.size();
    if (targets.size() != n || weights.size() != n || (!masks.empty() && masks.size() != n))
        throw std::runtime_error("weighted_mse: input spans have different lengths");
    static const std::vector<std::uint8_t> no_mask;
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mask = masks.empty() ? no_mask : masks[i];
        const auto [sum, cells] = masked_sum_sq(preds[i], targets[i], mask);
        if (cells == 0) continue;
        acc += weights[i] * (sum / static_cast<double>(cells));
        wsum += weights[i];
    }
    if (wsum == 0.0) throw std::runtime_error("weighted_mse: all cells masked");
    return acc / wsum;
}

/// Evaluates the network on every sample and returns the weighted MSE.
inline double dataset_loss(network& net, const std::vector<training_sample>& samples) {
    std::vector<tensor> preds, targets;
    std::vector<double> weights;
    std::vector<std::vector<std::uint8_t>> masks;
    preds.reserve(samples.size());
    for (const training_sample& s : samples) {
        preds.push_back(net.forward(s.input));
        targets.push_back(s.target);
        weights.push_back(s.weight);
        masks.push_back(s.row_mask);
    }
    return weighted_mse(preds, targets, weights, masks);
}

struct train_config {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

/// Adam moment estimates, one pair of tensors per parameter.
struct adam_state {
    std::size_t step = 0;
    std::vector<tensor> m, v;
};

inline void adam_init(adam_state& st, const std::vector<param_ref>& params) {
    st.step = 0;
    st.m.clear();
    st.v.clear();
    for (const param_ref& p : params) {
        st.m.push_back(tensor::zeros(p.value->shape));
        st.v.push_back(tensor::zeros(p.value->shape));
    }
}

/// One Adam update from the gradients currently accumulated in the params,
/// with the usual bias correction of both moment estimates.
inline void adam_step(std::vector<param_ref>& params, adam_state& st, const train_config& cfg) {
    if (st.m.size() != params.size()) throw std::runtime_error("adam_step: state not initialized");
    ++st.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        tensor& value = *params[i].value;
        const tensor& grad = *params[i].grad;
        tensor& m = st.m[i];
        tensor& v = st.v[i];
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad.data[k];
            m.data[k] = cfg.beta1 * m.data[k] + (1.0 - cfg.beta1) * g;
            v.data[k] = cfg.beta2 * v.data[k] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m.data[k] / bc1;
            const double vhat = v.data[k] / bc2;
            value.data[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

struct train_result {
    std::vector<double> train_loss;      // full-dataset loss after each epoch
    std::vector<double> validation_loss; // empty when no validation set given
};

namespace detail {

/// Accumulates dL/dparams for one sample into the network, given the batch
/// weight normalizer. Returns the sample's weighted loss contribution.
inline double backprop_sample(network& net, const training_sample& s, double weight_norm) {
    const tensor pred = net.forward(s.input);
    const auto [sum, cells] = masked_sum_sq(pred, s.target, s.row_mask);
    if (cells == 0) return 0.0;
    const double scale = 2.0 * s.weight / (static_cast<double>(cells) * weight_norm);
    tensor dy = tensor::zeros(pred.shape);
    for (std::size_t r = 0; r < pred.rows(); ++r) {
        if (!s.row_scored(r)) continue;
        for (std::size_t c = 0; c < pred.cols(); ++c)
            dy(r, c) = scale * (pred(r, c) - s.target(r, c));
    }
    net.backward(dy);
    return s.weight * (sum / static_cast<double>(cells)) / weight_norm;
}

} // namespace detail

/// Mini-batch Adam training. Sample order is reshuffled every epoch from the
/// config seed; batches see a weighted MSE whose normalizer is the batch's
/// own weight sum. Per-epoch full-dataset losses (and validation losses,
/// when a validation set is given) are recorded. A non-finite batch loss
/// aborts with the epoch and batch in the message rather than training on.
inline train_result train(network& net, const std::vector<training_sample>& samples,
                          const train_config& cfg,
                          const std::vector<training_sample>* validation = nullptr) {
    if (samples.empty()) throw std::runtime_error("train: no training samples");
    if (cfg.batch_size == 0) throw std::runtime_error("train: batch_size must be >= 1");

    auto params = net.params();
    adam_state st;
    adam_init(st, params);
    rng shuffle_rng(derive_seed(cfg.seed, "epoch-shuffle"));

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    train_result result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            double weight_norm = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const training_sample& s = samples[order[k]];
                if (s.scored_cells() > 0) weight_norm += s.weight;
            }
            if (weight_norm == 0.0) continue; // nothing scorable in this batch
            net.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k)
                batch_loss += detail::backprop_sample(net, samples[order[k]], weight_norm);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(start / cfg.batch_size + 1));
            adam_step(params, st, cfg);
        }
        result.train_loss.push_back(dataset_loss(net, samples));
        if (validation) result.validation_loss.push_back(dataset_loss(net, *validation));
    }
    return result;
}

/// Central-difference check of the analytic gradient on a freshly built
/// network: returns the maximum relative error over all parameters, with the
/// denominator floored so near-zero gradient pairs do not divide to noise.
inline double gradient_check(const network_spec& spec,
                             const std::vector<training_sample>& samples,
                             double fd_step = 1e-5) {
    if (samples.empty()) throw std::runtime_error("gradient_check: no samples");
    network net(spec);
    auto params = net.params();

    double weight_norm = 0.0;
    for (const training_sample& s : samples)
        if (s.scored_cells() > 0) weight_norm += s.weight;
    if (weight_norm == 0.0) throw std::runtime_error("gradient_check: all cells masked");

    net.zero_grad();
    for (const training_sample& s : samples) detail::backprop_sample(net, s, weight_norm);

    std::vector<tensor> analytic;
    analytic.reserve(params.size());
    for (const param_ref& p : params) analytic.push_back(*p.grad);

    const auto loss = [&] { return dataset_loss(net, samples); };
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        tensor& value = *params[i].value;
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double saved = value.data[k];
            value.data[k] = saved + fd_step;
            const double up = loss();
            value.data[k] = saved - fd_step;
            const double down = loss();
            value.data[k] = saved;
            const double fd = (up - down) / (2.0 * fd_step);
            const double a = analytic[i].data[k];
            const double denom = std::max({std::abs(a), std::abs(fd), 1e-5});
            max_rel = std::max(max_rel, std::abs(a - fd) / denom);
        }
    }
    return max_rel;
}

} // namespace pecf::nn
