#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/nn/layers.hpp"
#include "pecf/rng.hpp"

namespace pecf::nn {

enum class layer_kind { gru, lstm, dense, repeat_expand, time_distributed_dense };

inline std::string to_string(layer_kind k) {
    switch (k) {
        case layer_kind::gru: return "gru";
        case layer_kind::lstm: return "lstm";
        case layer_kind::dense: return "dense";
        case layer_kind::repeat_expand: return "repeat_expand";
        case layer_kind::time_distributed_dense: return "time_distributed_dense";
    }
    throw std::logic_error("to_string: bad layer_kind enum");
}

inline layer_kind parse_layer_kind(const std::string& s) {
    if (s == "gru") return layer_kind::gru;
    if (s == "lstm") return layer_kind::lstm;
    if (s == "dense") return layer_kind::dense;
    if (s == "repeat_expand") return layer_kind::repeat_expand;
    if (s == "time_distributed_dense") return layer_kind::time_distributed_dense;
    throw std::runtime_error("unknown layer kind '" + s + "'");
}

/// One layer of a network description. `units` is the output width, except
/// for repeat_expand where it is the repeat count. `activation_cap` only
/// matters for scaled_sigmoid.
struct layer_spec {
    layer_kind kind = layer_kind::dense;
    std::size_t units = 1;
    activation act = activation::tanh;
    double activation_cap = 1.0;
    bool return_sequences = false;
};

/// Complete, buildable description of a network. The seed fully determines
/// the initial weights, so two networks built from equal specs are
/// identical.
struct network_spec {
    std::size_t input_features = 0;
    std::vector<layer_spec> layers;
    std::size_t output_targets = 0;
    std::uint64_t seed = 0;

    /// Walks the layer stack symbolically and checks that shapes chain:
    /// dense needs a collapsed (single row) input, time-distributed and
    /// repeat layers need sequences, and the last layer must emit
    /// output_targets channels.
    void validate() const {
        if (input_features == 0) throw std::runtime_error("network_spec: input_features is 0");
        if (output_targets == 0) throw std::runtime_error("network_spec: output_targets is 0");
        if (layers.empty()) throw std::runtime_error("network_spec: no layers");
        bool is_seq = true; // the input is a lookback sequence
        std::size_t width = input_features;
        std::size_t repeats = 0;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const layer_spec& l = layers[i];
            if (l.units == 0)
                throw std::runtime_error("network_spec: layer " + std::to_string(i) +
                                         " has zero units");
            switch (l.kind) {
                case layer_kind::gru:
                case layer_kind::lstm:
                    width = l.units;
                    is_seq = l.return_sequences;
                    break;
                case layer_kind::dense:
                    if (is_seq)
                        throw std::runtime_error(
                            "network_spec: dense layer " + std::to_string(i) +
                            " fed a sequence; use time_distributed_dense or a "
                            "non-sequence recurrent layer before it");
                    width = l.units;
                    break;
                case layer_kind::time_distributed_dense:
                    if (!is_seq)
                        throw std::runtime_error("network_spec: time_distributed_dense layer " +
                                                 std::to_string(i) + " needs a sequence input");
                    width = l.units;
                    break;
                case layer_kind::repeat_expand:
                    if (is_seq)
                        throw std::runtime_error("network_spec: repeat_expand layer " +
                                                 std::to_string(i) +
                                                 " needs a collapsed (single row) input");
                    if (++repeats > 1)
                        throw std::runtime_error(
                            "network_spec: more than one repeat_expand layer");
                    is_seq = true;
                    break;
            }
        }
        if (width != output_targets)
            throw std::runtime_error("network_spec: last layer emits " + std::to_string(width) +
                                     " channels but output_targets is " +
                                     std::to_string(output_targets));
    }
};

/// Whether a spec's final output is a sequence (one row per step) or one
/// collapsed row. Lets callers tell a sequence-to-sequence forecaster from
/// a parameter regressor without an out-of-band flag.
inline bool emits_sequence(const network_spec& spec) {
    bool is_seq = true;
    for (const layer_spec& l : spec.layers) {
        switch (l.kind) {
            case layer_kind::gru:
            case layer_kind::lstm: is_seq = l.return_sequences; break;
            case layer_kind::dense: is_seq = false; break;
            case layer_kind::repeat_expand: is_seq = true; break;
            case layer_kind::time_distributed_dense: break;
        }
    }
    return is_seq;
}

/// A built network: owns the layers and their parameters. Forward and
/// backward walk the stack in order; parameter gradients accumulate until
/// zero_grad().
class network {
public:
    explicit network(network_spec spec) : spec_(std::move(spec)) {
        spec_.validate();
        std::size_t width = spec_.input_features;
        for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
            const layer_spec& l = spec_.layers[i];
            const std::string name = "l" + std::to_string(i);
            switch (l.kind) {
                case layer_kind::gru:
                    layers_.push_back(std::make_unique<gru_layer>(name, width, l.units, l.act,
                                                                  l.return_sequences));
                    width = l.units;
                    break;
                case layer_kind::lstm:
                    layers_.push_back(std::make_unique<lstm_layer>(name, width, l.units, l.act,
                                                                   l.return_sequences));
                    width = l.units;
                    break;
                case layer_kind::dense:
                    layers_.push_back(
                        std::make_unique<dense_layer>(name, width, l.units, l.act,
                                                      l.activation_cap));
                    width = l.units;
                    break;
                case layer_kind::time_distributed_dense:
                    layers_.push_back(std::make_unique<time_distributed_dense_layer>(
                        name, width, l.units, l.act, l.activation_cap));
                    width = l.units;
                    break;
                case layer_kind::repeat_expand:
                    layers_.push_back(std::make_unique<repeat_expand_layer>(l.units, width));
                    break;
            }
        }
        rng r(spec_.seed);
        for (auto& l : layers_) l->init(r);
    }

    tensor forward(const tensor& x) {
        if (x.rank() != 2 || x.rows() == 0)
            throw std::runtime_error("network: input must be a non-empty rank-2 tensor");
        if (x.cols() != spec_.input_features)
            throw std::runtime_error("network: input width " + std::to_string(x.cols()) +
                                     " does not match spec input_features " +
                                     std::to_string(spec_.input_features));
        tensor h = x;
        for (auto& l : layers_) h = l->forward(h);
        return h;
    }

    /// Backpropagates a gradient with respect to the network output;
    /// parameter gradients accumulate into the layers.
    tensor backward(const tensor& dy) {
        tensor d = dy;
        for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i]->backward(d);
        return d;
    }

    void zero_grad() {
        for (auto& l : layers_) l->zero_grad();
    }

    std::vector<param_ref> params() {
        std::vector<param_ref> out;
        for (auto& l : layers_)
            for (param_ref& p : l->params()) out.push_back(p);
        return out;
    }

    [[nodiscard]] std::size_t param_count() {
        std::size_t n = 0;
        for (const param_ref& p : params()) n += p.value->size();
        return n;
    }

    [[nodiscard]] const network_spec& spec() const { return spec_; }

    /// Direct access for tests that pin gates or compare against scalar
    /// reference implementations.
    [[nodiscard]] layer& layer_at(std::size_t i) { return *layers_.at(i); }

private:
    network_spec spec_;
    std::vector<std::unique_ptr<layer>> layers_;
};

} // namespace pecf::nn
