#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pecf::nn {

enum class activation {
    linear,
    relu,
    sigmoid,
    tanh,
    exponential,
    /// max * sigmoid(x): a bounded positive output head with a tunable cap.
    scaled_sigmoid,
};

inline std::string to_string(activation a) {
    switch (a) {
        case activation::linear: return "linear";
        case activation::relu: return "relu";
        case activation::sigmoid: return "sigmoid";
        case activation::tanh: return "tanh";
        case activation::exponential: return "exponential";
        case activation::scaled_sigmoid: return "scaled_sigmoid";
    }
    throw std::logic_error("to_string: bad activation enum");
}

inline activation parse_activation(const std::string& s) {
    if (s == "linear") return activation::linear;
    if (s == "relu") return activation::relu;
    if (s == "sigmoid") return activation::sigmoid;
    if (s == "tanh") return activation::tanh;
    if (s == "exponential") return activation::exponential;
    if (s == "scaled_sigmoid") return activation::scaled_sigmoid;
    throw std::runtime_error("unknown activation '" + s + "'");
}

/// Numerically stable logistic function.
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double apply_activation(activation a, double x, double cap = 1.0) {
    switch (a) {
        case activation::linear: return x;
        case activation::relu: return x > 0.0 ? x : 0.0;
        case activation::sigmoid: return sigmoid(x);
        case activation::tanh: return std::tanh(x);
        case activation::exponential: return std::exp(x);
        case activation::scaled_sigmoid: return cap * sigmoid(x);
    }
    throw std::logic_error("apply_activation: bad activation enum");
}

/// d f / d x given both the pre-activation x and the output fx, whichever is
/// cheaper or more stable for the function in question.
inline double activation_derivative(activation a, double x, double fx, double cap = 1.0) {
    switch (a) {
        case activation::linear: return 1.0;
        case activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case activation::sigmoid: return fx * (1.0 - fx);
        case activation::tanh: return 1.0 - fx * fx;
        case activation::exponential: return fx;
        case activation::scaled_sigmoid: {
            const double s = fx / cap;
            return cap * s * (1.0 - s);
        }
    }
    throw std::logic_error("activation_derivative: bad activation enum");
}

} // namespace pecf::nn
