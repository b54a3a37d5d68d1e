#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/tensor.hpp"

namespace pecf {

/// Mean squared error over the cells of rows the mask keeps. The mask has
/// one entry per row; a zero entry drops that whole row from the mean.
inline double mse(const tensor& pred, const tensor& actual,
                  std::span<const std::uint8_t> row_mask) {
    if (!pred.same_shape(actual))
        throw std::runtime_error("mse: prediction and actual shapes differ");
    if (row_mask.size() != pred.rows())
        throw std::runtime_error("mse: mask length " + std::to_string(row_mask.size()) +
                                 " does not match row count " + std::to_string(pred.rows()));
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t r = 0; r < pred.rows(); ++r) {
        if (!row_mask[r]) continue;
        for (std::size_t c = 0; c < pred.cols(); ++c) {
            const double d = pred(r, c) - actual(r, c);
            sum += d * d;
            ++cells;
        }
    }
    if (cells == 0) throw std::runtime_error("mse: mask keeps no cells");
    return sum / static_cast<double>(cells);
}

inline double mse(const tensor& pred, const tensor& actual) {
    const std::vector<std::uint8_t> all(pred.rows(), 1);
    return mse(pred, actual, all);
}

/// Coefficient of determination, 1 - SS_res / SS_tot, against the mean of
/// the actual values. A constant actual series has no variance to explain
/// and is rejected.
inline double r_squared(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size())
        throw std::runtime_error("r_squared: prediction and actual lengths differ");
    if (actual.empty()) throw std::runtime_error("r_squared: no observations");
    double mean = 0.0;
    for (const double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double res = actual[i] - pred[i];
        const double dev = actual[i] - mean;
        ss_res += res * res;
        ss_tot += dev * dev;
    }
    if (ss_tot == 0.0) throw std::runtime_error("r_squared: actual values have zero variance");
    return 1.0 - ss_res / ss_tot;
}

/// Model versus benchmark error for one window of one fund, both measured in
/// quarterly flow space on the same unmasked target cells.
struct fund_window_metrics {
    std::string fund_id;
    int window_index = 0;
    double mse_model = 0.0;
    double mse_benchmark = 0.0;
};

/// Headline evaluation numbers for one experiment: unweighted errors in the
/// model's own target space, per-target fit quality on the held-out set, and
/// the per-window model versus benchmark table.
struct metrics_report {
    double train_mse = 0.0;
    double test_mse = 0.0;
    std::array<double, 3> r2_per_target{};
    std::vector<fund_window_metrics> per_fund;
};

} // namespace pecf
