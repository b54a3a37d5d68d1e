#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pecf {

/// Dense row-major tensor of doubles with a dynamic shape.
///
/// Almost everything in the library is rank 2 (time x feature), so the
/// struct leans on rows()/cols() and operator()(i, j); higher ranks only
/// appear transiently (e.g. batched activations kept by layers).
struct tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    tensor() = default;

    static tensor zeros(std::vector<std::size_t> s) {
        tensor t;
        std::size_t n = 1;
        for (const std::size_t d : s) n *= d;
        t.shape = std::move(s);
        t.data.assign(n, 0.0);
        return t;
    }

    static tensor matrix(std::size_t rows, std::size_t cols) {
        return zeros({rows, cols});
    }

    static tensor row(std::vector<double> values) {
        tensor t;
        t.shape = {1, values.size()};
        t.data = std::move(values);
        return t;
    }

    [[nodiscard]] std::size_t size() const { return data.size(); }
    [[nodiscard]] std::size_t rank() const { return shape.size(); }

    [[nodiscard]] std::size_t rows() const {
        require_rank2();
        return shape[0];
    }

    [[nodiscard]] std::size_t cols() const {
        require_rank2();
        return shape[1];
    }

    double& operator()(std::size_t i, std::size_t j) {
        return data[i * shape[1] + j];
    }

    double operator()(std::size_t i, std::size_t j) const {
        return data[i * shape[1] + j];
    }

    [[nodiscard]] bool same_shape(const tensor& other) const {
        return shape == other.shape;
    }

    void fill(double v) {
        for (double& x : data) x = v;
    }

private:
    void require_rank2() const {
        if (shape.size() != 2)
            throw std::logic_error("tensor: rank-2 access on a tensor of rank " +
                                   std::to_string(shape.size()));
    }
};

} // namespace pecf
