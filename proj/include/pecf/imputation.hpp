#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/fund_data.hpp"

namespace pecf {

/// Natural cubic spline through strictly increasing knots. Second derivatives
/// at both ends are zero; the tridiagonal moment system is solved with the
/// Thomas algorithm. With fewer than 4 knots the spline degenerates to
/// piecewise linear interpolation, which needs no moment solve at all.
class natural_spline {
public:
    natural_spline(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys)) {
        const std::size_t n = x_.size();
        if (n != y_.size() || n < 2)
            throw std::runtime_error("natural_spline: need at least 2 knots");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::runtime_error("natural_spline: knots must be strictly increasing");
        m_.assign(n, 0.0);
        linear_ = n < 4;
        if (linear_) return;

        // Interior moment equations:
        //   h[i-1] M[i-1] + 2(h[i-1]+h[i]) M[i] + h[i] M[i+1] = 6 (d[i] - d[i-1])
        // with d[i] the secant slope on [x_i, x_{i+1}] and M[0] = M[n-1] = 0.
        std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        // Thomas forward sweep; the sub-diagonal entry for row i is h[i-1].
        for (std::size_t i = 1; i < diag.size(); ++i) {
            const double h = x_[i + 1] - x_[i];
            const double w = h / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = diag.size(); i-- > 0;) {
            const double next = (i + 1 < diag.size()) ? m_[i + 2] : 0.0;
            m_[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
        }
    }

    /// Evaluates the interpolant; x outside the knot span extrapolates the
    /// boundary segment (callers here never do that).
    [[nodiscard]] double operator()(double x) const {
        const std::size_t n = x_.size();
        std::size_t i = 0;
        while (i + 2 < n && x_[i + 1] < x) ++i;
        const double h = x_[i + 1] - x_[i];
        if (linear_) {
            const double w = (x - x_[i]) / h;
            return y_[i] + w * (y_[i + 1] - y_[i]);
        }
        const double a = x_[i + 1] - x;
        const double b = x - x_[i];
        return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) +
               (y_[i] / h - m_[i] * h / 6.0) * a + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * b;
    }

    [[nodiscard]] bool is_linear_fallback() const { return linear_; }

private:
    std::vector<double> x_, y_;
    std::vector<double> m_; // second derivatives at the knots
    bool linear_ = false;
};

/// Fraction of missing cells in a series. Errors on an empty series.
inline double missing_fraction(const std::vector<std::optional<double>>& s) {
    if (s.empty()) throw std::runtime_error("missing_fraction: empty series");
    std::size_t missing = 0;
    for (const auto& v : s)
        if (!v.has_value()) ++missing;
    return static_cast<double>(missing) / static_cast<double>(s.size());
}

/// Per-fund imputation audit line. missing_fractions is ordered
/// (called, dpi, rvpi); filled_indices is the union, over the three series,
/// of quarters that had to be filled (only meaningful when !removed).
struct imputation_report {
    std::string fund_id;
    std::array<double, 3> missing_fractions{0.0, 0.0, 0.0};
    bool removed = false;
    std::vector<int> filled_indices;
};

struct filter_result {
    std::vector<fund_record> kept;
    std::vector<imputation_report> reports;
};

/// Drops funds whose missing fraction reaches `threshold` in any of the three
/// series (boundary inclusive: exactly 30 % missing is dropped at the default).
inline filter_result filter_funds(const std::vector<fund_record>& records,
                                  double threshold = 0.30) {
    filter_result out;
    for (const fund_record& f : records) {
        imputation_report rep;
        rep.fund_id = f.fund_id;
        rep.missing_fractions = {missing_fraction(f.called_series()),
                                 missing_fraction(f.dpi_series()),
                                 missing_fraction(f.rvpi_series())};
        rep.removed = rep.missing_fractions[0] >= threshold ||
                      rep.missing_fractions[1] >= threshold ||
                      rep.missing_fractions[2] >= threshold;
        if (!rep.removed) out.kept.push_back(f);
        out.reports.push_back(std::move(rep));
    }
    return out;
}

/// Fills interior gaps of a partially observed series with a natural cubic
/// spline through the observed knots (linear when fewer than 4 are
/// observed). Requires the first and last positions to be observed. Observed
/// values pass through bit-for-bit; filled values are floored at 0.
inline std::vector<double> cubic_interpolate(const std::vector<std::optional<double>>& s) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i]) {
            xs.push_back(static_cast<double>(i));
            ys.push_back(*s[i]);
        }
    }
    if (xs.size() < 2)
        throw std::runtime_error("cubic_interpolate: need at least 2 observed values");
    if (!s.front() || !s.back())
        throw std::runtime_error("cubic_interpolate: first and last values must be observed");
    if (xs.size() == s.size()) {
        return ys; // nothing to fill
    }
    const natural_spline spline(xs, ys);
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i] = s[i] ? *s[i] : std::max(0.0, spline(static_cast<double>(i)));
    return out;
}

/// Completes one series for the pipeline: leading gaps become 0 (the fund has
/// not called or paid anything yet), trailing gaps carry the last observation
/// forward, and interior gaps are spline-filled between the first and last
/// observed quarters.
inline std::vector<double> impute_series(const std::vector<std::optional<double>>& s) {
    if (s.empty()) throw std::runtime_error("impute_series: empty series");
    std::size_t first = s.size(), last = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i]) {
            if (first == s.size()) first = i;
            last = i;
        }
    }
    if (first == s.size())
        throw std::runtime_error("impute_series: series has no observed values");

    if (first == last) {
        // A single observation: constant after it, zero before.
        std::vector<double> out(s.size(), 0.0);
        for (std::size_t i = first; i < s.size(); ++i) out[i] = *s[first];
        return out;
    }

    std::vector<std::optional<double>> core(s.begin() + static_cast<std::ptrdiff_t>(first),
                                            s.begin() + static_cast<std::ptrdiff_t>(last + 1));
    const std::vector<double> filled = cubic_interpolate(core);

    std::vector<double> out(s.size(), 0.0);
    for (std::size_t i = 0; i < filled.size(); ++i) out[first + i] = filled[i];
    for (std::size_t i = last + 1; i < s.size(); ++i) out[i] = out[last];
    return out;
}

namespace detail {

/// Running-max repair for cumulative series: interpolation (or noisy
/// reporting) can dip below an earlier level, which would turn into negative
/// flows downstream.
inline void make_non_decreasing(std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
}

} // namespace detail

/// Imputes a single fund into a complete ratio series (fractions). The
/// called and dpi series are repaired to be non-decreasing after filling;
/// rvpi is a value level and is only floored at 0. When `filled` is given it
/// receives the union of originally-missing quarter indices.
inline fund_series impute_record(const fund_record& f, std::vector<int>* filled = nullptr) {
    const auto called_raw = f.called_series();
    const auto dpi_raw = f.dpi_series();
    const auto rvpi_raw = f.rvpi_series();

    std::vector<double> called, dpi, rvpi;
    try {
        called = impute_series(called_raw);
        dpi = impute_series(dpi_raw);
        rvpi = impute_series(rvpi_raw);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("fund " + f.fund_id + ": " + e.what());
    }
    detail::make_non_decreasing(called);
    detail::make_non_decreasing(dpi);

    if (filled) {
        filled->clear();
        for (std::size_t i = 0; i < called_raw.size(); ++i)
            if (!called_raw[i] || !dpi_raw[i] || !rvpi_raw[i])
                filled->push_back(static_cast<int>(i));
    }

    fund_series out;
    out.fund_id = f.fund_id;
    out.vintage_year = f.vintage_year;
    out.commitment = f.commitment;
    out.observed_len = called.size();
    out.called.resize(called.size());
    out.dpi.resize(called.size());
    out.rvpi.resize(called.size());
    for (std::size_t i = 0; i < called.size(); ++i) {
        out.called[i] = called[i] / 100.0;
        out.dpi[i] = dpi[i] / 100.0;
        out.rvpi[i] = rvpi[i] / 100.0;
    }
    return out;
}

/// Pads every fund of a vintage to that vintage's longest series by repeating
/// the final ratio row, so padded quarters contribute zero flows and a
/// carried-forward residual value. Idempotent; observed_len is untouched.
inline void pad_to_vintage_length(std::vector<fund_series>& funds) {
    std::map<int, std::size_t> vintage_len;
    for (const fund_series& f : funds) {
        auto [it, inserted] = vintage_len.try_emplace(f.vintage_year, f.length());
        if (!inserted) it->second = std::max(it->second, f.length());
    }
    for (fund_series& f : funds) {
        const std::size_t target = vintage_len[f.vintage_year];
        while (f.length() < target) {
            f.called.push_back(f.called.back());
            f.dpi.push_back(f.dpi.back());
            f.rvpi.push_back(f.rvpi.back());
        }
    }
}

struct prepared_dataset {
    std::vector<fund_series> funds;
    std::vector<imputation_report> reports;
};

/// Full imputation pipeline: missing-data filter, per-series fill, monotone
/// repair, then vintage padding.
inline prepared_dataset prepare_dataset(const std::vector<fund_record>& records,
                                        double threshold = 0.30) {
    prepared_dataset out;
    filter_result filtered = filter_funds(records, threshold);
    std::map<std::string, std::size_t> report_index;
    for (std::size_t i = 0; i < filtered.reports.size(); ++i)
        report_index[filtered.reports[i].fund_id] = i;
    for (const fund_record& f : filtered.kept) {
        std::vector<int> filled;
        out.funds.push_back(impute_record(f, &filled));
        filtered.reports[report_index[f.fund_id]].filled_indices = std::move(filled);
    }
    pad_to_vintage_length(out.funds);
    out.reports = std::move(filtered.reports);
    return out;
}

} // namespace pecf
