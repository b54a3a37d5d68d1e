#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace pecf {

/// Deterministic cash-flow model parameters.
///   rc       - rate of contribution on uncalled capital
///   g        - annual growth rate of the residual value
///   b        - "bow" exponent shaping the distribution-rate ramp
///   l        - fund lifetime in years
///   y        - yield floor on the distribution rate
///   cc_total - total callable capital as a fraction of commitment
struct yale_params {
    double rc = 0.25;
    double g = 0.10;
    double b = 2.0;
    double l = 16.0;
    double y = 0.0;
    double cc_total = 1.0;

    void validate() const {
        if (!(rc >= 0.0 && rc <= 1.0)) throw std::runtime_error("yale_params: rc outside [0,1]");
        if (!(g >= 0.0)) throw std::runtime_error("yale_params: g must be >= 0");
        if (!(b >= 0.0)) throw std::runtime_error("yale_params: b must be >= 0");
        if (!(l > 0.0)) throw std::runtime_error("yale_params: l must be > 0");
        if (!(y >= 0.0)) throw std::runtime_error("yale_params: y must be >= 0");
        if (!(cc_total > 0.0)) throw std::runtime_error("yale_params: cc_total must be > 0");
    }
};

/// Distribution rate at fund age t (years): max(y, (t/l)^b), capped at 1 so a
/// fund never pays out more than its current value.
inline double distribution_rate(const yale_params& p, double t_years) {
    const double ramp = std::pow(t_years / p.l, p.b);
    return std::min(1.0, std::max(p.y, ramp));
}

struct annual_step {
    double contribution = 0.0;
    double distribution = 0.0;
    double nav = 0.0;
};

/// Annual recursion state: t years elapsed, paid-in capital, net asset
/// value, cumulative distributions.
struct yale_state {
    int t = 0;
    double pic = 0.0;
    double nav = 0.0;
    double cum_dist = 0.0;
};

/// Annual model. For year t = 1..horizon:
///   C_t   = rc (cc_total - PIC_t),  PIC_t the capital paid in before t
///   D_t   = RD(t) NAV_{t-1} (1+g)
///   NAV_t = NAV_{t-1} (1+g) + C_t - D_t
/// All outputs are non-negative because RD is capped at 1.
inline std::vector<annual_step> simulate_annual(const yale_params& p, int horizon_years,
                                                double nav0 = 0.0) {
    p.validate();
    if (horizon_years < 0) throw std::runtime_error("simulate_annual: negative horizon");
    std::vector<annual_step> out;
    out.reserve(static_cast<std::size_t>(horizon_years));
    yale_state s;
    s.nav = nav0;
    for (int t = 1; t <= horizon_years; ++t) {
        const double c = p.rc * std::max(0.0, p.cc_total - s.pic);
        const double grown = s.nav * (1.0 + p.g);
        const double d = distribution_rate(p, static_cast<double>(t)) * grown;
        s.nav = grown + c - d;
        s.pic += c;
        s.cum_dist += d;
        s.t = t;
        out.push_back({c, d, s.nav});
    }
    return out;
}

/// Quarterly recursion state. `quarter` counts quarters already elapsed since
/// inception, so a window cut from mid-life starts at the right fund age.
struct quarter_state {
    int quarter = 0;
    double cc = 0.0;
    double rvc = 0.0;
};

struct quarter_step {
    double qcc = 0.0;
    double qdc = 0.0;
    double rvc = 0.0;
};

/// Quarterly model. For each step the fund is one quarter older; with q the
/// 1-based quarter number and t = q/4 its age in years:
///   qCC = rc (cc_total - CC) / 4
///   qDC = RD(t) RVC (1+g)^{1/4} / 4
///   RVC' = RVC (1+g)^{1/4} + qCC - qDC
/// Annual rates are split evenly over four quarters; value growth compounds
/// at the quarterly-equivalent rate.
inline std::vector<quarter_step> simulate_quarterly(const yale_params& p, int horizon,
                                                    quarter_state start) {
    p.validate();
    if (horizon < 0) throw std::runtime_error("simulate_quarterly: negative horizon");
    if (start.quarter < 0) throw std::runtime_error("simulate_quarterly: negative start quarter");
    std::vector<quarter_step> out;
    out.reserve(static_cast<std::size_t>(horizon));
    const double growth = std::pow(1.0 + p.g, 0.25);
    double cc = start.cc;
    double rvc = start.rvc;
    for (int j = 1; j <= horizon; ++j) {
        const int q = start.quarter + j;
        const double t_years = static_cast<double>(q) / 4.0;
        const double qcc = p.rc * std::max(0.0, p.cc_total - cc) / 4.0;
        const double grown = rvc * growth;
        const double qdc = distribution_rate(p, t_years) * grown / 4.0;
        rvc = grown + qcc - qdc;
        cc += qcc;
        out.push_back({qcc, qdc, rvc});
    }
    return out;
}

inline std::vector<quarter_step> simulate_quarterly(const yale_params& p, int horizon,
                                                    double cc0 = 0.0, double rvc0 = 0.0) {
    return simulate_quarterly(p, horizon, quarter_state{0, cc0, rvc0});
}

namespace detail {

/// Sum of squared errors of simulated quarterly contributions against
/// observations, rolling the contribution state self-consistently.
inline double rc_objective(double rc, std::span<const double> qcc_obs,
                           const quarter_state& start, const yale_params& base) {
    double cc = start.cc;
    double sse = 0.0;
    for (const double obs : qcc_obs) {
        const double qcc = rc * std::max(0.0, base.cc_total - cc) / 4.0;
        cc += qcc;
        const double r = obs - qcc;
        sse += r * r;
    }
    return sse;
}

/// Joint squared error on quarterly distributions and residual values for a
/// candidate (g, b), with rc held fixed and the full state rolled forward.
inline double gb_objective(double g, double b, double rc, std::span<const double> qdc_obs,
                           std::span<const double> rvc_obs, const quarter_state& start,
                           const yale_params& base) {
    yale_params p = base;
    p.rc = rc;
    p.g = g;
    p.b = b;
    const double growth = std::pow(1.0 + g, 0.25);
    double cc = start.cc;
    double rvc = start.rvc;
    double sse = 0.0;
    for (std::size_t j = 0; j < qdc_obs.size(); ++j) {
        const int q = start.quarter + static_cast<int>(j) + 1;
        const double qcc = rc * std::max(0.0, p.cc_total - cc) / 4.0;
        const double grown = rvc * growth;
        const double qdc = distribution_rate(p, static_cast<double>(q) / 4.0) * grown / 4.0;
        rvc = grown + qcc - qdc;
        cc += qcc;
        const double rd_err = qdc_obs[j] - qdc;
        const double rv_err = rvc_obs[j] - rvc;
        sse += rd_err * rd_err + rv_err * rv_err;
    }
    return sse;
}

} // namespace detail

/// Fits the contribution rate to observed quarterly contributions on [0, 1]:
/// a 101-point grid scan brackets the minimum, golden-section search narrows
/// it to 1e-6, and the exact endpoints stay in the candidate set so boundary
/// solutions (all-zero contributions, fully-front-loaded funds) come back
/// exact. Ties pick the smaller rate.
inline double calibrate_rc(std::span<const double> qcc_obs, quarter_state start,
                           const yale_params& base = {}) {
    if (qcc_obs.empty()) throw std::runtime_error("calibrate_rc: no observations");
    const auto f = [&](double rc) { return detail::rc_objective(rc, qcc_obs, start, base); };

    double best_rc = 0.0;
    double best_f = f(0.0);
    for (int i = 1; i <= 100; ++i) {
        const double rc = static_cast<double>(i) / 100.0;
        const double v = f(rc);
        if (v < best_f) {
            best_f = v;
            best_rc = rc;
        }
    }

    // Golden-section search on the two grid cells around the scan minimum.
    const double inv_phi = 0.6180339887498948482;
    double a = std::max(0.0, best_rc - 0.02);
    double b = std::min(1.0, best_rc + 0.02);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-6) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double refined = 0.5 * (a + b);

    double out = refined;
    double out_f = f(refined);
    for (const double cand : {best_rc, 0.0, 1.0}) {
        const double v = f(cand);
        if (v < out_f || (v == out_f && cand < out)) {
            out = cand;
            out_f = v;
        }
    }
    return out;
}

struct gb_estimate {
    double g = 0.0;
    double b = 0.0;
    double objective = 0.0;
};

namespace detail {

/// Deterministic Nelder-Mead on a 2-d box, used to polish the (g, b) grid
/// minimum. Out-of-box proposals are clamped inside the objective and pay a
/// quadratic penalty, so the simplex is pushed back without ever evaluating
/// the model outside its domain.
template <class F>
std::array<double, 3> nelder_mead_2d(F&& f, std::array<double, 2> x0,
                                     std::array<double, 2> step,
                                     std::array<double, 2> lo, std::array<double, 2> hi,
                                     int max_iter = 200) {
    const auto penalized = [&](std::array<double, 2> x) {
        const double gx = std::clamp(x[0], lo[0], hi[0]);
        const double bx = std::clamp(x[1], lo[1], hi[1]);
        const double dg = x[0] - gx, db = x[1] - bx;
        return f(gx, bx) + 1e3 * (dg * dg + db * db);
    };
    struct vertex {
        std::array<double, 2> x;
        double fx;
    };
    std::array<vertex, 3> v{vertex{x0, penalized(x0)},
                            vertex{{x0[0] + step[0], x0[1]}, 0.0},
                            vertex{{x0[0], x0[1] + step[1]}, 0.0}};
    v[1].fx = penalized(v[1].x);
    v[2].fx = penalized(v[2].x);

    for (int it = 0; it < max_iter; ++it) {
        std::sort(v.begin(), v.end(),
                  [](const vertex& a, const vertex& b) { return a.fx < b.fx; });
        const double spread = std::max(std::abs(v[2].x[0] - v[0].x[0]),
                                       std::abs(v[2].x[1] - v[0].x[1]));
        if (spread < 1e-9) break;

        const std::array<double, 2> centroid{0.5 * (v[0].x[0] + v[1].x[0]),
                                             0.5 * (v[0].x[1] + v[1].x[1])};
        const auto at = [&](double coef) {
            return std::array<double, 2>{centroid[0] + coef * (centroid[0] - v[2].x[0]),
                                         centroid[1] + coef * (centroid[1] - v[2].x[1])};
        };
        const std::array<double, 2> xr = at(1.0);
        const double fr = penalized(xr);
        if (fr < v[0].fx) {
            const std::array<double, 2> xe = at(2.0);
            const double fe = penalized(xe);
            v[2] = fe < fr ? vertex{xe, fe} : vertex{xr, fr};
        } else if (fr < v[1].fx) {
            v[2] = {xr, fr};
        } else {
            const std::array<double, 2> xc = at(-0.5);
            const double fcv = penalized(xc);
            if (fcv < v[2].fx) {
                v[2] = {xc, fcv};
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i].x = {0.5 * (v[i].x[0] + v[0].x[0]), 0.5 * (v[i].x[1] + v[0].x[1])};
                    v[i].fx = penalized(v[i].x);
                }
            }
        }
    }
    std::sort(v.begin(), v.end(), [](const vertex& a, const vertex& b) { return a.fx < b.fx; });
    return {std::clamp(v[0].x[0], lo[0], hi[0]), std::clamp(v[0].x[1], lo[1], hi[1]), v[0].fx};
}

} // namespace detail

/// Fits (g, b) on [0,1] x [0,5] to observed quarterly distributions and
/// residual values, with rc known and rolled through the same recursion. A
/// 33 x 33 grid scan seeds a Nelder-Mead polish; the refined point is taken
/// only when it strictly improves on the grid, so flat objectives resolve to
/// the lexicographically smallest (g, b) visited first.
inline gb_estimate calibrate_gb(std::span<const double> qdc_obs,
                                std::span<const double> rvc_obs, quarter_state start,
                                double rc, const yale_params& base = {}) {
    if (qdc_obs.empty() || qdc_obs.size() != rvc_obs.size())
        throw std::runtime_error("calibrate_gb: empty or mismatched observations");
    const auto f = [&](double g, double b) {
        return detail::gb_objective(g, b, rc, qdc_obs, rvc_obs, start, base);
    };

    constexpr int kGrid = 32;
    gb_estimate best{0.0, 0.0, f(0.0, 0.0)};
    for (int i = 0; i <= kGrid; ++i) {
        const double g = static_cast<double>(i) / kGrid;
        for (int j = 0; j <= kGrid; ++j) {
            const double b = 5.0 * static_cast<double>(j) / kGrid;
            const double v = f(g, b);
            if (v < best.objective) best = {g, b, v};
        }
    }

    const std::array<double, 3> refined = detail::nelder_mead_2d(
        f, {best.g, best.b}, {0.5 / kGrid, 2.5 / kGrid}, {0.0, 0.0}, {1.0, 5.0});
    const double refined_f = f(refined[0], refined[1]);
    if (refined_f < best.objective) best = {refined[0], refined[1], refined_f};
    return best;
}

} // namespace pecf
