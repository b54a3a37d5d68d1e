#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/fund_data.hpp"
#include "pecf/macro.hpp"
#include "pecf/rng.hpp"
#include "pecf/yale.hpp"

namespace pecf {

/// Multiplicative mean-one lognormal factor: exp(sigma Z - sigma^2 / 2).
/// sigma = 0 returns exactly 1 while still consuming one draw, so noiseless
/// runs walk the same random stream as noisy ones.
inline double lognormal_factor(rng& r, double sigma) {
    const double z = r.normal();
    return std::exp(sigma * z - 0.5 * sigma * sigma);
}

/// Deterministic-model fund path with multiplicative flow noise. The noisy
/// residual value is rebuilt through the accounting recursion from the noisy
/// flows, so the identity rvc_t = rvc_{t-1} (1+g)^{1/4} + qcc_t - qdc_t holds
/// exactly for the emitted series; distributions are capped so the value can
/// never be driven below zero. With sigma = 0 the path equals the noiseless
/// simulation bit for bit.
inline quarterly_flows gen_yale_fund(const yale_params& p, int horizon, double noise_sigma,
                                     rng& r) {
    const std::vector<quarter_step> clean = simulate_quarterly(p, horizon);
    const double growth = std::pow(1.0 + p.g, 0.25);
    quarterly_flows out;
    out.qcc.reserve(clean.size());
    out.qdc.reserve(clean.size());
    out.rvc.reserve(clean.size());
    double rvc = 0.0;
    for (const quarter_step& s : clean) {
        const double qcc = s.qcc * lognormal_factor(r, noise_sigma);
        const double grown = rvc * growth;
        const double qdc = std::min(s.qdc * lognormal_factor(r, noise_sigma), grown + qcc);
        rvc = grown + qcc - qdc;
        out.qcc.push_back(qcc);
        out.qdc.push_back(qdc);
        out.rvc.push_back(rvc);
    }
    return out;
}

/// Parameters of the stochastic generator: a square-root mean-reverting
/// drawdown rate for contributions, and a log-level distribution process
/// reverting to a lifecycle payout target.
struct buchner_params {
    // contribution rate: d delta = kappa (theta - delta+) dt + sigma_delta sqrt(delta+) dW
    double kappa = 3.0;
    double theta = 0.4;
    double sigma_delta = 0.25;
    double delta0 = 0.4;
    // distribution level: d ln p = alpha (ln target(t) - ln p) dt + sigma_p dW,
    // target(t) = m * s(t) with s a unit-integral lognormal payout shape
    double alpha = 1.5;
    double m = 1.8;
    double sigma_p = 0.4;
    double shape_median_years = 6.0;
    double shape_sigma = 0.6;
    // annual growth used to roll the residual value between quarters
    double nav_growth = 0.10;
    double dt = 0.25;
};

/// Lognormal density in fund age; integrates to one over (0, inf), so the
/// distribution target sums to roughly m times commitment over a fund's life.
inline double payout_shape(const buchner_params& p, double t_years) {
    if (t_years <= 0.0) return 0.0;
    const double z = (std::log(t_years) - std::log(p.shape_median_years)) / p.shape_sigma;
    return std::exp(-0.5 * z * z) /
           (t_years * p.shape_sigma * std::sqrt(6.283185307179586476925286766559));
}

/// Contribution fractions from the full-truncation Euler scheme: the rate
/// floor enters the drift, the diffusion and the cash flow, so a negative
/// excursion draws nothing and is pulled back by the drift. Contributions
/// can never exceed the remaining undrawn capital.
inline std::vector<double> buchner_contribution_path(const buchner_params& p, int horizon,
                                                     rng& r) {
    if (horizon < 0) throw std::runtime_error("buchner_contribution_path: negative horizon");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    const double sqrt_dt = std::sqrt(p.dt);
    double delta = p.delta0;
    double undrawn = 1.0;
    for (int j = 0; j < horizon; ++j) {
        const double dplus = std::max(delta, 0.0);
        const double c = std::min(dplus * undrawn * p.dt, undrawn);
        undrawn -= c;
        out.push_back(c);
        delta += p.kappa * (p.theta - dplus) * p.dt +
                 p.sigma_delta * std::sqrt(dplus) * sqrt_dt * r.normal();
    }
    return out;
}

/// Distribution fractions: the log level mean-reverts to the lifecycle
/// target m * s(t), floored far below any real payout so the log is always
/// defined. Started on the target, a zero-volatility path just traces it.
inline std::vector<double> buchner_distribution_path(const buchner_params& p, int horizon,
                                                     rng& r) {
    if (horizon < 0) throw std::runtime_error("buchner_distribution_path: negative horizon");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    const double sqrt_dt = std::sqrt(p.dt);
    const auto log_target = [&](double t) {
        return std::log(std::max(1e-12, p.m * payout_shape(p, t)));
    };
    double lnp = log_target(p.dt);
    for (int j = 0; j < horizon; ++j) {
        out.push_back(std::exp(lnp) * p.dt);
        const double t_next = static_cast<double>(j + 2) * p.dt;
        lnp += p.alpha * (log_target(t_next) - lnp) * p.dt + p.sigma_p * sqrt_dt * r.normal();
    }
    return out;
}

/// Assembles a stochastic-generator fund: contribution and distribution
/// paths are drawn independently, and the residual value is built through
/// the same capped accounting recursion as the deterministic generator.
inline quarterly_flows gen_buchner_fund(const buchner_params& p, int horizon, rng& r) {
    const std::vector<double> qcc = buchner_contribution_path(p, horizon, r);
    const std::vector<double> qdc_raw = buchner_distribution_path(p, horizon, r);
    const double growth = std::pow(1.0 + p.nav_growth, 0.25);
    quarterly_flows out;
    out.qcc = qcc;
    out.qdc.reserve(qcc.size());
    out.rvc.reserve(qcc.size());
    double rvc = 0.0;
    for (std::size_t j = 0; j < qcc.size(); ++j) {
        const double grown = rvc * growth;
        const double qdc = std::min(qdc_raw[j], grown + qcc[j]);
        rvc = grown + qcc[j] - qdc;
        out.qdc.push_back(qdc);
        out.rvc.push_back(rvc);
    }
    return out;
}

/// Converts a flow path into a provider-style record: cumulative percent
/// ratios, with dpi/rvpi quoted on called capital.
inline fund_record flows_to_record(const quarterly_flows& f, std::string fund_id,
                                   int vintage_year, double commitment) {
    fund_record rec;
    rec.fund_id = std::move(fund_id);
    rec.vintage_year = vintage_year;
    rec.commitment = commitment;
    double cc = 0.0, dc = 0.0;
    for (std::size_t j = 0; j < f.qcc.size(); ++j) {
        cc += f.qcc[j];
        dc += f.qdc[j];
        fund_quarter q;
        q.quarter_index = static_cast<int>(j);
        q.called_pct = 100.0 * cc;
        q.dpi_pct = cc > 0.0 ? 100.0 * (dc / cc) : 0.0;
        q.rvpi_pct = cc > 0.0 ? 100.0 * (f.rvc[j] / cc) : 0.0;
        rec.quarters.push_back(q);
    }
    return rec;
}

struct value_range {
    double lo = 0.0, hi = 0.0;

    [[nodiscard]] double draw(rng& r) const { return r.uniform(lo, hi); }
};

struct synth_config {
    int first_vintage = 2010;
    int last_vintage = 2013;
    int funds_per_vintage = 50;
    calendar_quarter cutoff = calendar_quarter::of(2020, 3);
    value_range rc_range{0.1, 0.5};
    value_range g_range{0.0, 0.25};
    value_range b_range{1.0, 4.0};
    double noise_sigma = 0.2;
    int truncate_max = 0; // randomly drop up to this many trailing quarters
    std::string generator = "yale"; // "yale" or "buchner"
    buchner_params buchner;
    value_range commitment_range{2e7, 5e8};
    std::uint64_t seed = 0;
};

/// True generator parameters behind one synthetic fund (deterministic
/// generator only; the stochastic generator has no per-fund triple).
struct fund_truth {
    std::string fund_id;
    double rc = 0.0, g = 0.0, b = 0.0;
};

struct synth_result {
    std::vector<fund_record> records;
    std::vector<fund_truth> truths;
};

/// Generates a panel of synthetic funds. Every fund runs from its vintage's
/// Q1 to the common reporting cutoff, so series length varies by vintage;
/// each fund draws from its own stream keyed by fund id, making the panel
/// insensitive to generation order.
inline synth_result generate_dataset(const synth_config& cfg) {
    if (cfg.last_vintage < cfg.first_vintage)
        throw std::runtime_error("generate_dataset: last_vintage before first_vintage");
    if (cfg.funds_per_vintage < 1)
        throw std::runtime_error("generate_dataset: funds_per_vintage must be >= 1");
    if (cfg.generator != "yale" && cfg.generator != "buchner")
        throw std::runtime_error("generate_dataset: unknown generator '" + cfg.generator + "'");

    synth_result out;
    int serial = 0;
    for (int vintage = cfg.first_vintage; vintage <= cfg.last_vintage; ++vintage) {
        const int horizon = cfg.cutoff.index - vintage * 4 + 1;
        if (horizon < 1)
            throw std::runtime_error("generate_dataset: vintage " + std::to_string(vintage) +
                                     " starts after the cutoff " + cfg.cutoff.label());
        for (int k = 0; k < cfg.funds_per_vintage; ++k) {
            ++serial;
            char buf[16];
            std::snprintf(buf, sizeof buf, "F%04d", serial);
            const std::string fund_id(buf);
            rng stream(derive_seed(cfg.seed, fund_id));

            const double commitment = std::exp(
                stream.uniform(std::log(cfg.commitment_range.lo),
                               std::log(cfg.commitment_range.hi)));

            int reported = horizon;
            if (cfg.truncate_max > 0) {
                const int cut = static_cast<int>(
                    stream.below(static_cast<std::uint64_t>(cfg.truncate_max) + 1));
                reported = std::max(2, horizon - cut);
            }

            quarterly_flows flows;
            if (cfg.generator == "yale") {
                yale_params p;
                p.rc = cfg.rc_range.draw(stream);
                p.g = cfg.g_range.draw(stream);
                p.b = cfg.b_range.draw(stream);
                out.truths.push_back({fund_id, p.rc, p.g, p.b});
                flows = gen_yale_fund(p, reported, cfg.noise_sigma, stream);
            } else {
                flows = gen_buchner_fund(cfg.buchner, reported, stream);
            }
            out.records.push_back(flows_to_record(flows, fund_id, vintage, commitment));
        }
    }
    return out;
}

/// Knocks out interior cells of each percent series independently with the
/// given probability. The first and last positions of every series survive,
/// matching what the imputation stage can reconstruct. Returns the modified
/// records plus a per-record, per-quarter removal mask (called, dpi, rvpi).
struct missing_injection {
    std::vector<fund_record> records;
    std::vector<std::vector<std::array<std::uint8_t, 3>>> removed;
};

inline missing_injection inject_missing(const std::vector<fund_record>& records, double rate,
                                        std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0)
        throw std::runtime_error("inject_missing: rate must lie in [0, 1]");
    missing_injection out;
    out.records = records;
    for (fund_record& rec : out.records) {
        rng stream(derive_seed(seed, "missing:" + rec.fund_id));
        std::vector<std::array<std::uint8_t, 3>> mask(rec.quarters.size(), {0, 0, 0});
        for (std::size_t i = 0; i < rec.quarters.size(); ++i) {
            const bool interior = i > 0 && i + 1 < rec.quarters.size();
            std::optional<double>* cells[3] = {&rec.quarters[i].called_pct,
                                               &rec.quarters[i].dpi_pct,
                                               &rec.quarters[i].rvpi_pct};
            for (int s = 0; s < 3; ++s) {
                const bool hit = stream.uniform() < rate;
                if (interior && hit) {
                    cells[s]->reset();
                    mask[i][static_cast<std::size_t>(s)] = 1;
                }
            }
        }
        out.removed.push_back(std::move(mask));
    }
    return out;
}

} // namespace pecf
