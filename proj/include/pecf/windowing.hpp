#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pecf/fund_data.hpp"
#include "pecf/macro.hpp"
#include "pecf/rng.hpp"
#include "pecf/tensor.hpp"

namespace pecf {

/// Lookback feature columns: quarterly flows or the raw ratio triple.
enum class feature_space { flows, ratios };

/// Target columns: quarterly flows, cumulative levels, or ratios.
enum class target_space { flows, cumulative, ratios };

inline std::vector<std::string> feature_space_names(feature_space f) {
    switch (f) {
        case feature_space::flows: return {"qcc", "qdc", "rvc"};
        case feature_space::ratios: return {"called", "dpi", "rvpi"};
    }
    throw std::logic_error("feature_space_names: bad enum");
}

inline std::vector<std::string> target_space_names(target_space t) {
    switch (t) {
        case target_space::flows: return {"qcc", "qdc", "rvc"};
        case target_space::cumulative: return {"cc", "dc", "rvc"};
        case target_space::ratios: return {"called", "dpi", "rvpi"};
    }
    throw std::logic_error("target_space_names: bad enum");
}

inline std::string to_string(feature_space f) {
    return f == feature_space::flows ? "flows" : "ratios";
}

inline feature_space parse_feature_space(const std::string& s) {
    if (s == "flows") return feature_space::flows;
    if (s == "ratios") return feature_space::ratios;
    throw std::runtime_error("unknown feature space '" + s + "'; use flows or ratios");
}

inline std::string to_string(target_space t) {
    switch (t) {
        case target_space::flows: return "flows";
        case target_space::cumulative: return "cumulative";
        case target_space::ratios: return "ratios";
    }
    throw std::logic_error("to_string: bad target_space enum");
}

inline target_space parse_target_space(const std::string& s) {
    if (s == "flows") return target_space::flows;
    if (s == "cumulative") return target_space::cumulative;
    if (s == "ratios") return target_space::ratios;
    throw std::runtime_error("unknown target space '" + s +
                             "'; use flows, cumulative, or ratios");
}

/// Recovers the target space from a stored column-name triple.
inline target_space target_space_of(const std::vector<std::string>& names) {
    for (const target_space t :
         {target_space::flows, target_space::cumulative, target_space::ratios})
        if (names == target_space_names(t)) return t;
    throw std::runtime_error("target_space_of: unrecognized target column names");
}

/// Cumulative account levels immediately before a given fund quarter. Lets a
/// window cut from mid-life be rolled forward (or have its flows integrated
/// back into levels) without the rest of the series.
struct window_state {
    int quarter = 0; // fund quarters elapsed before this point
    double cc = 0.0;
    double dc = 0.0;
    double rvc = 0.0;
};

/// Deterministic-model parameters fitted to a window's target quarters.
struct window_labels {
    double rc = 0.0;
    double g = 0.0;
    double b = 0.0;
    double objective = 0.0;
};

/// One sliding window: w_in quarters of features, w_out quarters of targets,
/// plus the account states at both boundaries and a per-target-quarter mask
/// (0 marks vintage padding, which must not be scored).
struct rolling_window {
    std::string fund_id;
    int window_index = 0; // offset of the first lookback quarter
    tensor lookback;      // w_in x n_features
    tensor target;        // w_out x n_targets
    double weight = 0.0;
    std::vector<std::uint8_t> target_mask;
    window_state lookback_start;
    window_state target_start;
    std::optional<window_labels> labels;
};

struct fund_info {
    std::string fund_id;
    int vintage_year = 0;
    double commitment = 0.0;
};

struct window_dataset {
    int w_in = 0, w_out = 0;
    std::vector<std::string> feature_names, target_names;
    std::vector<fund_info> funds;
    std::vector<rolling_window> windows;
};

struct windowing_config {
    int w_in = 20;
    int w_out = 8;
    feature_space features = feature_space::flows;
    bool with_macro = false;
    target_space targets = target_space::flows;
    std::optional<calendar_quarter> macro_freeze; // hold macro rows after this quarter
};

/// Gives each window weight 1/r, r being how many windows its fund owns, so
/// every fund contributes equally to a weighted loss no matter how long its
/// history is.
inline void assign_weights(window_dataset& ds) {
    std::map<std::string, int> counts;
    for (const rolling_window& w : ds.windows) ++counts[w.fund_id];
    for (rolling_window& w : ds.windows) w.weight = 1.0 / counts[w.fund_id];
}

/// Slides a (w_in + w_out)-quarter window over every fund, one start offset
/// at a time: a fund with t_k quarters yields t_k - w_in - w_out + 1 windows.
/// Feature and target rows are copies of the prepared series; when macro
/// features are requested, seven year-over-year columns are appended to each
/// lookback row by calendar quarter (fund quarter 0 = Q1 of the vintage year).
inline window_dataset make_windows(const std::vector<fund_series>& funds,
                                   const windowing_config& cfg,
                                   const macro_feature_table* macro = nullptr) {
    if (cfg.w_in < 1 || cfg.w_out < 1)
        throw std::runtime_error("make_windows: w_in and w_out must be >= 1");
    if (cfg.with_macro && !macro)
        throw std::runtime_error("make_windows: macro features requested but no table given");
    if (cfg.with_macro && cfg.features != feature_space::flows)
        throw std::runtime_error("make_windows: macro features combine with flow features only");

    const int w = cfg.w_in + cfg.w_out;
    window_dataset ds;
    ds.w_in = cfg.w_in;
    ds.w_out = cfg.w_out;
    ds.feature_names = feature_space_names(cfg.features);
    if (cfg.with_macro)
        for (const std::string& n : macro_feature_names()) ds.feature_names.push_back(n);
    ds.target_names = target_space_names(cfg.targets);

    std::set<std::string> seen;
    for (const fund_series& f : funds) {
        if (!seen.insert(f.fund_id).second)
            throw std::runtime_error("make_windows: duplicate fund_id " + f.fund_id);
        ds.funds.push_back({f.fund_id, f.vintage_year, f.commitment});

        const int n = static_cast<int>(f.length());
        if (n < w)
            throw std::runtime_error("vintage " + std::to_string(f.vintage_year) + " fund " +
                                     f.fund_id + ": series length " + std::to_string(n) +
                                     " is shorter than the window length " + std::to_string(w));

        const normalized_series cum = f.normalized();
        const quarterly_flows flows = to_quarterly_flows(cum);
        const std::size_t n_feat = ds.feature_names.size();

        const auto state_before = [&](int q) {
            window_state s;
            s.quarter = q;
            if (q > 0) {
                s.cc = cum.cc[static_cast<std::size_t>(q - 1)];
                s.dc = cum.dc[static_cast<std::size_t>(q - 1)];
                s.rvc = cum.rvc[static_cast<std::size_t>(q - 1)];
            }
            return s;
        };

        for (int i = 0; i + w <= n; ++i) {
            rolling_window rw;
            rw.fund_id = f.fund_id;
            rw.window_index = i;
            rw.lookback = tensor::matrix(static_cast<std::size_t>(cfg.w_in), n_feat);
            rw.target = tensor::matrix(static_cast<std::size_t>(cfg.w_out), 3);
            rw.lookback_start = state_before(i);
            rw.target_start = state_before(i + cfg.w_in);

            for (int j = 0; j < cfg.w_in; ++j) {
                const auto q = static_cast<std::size_t>(i + j);
                if (cfg.features == feature_space::flows) {
                    rw.lookback(j, 0) = flows.qcc[q];
                    rw.lookback(j, 1) = flows.qdc[q];
                    rw.lookback(j, 2) = flows.rvc[q];
                } else {
                    rw.lookback(j, 0) = f.called[q];
                    rw.lookback(j, 1) = f.dpi[q];
                    rw.lookback(j, 2) = f.rvpi[q];
                }
                if (cfg.with_macro) {
                    const calendar_quarter cal =
                        fund_quarter_to_calendar(f.vintage_year, static_cast<int>(q));
                    const auto& row = macro->at_frozen(cal, cfg.macro_freeze);
                    for (std::size_t c = 0; c < row.size(); ++c)
                        rw.lookback(j, 3 + c) = row[c];
                }
            }

            rw.target_mask.resize(static_cast<std::size_t>(cfg.w_out));
            for (int j = 0; j < cfg.w_out; ++j) {
                const auto q = static_cast<std::size_t>(i + cfg.w_in + j);
                switch (cfg.targets) {
                    case target_space::flows:
                        rw.target(j, 0) = flows.qcc[q];
                        rw.target(j, 1) = flows.qdc[q];
                        rw.target(j, 2) = flows.rvc[q];
                        break;
                    case target_space::cumulative:
                        rw.target(j, 0) = cum.cc[q];
                        rw.target(j, 1) = cum.dc[q];
                        rw.target(j, 2) = cum.rvc[q];
                        break;
                    case target_space::ratios:
                        rw.target(j, 0) = f.called[q];
                        rw.target(j, 1) = f.dpi[q];
                        rw.target(j, 2) = f.rvpi[q];
                        break;
                }
                rw.target_mask[static_cast<std::size_t>(j)] = f.padded(q) ? 0 : 1;
            }
            ds.windows.push_back(std::move(rw));
        }
    }
    assign_weights(ds);
    return ds;
}

struct split_config {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct fund_split {
    std::vector<std::string> train_ids, test_ids;

    [[nodiscard]] bool is_train(const std::string& id) const {
        return std::find(train_ids.begin(), train_ids.end(), id) != train_ids.end();
    }
};

/// Stratified train/test split at the fund level: within each vintage the
/// funds are sorted by id, shuffled with a vintage-specific stream derived
/// from the seed, and cut at floor(fraction * n) with at least one fund kept
/// on each side. A vintage with a single fund cannot be split.
inline fund_split split_by_fund(const std::vector<fund_info>& funds, const split_config& cfg) {
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw std::runtime_error("split_by_fund: train_fraction must lie in (0, 1)");
    std::map<int, std::vector<std::string>> by_vintage;
    for (const fund_info& f : funds) by_vintage[f.vintage_year].push_back(f.fund_id);

    fund_split out;
    for (auto& [vintage, ids] : by_vintage) {
        if (ids.size() < 2)
            throw std::runtime_error("vintage " + std::to_string(vintage) + " has " +
                                     std::to_string(ids.size()) +
                                     " fund(s); need at least 2 to split");
        std::sort(ids.begin(), ids.end());
        rng stream(derive_seed(cfg.seed, "split", static_cast<std::uint64_t>(vintage)));
        stream.shuffle(ids);
        const auto n = static_cast<std::size_t>(ids.size());
        std::size_t n_train = static_cast<std::size_t>(
            std::floor(cfg.train_fraction * static_cast<double>(n)));
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        for (std::size_t i = 0; i < n; ++i)
            (i < n_train ? out.train_ids : out.test_ids).push_back(ids[i]);
    }
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    return out;
}

} // namespace pecf
