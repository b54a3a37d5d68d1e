#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pecf/fund_data.hpp"
#include "pecf/io.hpp"
#include "pecf/macro.hpp"
#include "pecf/metrics.hpp"
#include "pecf/nn/checkpoint.hpp"
#include "pecf/nn/network.hpp"
#include "pecf/nn/train.hpp"
#include "pecf/rng.hpp"
#include "pecf/tensor.hpp"
#include "pecf/windowing.hpp"
#include "pecf/yale.hpp"

namespace pecf {

enum class pipeline_mode { direct, indirect };

inline std::string to_string(pipeline_mode m) {
    return m == pipeline_mode::direct ? "direct" : "indirect";
}

inline pipeline_mode parse_pipeline_mode(const std::string& s) {
    if (s == "direct") return pipeline_mode::direct;
    if (s == "indirect") return pipeline_mode::indirect;
    throw std::runtime_error("unknown pipeline mode '" + s + "'");
}

/// One studied model, fully described: how to window the data and the
/// network that consumes those windows. The network seed is left 0 for the
/// experiment runner to fill.
struct architecture {
    std::string name;
    pipeline_mode mode = pipeline_mode::direct;
    windowing_config windows;
    nn::network_spec net;
};

namespace detail {

inline nn::network_spec seq_to_seq_net(std::size_t input_features, std::size_t repeat,
                                       std::size_t last_units, nn::activation head) {
    nn::network_spec s;
    s.input_features = input_features;
    s.layers = {
        {nn::layer_kind::gru, 32, nn::activation::relu, 1.0, false},
        {nn::layer_kind::repeat_expand, repeat, nn::activation::linear, 1.0, false},
        {nn::layer_kind::gru, 32, nn::activation::relu, 1.0, true},
        {nn::layer_kind::gru, last_units, nn::activation::sigmoid, 1.0, true},
        {nn::layer_kind::time_distributed_dense, 3, head, 1.0, false},
    };
    s.output_targets = 3;
    return s;
}

} // namespace detail

/// Returns one of the studied model setups by name. The direct family
/// shares an encoder/decoder trunk: a collapsing recurrent encoder, a
/// repeat to the forecast horizon, two recurrent decoder layers, and a
/// shared-weight dense head per forecast quarter.
inline architecture build_architecture(const std::string& name) {
    architecture a;
    a.name = name;
    if (name == "indirect_gru") {
        a.mode = pipeline_mode::indirect;
        a.windows = {20, 8, feature_space::flows, false, target_space::flows, std::nullopt};
        a.net.input_features = 3;
        a.net.layers = {
            {nn::layer_kind::gru, 100, nn::activation::relu, 1.0, true},
            {nn::layer_kind::gru, 75, nn::activation::relu, 1.0, true},
            {nn::layer_kind::gru, 100, nn::activation::relu, 1.0, false},
            {nn::layer_kind::dense, 3, nn::activation::sigmoid, 1.0, false},
        };
        a.net.output_targets = 3;
    } else if (name == "direct_m1") {
        a.mode = pipeline_mode::direct;
        a.windows = {36, 13, feature_space::ratios, false, target_space::ratios, std::nullopt};
        a.net = detail::seq_to_seq_net(3, 13, 16, nn::activation::linear);
    } else if (name == "direct_m2" || name == "direct_m3") {
        a.mode = pipeline_mode::direct;
        a.windows = {20, 8, feature_space::flows, false, target_space::flows, std::nullopt};
        a.net = detail::seq_to_seq_net(3, 8, 16, nn::activation::exponential);
    } else if (name == "direct_m4") {
        a.mode = pipeline_mode::direct;
        a.windows = {20, 8, feature_space::flows, false, target_space::cumulative, std::nullopt};
        a.net = detail::seq_to_seq_net(3, 8, 32, nn::activation::exponential);
    } else if (name == "direct_m5") {
        a.mode = pipeline_mode::direct;
        a.windows = {20, 8, feature_space::flows, true, target_space::flows, std::nullopt};
        a.net = detail::seq_to_seq_net(10, 8, 32, nn::activation::exponential);
    } else {
        throw std::runtime_error(
            "unknown architecture '" + name +
            "'; valid names: indirect_gru, direct_m1, direct_m2, direct_m3, direct_m4, "
            "direct_m5");
    }
    return a;
}

/// Changes the forecast horizon of an architecture, keeping any repeat
/// layer's count in step so the network still emits w_out rows.
inline void set_horizon(architecture& a, int w_in, int w_out) {
    if (w_in > 0) a.windows.w_in = w_in;
    if (w_out > 0) {
        a.windows.w_out = w_out;
        for (nn::layer_spec& l : a.net.layers)
            if (l.kind == nn::layer_kind::repeat_expand)
                l.units = static_cast<std::size_t>(w_out);
    }
}

/// Fits (rc, g, b) to each window's target quarters, starting from the
/// account state at the end of the lookback, and attaches the fit as the
/// window's regression labels.
inline void make_indirect_labels(window_dataset& ds, const yale_params& base = {}) {
    const std::vector<std::string> flows{"qcc", "qdc", "rvc"};
    if (ds.target_names != flows)
        throw std::runtime_error(
            "make_indirect_labels: windows must carry quarterly flow targets");
    for (rolling_window& w : ds.windows) {
        const std::size_t n = w.target.rows();
        std::vector<double> qcc(n), qdc(n), rvc(n);
        for (std::size_t j = 0; j < n; ++j) {
            qcc[j] = w.target(j, 0);
            qdc[j] = w.target(j, 1);
            rvc[j] = w.target(j, 2);
        }
        const quarter_state start{w.target_start.quarter, w.target_start.cc,
                                  w.target_start.rvc};
        const double rc = calibrate_rc(qcc, start, base);
        const gb_estimate gb = calibrate_gb(qdc, rvc, start, rc, base);
        w.labels = window_labels{rc, gb.g, gb.b, gb.objective};
    }
}

/// The lookback's quarterly flows, recovered from whichever feature space
/// the windows were built in. Ratio features are integrated to levels and
/// differenced against the state just before the lookback.
inline quarterly_flows lookback_flows(const window_dataset& ds, const rolling_window& w) {
    quarterly_flows f;
    const std::size_t n = w.lookback.rows();
    f.qcc.resize(n);
    f.qdc.resize(n);
    f.rvc.resize(n);
    if (ds.feature_names.at(0) == "qcc") {
        for (std::size_t j = 0; j < n; ++j) {
            f.qcc[j] = w.lookback(j, 0);
            f.qdc[j] = w.lookback(j, 1);
            f.rvc[j] = w.lookback(j, 2);
        }
        return f;
    }
    double prev_cc = w.lookback_start.cc;
    double prev_dc = w.lookback_start.dc;
    for (std::size_t j = 0; j < n; ++j) {
        const double called = w.lookback(j, 0);
        const double cc = called;
        const double dc = w.lookback(j, 1) * called;
        f.qcc[j] = cc - prev_cc;
        f.qdc[j] = dc - prev_dc;
        f.rvc[j] = w.lookback(j, 2) * called;
        prev_cc = cc;
        prev_dc = dc;
    }
    return f;
}

inline tensor steps_to_tensor(std::span<const quarter_step> steps) {
    tensor t = tensor::matrix(steps.size(), 3);
    for (std::size_t j = 0; j < steps.size(); ++j) {
        t(j, 0) = steps[j].qcc;
        t(j, 1) = steps[j].qdc;
        t(j, 2) = steps[j].rvc;
    }
    return t;
}

/// Rewrites rows given in some target space as quarterly flows, so every
/// model is scored on the same quantities. Level predictions are
/// differenced against the account state at the target boundary.
inline tensor target_rows_to_flows(const tensor& rows, target_space space,
                                   const window_state& target_start) {
    if (rows.rank() != 2 || rows.cols() != 3)
        throw std::runtime_error("target_rows_to_flows: expected rows of 3 columns");
    tensor out = tensor::matrix(rows.rows(), 3);
    double prev_cc = target_start.cc;
    double prev_dc = target_start.dc;
    for (std::size_t j = 0; j < rows.rows(); ++j) {
        double cc = 0.0, dc = 0.0, rvc = 0.0;
        switch (space) {
            case target_space::flows:
                out(j, 0) = rows(j, 0);
                out(j, 1) = rows(j, 1);
                out(j, 2) = rows(j, 2);
                continue;
            case target_space::cumulative:
                cc = rows(j, 0);
                dc = rows(j, 1);
                rvc = rows(j, 2);
                break;
            case target_space::ratios:
                cc = rows(j, 0);
                dc = rows(j, 1) * rows(j, 0);
                rvc = rows(j, 2) * rows(j, 0);
                break;
        }
        out(j, 0) = cc - prev_cc;
        out(j, 1) = dc - prev_dc;
        out(j, 2) = rvc;
        prev_cc = cc;
        prev_dc = dc;
    }
    return out;
}

/// Benchmark forecast for one window: deterministic-model parameters are
/// fitted to the lookback quarters only (fitting on the targets would leak
/// the answer), then rolled forward from the target boundary state.
inline std::vector<quarter_step> benchmark_forecast(const window_dataset& ds,
                                                    const rolling_window& w,
                                                    const yale_params& base = {}) {
    const quarterly_flows lb = lookback_flows(ds, w);
    const quarter_state lb_start{w.lookback_start.quarter, w.lookback_start.cc,
                                 w.lookback_start.rvc};
    const double rc = calibrate_rc(lb.qcc, lb_start, base);
    const gb_estimate gb = calibrate_gb(lb.qdc, lb.rvc, lb_start, rc, base);
    yale_params p = base;
    p.rc = rc;
    p.g = gb.g;
    p.b = gb.b;
    const quarter_state start{w.target_start.quarter, w.target_start.cc, w.target_start.rvc};
    return simulate_quarterly(p, ds.w_out, start);
}

/// Forecast through the fitted-parameter route: the network reads the
/// lookback and emits sigmoid outputs (rc, g, b/5); the bow factor is
/// scaled back to its [0, 5] range and the deterministic recursion is
/// rolled forward from the end-of-lookback state.
inline std::vector<quarter_step> indirect_forecast(nn::network& net, const rolling_window& w,
                                                   int w_out, const yale_params& base = {}) {
    const tensor out = net.forward(w.lookback);
    if (out.rows() != 1 || out.cols() != 3)
        throw std::runtime_error("indirect_forecast: network must emit one (rc, g, b) row");
    if (!(std::isfinite(w.target_start.cc) && std::isfinite(w.target_start.rvc)) ||
        w.target_start.cc < 0.0 || w.target_start.rvc < 0.0 || w.target_start.quarter < 0)
        throw std::runtime_error("indirect_forecast: invalid start state for window " +
                                 w.fund_id + "/" + std::to_string(w.window_index));
    yale_params p = base;
    p.rc = out(0, 0);
    p.g = out(0, 1);
    p.b = 5.0 * out(0, 2);
    const quarter_state start{w.target_start.quarter, w.target_start.cc, w.target_start.rvc};
    return simulate_quarterly(p, w_out, start);
}

/// Forecast through the sequence-to-sequence route: the network output is
/// the prediction, in the architecture's native target space.
inline tensor direct_forecast(nn::network& net, const rolling_window& w) {
    return net.forward(w.lookback);
}

/// Turns one window into a training sample. Direct models regress the
/// target rows under the padding mask; the fitted-parameter route regresses
/// a single (rc, g, b/5) row so all three targets share the [0, 1] scale.
inline nn::training_sample window_to_sample(const rolling_window& w, pipeline_mode mode) {
    nn::training_sample s;
    s.input = w.lookback;
    s.weight = w.weight;
    if (mode == pipeline_mode::direct) {
        s.target = w.target;
        s.row_mask = w.target_mask;
    } else {
        if (!w.labels)
            throw std::runtime_error("window " + w.fund_id + "/" +
                                     std::to_string(w.window_index) +
                                     " has no labels; fit them before training");
        s.target = tensor::row({w.labels->rc, w.labels->g, w.labels->b / 5.0});
        s.row_mask = {1};
    }
    return s;
}

struct experiment_config {
    std::string architecture = "direct_m3";
    int w_in = 0;  // 0 keeps the architecture default
    int w_out = 0; // 0 keeps the architecture default
    double train_fraction = 0.8;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    yale_params benchmark;
    std::optional<calendar_quarter> macro_freeze;
};

/// One forecast window of one held-out fund, with every curve expressed as
/// quarterly flows so the three lines are directly comparable.
struct forecast_entry {
    std::string fund_id;
    int window_index = 0;
    int first_target_quarter = 0;
    tensor predicted;
    tensor actual;
    tensor benchmark;
    std::vector<std::uint8_t> mask;
};

struct experiment_report {
    experiment_config config;
    std::string mode;
    int w_in = 0, w_out = 0;
    std::vector<std::string> feature_names, target_names;
    std::vector<double> loss_history;
    std::vector<double> validation_loss_history;
    metrics_report metrics;
    double test_weighted_mse = 0.0;
    double benchmark_weighted_mse = 0.0;
    std::vector<std::string> train_funds, test_funds;
    std::vector<forecast_entry> forecasts;
};

/// Uniform-weight mean squared error in the model's own target space, the
/// number a plain evaluation of the sample set reports.
inline double uniform_mse(nn::network& net, const std::vector<nn::training_sample>& samples) {
    std::vector<tensor> preds, targets;
    std::vector<double> weights;
    std::vector<std::vector<std::uint8_t>> masks;
    for (const nn::training_sample& s : samples) {
        preds.push_back(net.forward(s.input));
        targets.push_back(s.target);
        weights.push_back(1.0);
        masks.push_back(s.row_mask);
    }
    return nn::weighted_mse(preds, targets, weights, masks);
}

/// Model and benchmark forecasts for a set of windows, everything already
/// converted to flow space and scored per window and in the weighted
/// aggregate.
struct scored_forecasts {
    std::vector<forecast_entry> entries;
    std::vector<fund_window_metrics> per_fund;
    double weighted_mse = 0.0;
    double benchmark_weighted_mse = 0.0;
};

/// Forecasts each given window with the network and with the
/// lookback-calibrated benchmark, on bit-identical window slices and masks.
inline scored_forecasts forecast_windows(nn::network& net, const window_dataset& ds,
                                         std::span<const rolling_window* const> windows,
                                         pipeline_mode mode, target_space targets,
                                         const yale_params& base = {}) {
    scored_forecasts out;
    std::vector<tensor> preds, actuals, bench;
    std::vector<double> weights;
    std::vector<std::vector<std::uint8_t>> masks;
    for (const rolling_window* wp : windows) {
        const rolling_window& w = *wp;
        forecast_entry e;
        e.fund_id = w.fund_id;
        e.window_index = w.window_index;
        e.first_target_quarter = w.target_start.quarter;
        e.mask = w.target_mask;
        if (mode == pipeline_mode::direct) {
            const tensor native = direct_forecast(net, w);
            e.predicted = target_rows_to_flows(native, targets, w.target_start);
        } else {
            e.predicted = steps_to_tensor(indirect_forecast(net, w, ds.w_out, base));
        }
        e.actual = target_rows_to_flows(w.target, targets, w.target_start);
        e.benchmark = steps_to_tensor(benchmark_forecast(ds, w, base));

        bool any_scored = false;
        for (const std::uint8_t m : e.mask) any_scored = any_scored || m != 0;
        if (any_scored)
            out.per_fund.push_back({e.fund_id, e.window_index,
                                    mse(e.predicted, e.actual, e.mask),
                                    mse(e.benchmark, e.actual, e.mask)});

        preds.push_back(e.predicted);
        actuals.push_back(e.actual);
        bench.push_back(e.benchmark);
        weights.push_back(w.weight);
        masks.push_back(w.target_mask);
        out.entries.push_back(std::move(e));
    }
    out.weighted_mse = nn::weighted_mse(preds, actuals, weights, masks);
    out.benchmark_weighted_mse = nn::weighted_mse(bench, actuals, weights, masks);
    return out;
}

/// Per-target coefficient of determination over the scored cells of a
/// sample set, in the model's own target space.
inline std::array<double, 3> r2_per_target(nn::network& net,
                                           const std::vector<nn::training_sample>& samples) {
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<double> pred_col, act_col;
        for (const nn::training_sample& s : samples) {
            const tensor p = net.forward(s.input);
            for (std::size_t r = 0; r < p.rows(); ++r) {
                if (!s.row_scored(r)) continue;
                pred_col.push_back(p(r, c));
                act_col.push_back(s.target(r, c));
            }
        }
        out[c] = r_squared(pred_col, act_col);
    }
    return out;
}

/// Trains and evaluates on an already-windowed dataset. The architecture's
/// window sizes are snapped to the dataset's; its mode decides whether the
/// dataset must carry labels. Every random choice derives from the config
/// seed, so equal inputs give equal reports.
inline experiment_report run_windowed_experiment(const window_dataset& ds, architecture arch,
                                                 const experiment_config& cfg,
                                                 std::optional<nn::network>* trained_out = nullptr) {
    set_horizon(arch, ds.w_in, ds.w_out);
    if (ds.feature_names.size() != arch.net.input_features)
        throw std::runtime_error("architecture " + arch.name + " expects " +
                                 std::to_string(arch.net.input_features) +
                                 " input features but the windows carry " +
                                 std::to_string(ds.feature_names.size()));
    if (ds.target_names != target_space_names(arch.windows.targets))
        throw std::runtime_error("architecture " + arch.name + " needs " +
                                 to_string(arch.windows.targets) +
                                 " targets but the windows were built with different ones");

    const fund_split split =
        split_by_fund(ds.funds, {cfg.train_fraction, derive_seed(cfg.seed, "split")});

    std::vector<nn::training_sample> train_samples, test_samples;
    std::vector<const rolling_window*> test_windows;
    for (const rolling_window& w : ds.windows) {
        nn::training_sample s = window_to_sample(w, arch.mode);
        if (split.is_train(w.fund_id)) {
            train_samples.push_back(std::move(s));
        } else {
            test_samples.push_back(std::move(s));
            test_windows.push_back(&w);
        }
    }
    if (train_samples.empty() || test_samples.empty())
        throw std::runtime_error("run_experiment: empty train or test side after the split");

    arch.net.seed = derive_seed(cfg.seed, "init");
    nn::network net(arch.net);

    nn::train_config tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = derive_seed(cfg.seed, "train");
    const nn::train_result tr = nn::train(net, train_samples, tc, &test_samples);

    experiment_report rep;
    rep.config = cfg;
    rep.mode = to_string(arch.mode);
    rep.w_in = ds.w_in;
    rep.w_out = ds.w_out;
    rep.feature_names = ds.feature_names;
    rep.target_names = ds.target_names;
    rep.loss_history = tr.train_loss;
    rep.validation_loss_history = tr.validation_loss;
    rep.train_funds = split.train_ids;
    rep.test_funds = split.test_ids;

    rep.metrics.train_mse = uniform_mse(net, train_samples);
    rep.metrics.test_mse = uniform_mse(net, test_samples);
    rep.metrics.r2_per_target = r2_per_target(net, test_samples);

    const target_space scoring_space =
        arch.mode == pipeline_mode::direct ? arch.windows.targets : target_space::flows;
    scored_forecasts sf =
        forecast_windows(net, ds, test_windows, arch.mode, scoring_space, cfg.benchmark);
    rep.metrics.per_fund = std::move(sf.per_fund);
    rep.test_weighted_mse = sf.weighted_mse;
    rep.benchmark_weighted_mse = sf.benchmark_weighted_mse;
    rep.forecasts = std::move(sf.entries);
    if (trained_out) trained_out->emplace(std::move(net));
    return rep;
}

/// Runs one full experiment from prepared fund series: window the funds,
/// fit labels if the mode needs them, then train and evaluate.
inline experiment_report run_experiment(const std::vector<fund_series>& funds,
                                        const experiment_config& cfg,
                                        const macro_feature_table* macro = nullptr,
                                        std::optional<nn::network>* trained_out = nullptr) {
    architecture arch = build_architecture(cfg.architecture);
    set_horizon(arch, cfg.w_in, cfg.w_out);
    arch.windows.macro_freeze = cfg.macro_freeze;

    window_dataset ds = make_windows(funds, arch.windows, macro);
    if (arch.mode == pipeline_mode::indirect) make_indirect_labels(ds, cfg.benchmark);
    return run_windowed_experiment(ds, arch, cfg, trained_out);
}

namespace detail {

inline nlohmann::json tensor_rows_to_json(const tensor& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline tensor tensor_rows_from_json(const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty())
        throw std::runtime_error("report: expected a non-empty array of rows");
    tensor t = tensor::matrix(rows.size(), rows.at(0).size());
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c)
            t(r, c) = rows.at(r).at(c).get<double>();
    return t;
}

} // namespace detail

inline nlohmann::json per_fund_to_json(std::span<const fund_window_metrics> rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const fund_window_metrics& m : rows)
        out.push_back({{"fund_id", m.fund_id},
                       {"window_index", m.window_index},
                       {"mse_model", m.mse_model},
                       {"mse_benchmark", m.mse_benchmark}});
    return out;
}

inline nlohmann::json forecasts_to_json(std::span<const forecast_entry> forecasts) {
    nlohmann::json out = nlohmann::json::array();
    for (const forecast_entry& e : forecasts)
        out.push_back({{"fund_id", e.fund_id},
                       {"window_index", e.window_index},
                       {"first_target_quarter", e.first_target_quarter},
                       {"predicted", detail::tensor_rows_to_json(e.predicted)},
                       {"actual", detail::tensor_rows_to_json(e.actual)},
                       {"benchmark", detail::tensor_rows_to_json(e.benchmark)},
                       {"mask", e.mask}});
    return out;
}

inline nlohmann::json report_to_json(const experiment_report& rep) {
    nlohmann::json j;
    j["config"] = {
        {"architecture", rep.config.architecture},
        {"mode", rep.mode},
        {"w_in", rep.w_in},
        {"w_out", rep.w_out},
        {"feature_names", rep.feature_names},
        {"target_names", rep.target_names},
        {"train_fraction", rep.config.train_fraction},
        {"epochs", rep.config.epochs},
        {"batch_size", rep.config.batch_size},
        {"learning_rate", rep.config.learning_rate},
        {"seed", rep.config.seed},
        {"benchmark",
         {{"rc", rep.config.benchmark.rc},
          {"g", rep.config.benchmark.g},
          {"b", rep.config.benchmark.b},
          {"l", rep.config.benchmark.l},
          {"y", rep.config.benchmark.y}}},
    };
    j["loss_history"] = rep.loss_history;
    j["validation_loss_history"] = rep.validation_loss_history;
    j["metrics"] = {
        {"train_mse", rep.metrics.train_mse},
        {"test_mse", rep.metrics.test_mse},
        {"r2", rep.metrics.r2_per_target},
        {"test_weighted_mse", rep.test_weighted_mse},
        {"benchmark_weighted_mse", rep.benchmark_weighted_mse},
        {"per_fund", per_fund_to_json(rep.metrics.per_fund)},
    };
    j["train_funds"] = rep.train_funds;
    j["test_funds"] = rep.test_funds;
    j["forecasts"] = forecasts_to_json(rep.forecasts);
    return j;
}

inline experiment_report report_from_json(const nlohmann::json& j) {
    experiment_report rep;
    const nlohmann::json& c = j.at("config");
    rep.config.architecture = c.at("architecture").get<std::string>();
    rep.mode = c.at("mode").get<std::string>();
    rep.w_in = c.at("w_in").get<int>();
    rep.w_out = c.at("w_out").get<int>();
    rep.feature_names = c.at("feature_names").get<std::vector<std::string>>();
    rep.target_names = c.at("target_names").get<std::vector<std::string>>();
    rep.config.train_fraction = c.at("train_fraction").get<double>();
    rep.config.epochs = c.at("epochs").get<std::size_t>();
    rep.config.batch_size = c.at("batch_size").get<std::size_t>();
    rep.config.learning_rate = c.at("learning_rate").get<double>();
    rep.config.seed = c.at("seed").get<std::uint64_t>();
    const nlohmann::json& b = c.at("benchmark");
    rep.config.benchmark.rc = b.at("rc").get<double>();
    rep.config.benchmark.g = b.at("g").get<double>();
    rep.config.benchmark.b = b.at("b").get<double>();
    rep.config.benchmark.l = b.at("l").get<double>();
    rep.config.benchmark.y = b.at("y").get<double>();
    rep.loss_history = j.at("loss_history").get<std::vector<double>>();
    rep.validation_loss_history =
        j.at("validation_loss_history").get<std::vector<double>>();
    const nlohmann::json& m = j.at("metrics");
    rep.metrics.train_mse = m.at("train_mse").get<double>();
    rep.metrics.test_mse = m.at("test_mse").get<double>();
    rep.metrics.r2_per_target = m.at("r2").get<std::array<double, 3>>();
    rep.test_weighted_mse = m.at("test_weighted_mse").get<double>();
    rep.benchmark_weighted_mse = m.at("benchmark_weighted_mse").get<double>();
    for (const nlohmann::json& pf : m.at("per_fund"))
        rep.metrics.per_fund.push_back({pf.at("fund_id").get<std::string>(),
                                        pf.at("window_index").get<int>(),
                                        pf.at("mse_model").get<double>(),
                                        pf.at("mse_benchmark").get<double>()});
    rep.train_funds = j.at("train_funds").get<std::vector<std::string>>();
    rep.test_funds = j.at("test_funds").get<std::vector<std::string>>();
    for (const nlohmann::json& f : j.at("forecasts")) {
        forecast_entry e;
        e.fund_id = f.at("fund_id").get<std::string>();
        e.window_index = f.at("window_index").get<int>();
        e.first_target_quarter = f.at("first_target_quarter").get<int>();
        e.predicted = detail::tensor_rows_from_json(f.at("predicted"));
        e.actual = detail::tensor_rows_from_json(f.at("actual"));
        e.benchmark = detail::tensor_rows_from_json(f.at("benchmark"));
        e.mask = f.at("mask").get<std::vector<std::uint8_t>>();
        rep.forecasts.push_back(std::move(e));
    }
    return rep;
}

/// Writes one plot-data CSV per forecast window, with the actual, model,
/// and benchmark curves side by side. Returns the files written.
inline std::vector<std::filesystem::path> emit_curves(std::span<const forecast_entry> forecasts,
                                                      const std::filesystem::path& dir) {
    if (forecasts.empty())
        throw std::runtime_error("emit_curves: no forecasts to write");
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const forecast_entry& e : forecasts) {
        std::string out =
            "quarter,actual_qcc,pred_qcc,bench_qcc,actual_qdc,pred_qdc,bench_qdc,"
            "actual_rvc,pred_rvc,bench_rvc\n";
        for (std::size_t r = 0; r < e.predicted.rows(); ++r) {
            out += std::to_string(e.first_target_quarter + static_cast<int>(r));
            for (std::size_t c = 0; c < 3; ++c) {
                out += ',';
                out += io::format_double(e.actual(r, c));
                out += ',';
                out += io::format_double(e.predicted(r, c));
                out += ',';
                out += io::format_double(e.benchmark(r, c));
            }
            out += '\n';
        }
        const std::filesystem::path path =
            dir / (e.fund_id + "_w" + std::to_string(e.window_index) + ".csv");
        io::atomic_write(path, out);
        written.push_back(path);
    }
    return written;
}

inline std::vector<std::filesystem::path> emit_curves(const experiment_report& rep,
                                                      const std::filesystem::path& dir) {
    if (rep.forecasts.empty())
        throw std::runtime_error("emit_curves: report has no forecasts");
    return emit_curves(std::span<const forecast_entry>(rep.forecasts), dir);
}

} // namespace pecf
