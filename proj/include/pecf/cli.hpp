#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pecf/fund_data.hpp"
#include "pecf/imputation.hpp"
#include "pecf/io.hpp"
#include "pecf/macro.hpp"
#include "pecf/nn/checkpoint.hpp"
#include "pecf/pipeline.hpp"
#include "pecf/synthetic.hpp"
#include "pecf/windowing.hpp"

/// Command line front end. Every subcommand reads files, runs one stage of
/// the pipeline, and writes its outputs plus a manifest into --out-dir, so a
/// shell script can chain stages and a re-run with equal inputs reproduces
/// every byte.
namespace pecf::cli {

/// Lets --config point at a JSON file instead of an INI file. Top level keys
/// map to global options, one nested object per subcommand.
class json_config : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object())
            throw CLI::ConfigError("config root must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

  private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void walk(const nlohmann::json& node, std::vector<std::string> parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : node.items()) {
            if (value.is_object()) {
                std::vector<std::string> deeper = parents;
                deeper.push_back(key);
                walk(value, std::move(deeper), items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const nlohmann::json& element : value) {
                    if (element.is_object() || element.is_array())
                        throw CLI::ConfigError("config option '" + key +
                                               "' holds a nested array or object");
                    item.inputs.push_back(scalar(element));
                }
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

namespace detail {

/// Collects what one subcommand read, chose, and wrote, then lands it next
/// to the outputs as <command>_manifest.json.
class stage {
  public:
    stage(std::string command, std::filesystem::path out_dir, std::uint64_t seed)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), seed_(seed) {
        std::filesystem::create_directories(out_dir_);
        manifest_["command"] = command_;
        manifest_["seed"] = seed_;
        manifest_["inputs"] = nlohmann::json::object();
        manifest_["options"] = nlohmann::json::object();
        manifest_["outputs"] = nlohmann::json::array();
    }

    void input(const std::string& name, const std::filesystem::path& path) {
        manifest_["inputs"][name] = path.string();
    }

    void option(const std::string& name, const nlohmann::json& value) {
        manifest_["options"][name] = value;
    }

    /// Registers an output file name and returns its full path.
    std::filesystem::path out(const std::string& name) {
        manifest_["outputs"].push_back(name);
        return out_dir_ / name;
    }

    [[nodiscard]] const std::filesystem::path& dir() const { return out_dir_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    void finish() {
        io::atomic_write(out_dir_ / (command_ + "_manifest.json"), manifest_.dump(2) + "\n");
    }

  private:
    std::string command_;
    std::filesystem::path out_dir_;
    std::uint64_t seed_ = 0;
    nlohmann::json manifest_;
};

/// "2010:2013" or a single year.
inline std::pair<int, int> parse_vintage_range(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
        const int year = static_cast<int>(io::parse_long(text, "vintage"));
        return {year, year};
    }
    const int first = static_cast<int>(io::parse_long(text.substr(0, colon), "vintage"));
    const int last = static_cast<int>(io::parse_long(text.substr(colon + 1), "vintage"));
    if (last < first)
        throw std::runtime_error("vintage range '" + text + "' runs backwards");
    return {first, last};
}

} // namespace detail

struct synth_options {
    std::string vintages = "2010:2013";
    int per_vintage = 50;
    std::string cutoff = "2020Q3";
    std::string generator = "yale";
    double noise_sigma = 0.2;
    int truncate_max = 0;
    double missing_rate = 0.0;
};

inline void run_synth(detail::stage& st, const synth_options& opt) {
    synth_config cfg;
    const auto [first, last] = detail::parse_vintage_range(opt.vintages);
    cfg.first_vintage = first;
    cfg.last_vintage = last;
    cfg.funds_per_vintage = opt.per_vintage;
    cfg.cutoff = calendar_quarter::parse(opt.cutoff);
    cfg.generator = opt.generator;
    cfg.noise_sigma = opt.noise_sigma;
    cfg.truncate_max = opt.truncate_max;
    cfg.seed = st.seed();
    st.option("vintages", opt.vintages);
    st.option("per_vintage", opt.per_vintage);
    st.option("cutoff", opt.cutoff);
    st.option("generator", opt.generator);
    st.option("noise_sigma", opt.noise_sigma);
    st.option("truncate_max", opt.truncate_max);
    st.option("missing_rate", opt.missing_rate);

    synth_result result = generate_dataset(cfg);
    if (opt.missing_rate > 0.0)
        result.records =
            inject_missing(result.records, opt.missing_rate, derive_seed(cfg.seed, "inject"))
                .records;

    io::write_fund_csv(st.out("funds.csv"), result.records);
    nlohmann::json truth;
    truth["generator"] = cfg.generator;
    truth["funds"] = nlohmann::json::array();
    for (const fund_truth& t : result.truths)
        truth["funds"].push_back(
            {{"fund_id", t.fund_id}, {"rc", t.rc}, {"g", t.g}, {"b", t.b}});
    io::atomic_write(st.out("truth.json"), truth.dump(2) + "\n");
    st.finish();
}

struct prepare_options {
    std::string funds;
    int w_in = 20;
    int w_out = 8;
    std::string features = "flows";
    std::string targets = "flows";
    bool with_macro = false;
    std::string macro_dir;
    std::string macro_freeze;
    double threshold = 0.30;
};

inline void run_prepare(detail::stage& st, const prepare_options& opt) {
    st.input("funds", opt.funds);
    st.option("w_in", opt.w_in);
    st.option("w_out", opt.w_out);
    st.option("features", opt.features);
    st.option("targets", opt.targets);
    st.option("threshold", opt.threshold);

    const std::vector<fund_record> records = io::read_fund_csv(opt.funds);
    const prepared_dataset prepared = prepare_dataset(records, opt.threshold);

    windowing_config wc;
    wc.w_in = opt.w_in;
    wc.w_out = opt.w_out;
    wc.features = parse_feature_space(opt.features);
    wc.targets = parse_target_space(opt.targets);
    wc.with_macro = opt.with_macro;
    if (!opt.macro_freeze.empty()) {
        wc.macro_freeze = calendar_quarter::parse(opt.macro_freeze);
        st.option("macro_freeze", opt.macro_freeze);
    }

    std::optional<macro_feature_table> macro;
    if (opt.with_macro) {
        if (opt.macro_dir.empty())
            throw std::runtime_error("--with-macro needs --macro-dir");
        st.input("macro_dir", opt.macro_dir);
        macro = build_feature_table(io::read_macro_dir(opt.macro_dir));
    }

    const window_dataset ds =
        make_windows(prepared.funds, wc, macro ? &*macro : nullptr);

    io::write_fund_csv(st.out("prepared.csv"), io::series_to_records(prepared.funds));
    io::atomic_write(st.out("imputation.jsonl"),
                     io::imputation_reports_to_jsonl(prepared.reports));
    io::write_window_file(st.out("windows.bin"), ds);
    st.finish();
}

inline void run_calibrate(detail::stage& st, const std::string& windows) {
    st.input("windows", windows);
    window_dataset ds = io::read_window_file(windows);
    make_indirect_labels(ds);
    io::write_labels_csv(st.out("labels.csv"), ds);
    st.finish();
}

struct train_options {
    std::string windows;
    std::string labels;
    std::string arch;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double train_fraction = 0.8;
};

inline void run_train(detail::stage& st, pipeline_mode expected, const train_options& opt) {
    st.input("windows", opt.windows);
    st.option("arch", opt.arch);
    st.option("epochs", opt.epochs);
    st.option("batch_size", opt.batch_size);
    st.option("learning_rate", opt.learning_rate);
    st.option("train_fraction", opt.train_fraction);

    window_dataset ds = io::read_window_file(opt.windows);
    architecture arch = build_architecture(opt.arch);
    if (arch.mode != expected)
        throw std::runtime_error("architecture '" + opt.arch + "' is a " +
                                 to_string(arch.mode) + " model, not " + to_string(expected));
    if (!opt.labels.empty()) {
        st.input("labels", opt.labels);
        io::read_labels_csv(opt.labels, ds);
    }

    experiment_config cfg;
    cfg.architecture = opt.arch;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch_size;
    cfg.learning_rate = opt.learning_rate;
    cfg.train_fraction = opt.train_fraction;
    cfg.seed = st.seed();

    std::optional<nn::network> net;
    const experiment_report rep = run_windowed_experiment(ds, arch, cfg, &net);

    io::atomic_write(st.out("report.json"), report_to_json(rep).dump(2) + "\n");
    io::atomic_write(st.out("checkpoint.json"),
                     nn::checkpoint_to_json(*net).dump(2) + "\n");
    for (const std::filesystem::path& p : emit_curves(rep, st.dir() / "curves"))
        st.out("curves/" + p.filename().string());
    st.finish();
}

struct predict_options {
    std::string checkpoint;
    std::string windows;
};

inline void run_predict(detail::stage& st, const predict_options& opt) {
    st.input("checkpoint", opt.checkpoint);
    st.input("windows", opt.windows);

    nn::network net =
        nn::checkpoint_from_json(nlohmann::json::parse(io::read_file(opt.checkpoint)));
    window_dataset ds = io::read_window_file(opt.windows);
    const pipeline_mode mode =
        nn::emits_sequence(net.spec()) ? pipeline_mode::direct : pipeline_mode::indirect;
    const target_space targets = target_space_of(ds.target_names);
    if (mode == pipeline_mode::indirect && targets != target_space::flows)
        throw std::runtime_error(
            "a parameter-head checkpoint forecasts flows; re-window with flow targets");

    std::vector<const rolling_window*> all;
    for (const rolling_window& w : ds.windows) all.push_back(&w);
    const scored_forecasts sf = forecast_windows(net, ds, all, mode, targets);

    nlohmann::json out;
    out["mode"] = to_string(mode);
    out["w_in"] = ds.w_in;
    out["w_out"] = ds.w_out;
    out["forecasts"] = forecasts_to_json(sf.entries);
    io::atomic_write(st.out("forecasts.json"), out.dump(2) + "\n");
    for (const std::filesystem::path& p : emit_curves(sf.entries, st.dir() / "curves"))
        st.out("curves/" + p.filename().string());
    st.finish();
}

struct evaluate_options {
    std::string checkpoint;
    std::string windows;
    std::string labels;
};

inline void run_evaluate(detail::stage& st, const evaluate_options& opt) {
    st.input("checkpoint", opt.checkpoint);
    st.input("windows", opt.windows);

    nn::network net =
        nn::checkpoint_from_json(nlohmann::json::parse(io::read_file(opt.checkpoint)));
    window_dataset ds = io::read_window_file(opt.windows);
    const pipeline_mode mode =
        nn::emits_sequence(net.spec()) ? pipeline_mode::direct : pipeline_mode::indirect;
    const target_space targets = target_space_of(ds.target_names);
    if (!opt.labels.empty()) {
        st.input("labels", opt.labels);
        io::read_labels_csv(opt.labels, ds);
    }

    std::vector<nn::training_sample> samples;
    std::vector<const rolling_window*> all;
    for (const rolling_window& w : ds.windows) {
        samples.push_back(window_to_sample(w, mode));
        all.push_back(&w);
    }
    const scored_forecasts sf = forecast_windows(net, ds, all, mode, targets);

    nlohmann::json out;
    out["mse"] = uniform_mse(net, samples);
    out["r2"] = r2_per_target(net, samples);
    out["weighted_mse"] = sf.weighted_mse;
    out["benchmark_weighted_mse"] = sf.benchmark_weighted_mse;
    out["per_fund"] = per_fund_to_json(sf.per_fund);
    io::atomic_write(st.out("metrics.json"), out.dump(2) + "\n");
    st.finish();
}

struct stress_options {
    std::string funds;
    std::string macro_dir;
    std::string scenario;
    std::string arch = "direct_m5";
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double train_fraction = 0.8;
    double threshold = 0.30;
    std::string macro_freeze;
};

inline void run_stress(detail::stage& st, const stress_options& opt) {
    st.input("funds", opt.funds);
    st.input("macro_dir", opt.macro_dir);
    st.input("scenario", opt.scenario);
    st.option("arch", opt.arch);
    st.option("epochs", opt.epochs);
    st.option("batch_size", opt.batch_size);
    st.option("learning_rate", opt.learning_rate);
    st.option("train_fraction", opt.train_fraction);
    st.option("threshold", opt.threshold);

    const std::vector<fund_record> records = io::read_fund_csv(opt.funds);
    const prepared_dataset prepared = prepare_dataset(records, opt.threshold);
    const std::vector<macro_series> raw = io::read_macro_dir(opt.macro_dir);
    const stress_scenario scenario = io::read_scenario_json(opt.scenario);
    const macro_feature_table baseline = build_feature_table(raw);
    const macro_feature_table stressed = build_feature_table(apply_stress(raw, scenario));

    experiment_config cfg;
    cfg.architecture = opt.arch;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch_size;
    cfg.learning_rate = opt.learning_rate;
    cfg.train_fraction = opt.train_fraction;
    cfg.seed = st.seed();
    if (!opt.macro_freeze.empty()) {
        cfg.macro_freeze = calendar_quarter::parse(opt.macro_freeze);
        st.option("macro_freeze", opt.macro_freeze);
    }

    const experiment_report base_rep = run_experiment(prepared.funds, cfg, &baseline);
    const experiment_report stress_rep = run_experiment(prepared.funds, cfg, &stressed);

    io::atomic_write(st.out("baseline_report.json"), report_to_json(base_rep).dump(2) + "\n");
    io::atomic_write(st.out("stressed_report.json"),
                     report_to_json(stress_rep).dump(2) + "\n");

    nlohmann::json shocks = nlohmann::json::array();
    for (const macro_shock& s : scenario.shocks)
        shocks.push_back({{"series", s.series},
                          {"factor", s.factor},
                          {"start_quarter", s.start.label()},
                          {"duration", s.duration}});
    nlohmann::json summary;
    summary["scenario"] = {{"name", scenario.name}, {"shocks", std::move(shocks)}};
    summary["baseline"] = {{"test_weighted_mse", base_rep.test_weighted_mse},
                           {"benchmark_weighted_mse", base_rep.benchmark_weighted_mse},
                           {"test_mse", base_rep.metrics.test_mse}};
    summary["stressed"] = {{"test_weighted_mse", stress_rep.test_weighted_mse},
                           {"benchmark_weighted_mse", stress_rep.benchmark_weighted_mse},
                           {"test_mse", stress_rep.metrics.test_mse}};
    io::atomic_write(st.out("stress_summary.json"), summary.dump(2) + "\n");
    st.finish();
}

/// Builds the full command tree and runs one invocation. Returns the process
/// exit code: 0 on success, 1 on a data or file error, 2 on bad arguments.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"private equity cash flow forecasting pipeline"};
    app.name("pecf");
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<json_config>());
    app.set_config("--config", "", "JSON file with defaults for any option");

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "root random seed every stage derives from");
    app.add_option("--out-dir", out_dir, "directory the stage writes into");

    synth_options synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic fund panel");
    synth_cmd->fallthrough();
    synth_cmd->add_option("--vintages", synth.vintages, "vintage year range, e.g. 2010:2013");
    synth_cmd->add_option("--per-vintage", synth.per_vintage, "funds per vintage year");
    synth_cmd->add_option("--cutoff", synth.cutoff, "last observed calendar quarter");
    synth_cmd->add_option("--generator", synth.generator, "cash flow generator: yale or buchner");
    synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "lognormal noise scale");
    synth_cmd->add_option("--truncate-max", synth.truncate_max,
                          "randomly drop up to this many trailing quarters per fund");
    synth_cmd->add_option("--missing-rate", synth.missing_rate,
                          "fraction of interior values to blank out");

    prepare_options prep;
    CLI::App* prep_cmd =
        app.add_subcommand("prepare", "clean a fund panel and cut rolling windows");
    prep_cmd->fallthrough();
    prep_cmd->add_option("--funds", prep.funds, "fund panel CSV")->required();
    prep_cmd->add_option("--w-in", prep.w_in, "lookback quarters per window");
    prep_cmd->add_option("--w-out", prep.w_out, "forecast quarters per window");
    prep_cmd->add_option("--features", prep.features, "feature space: flows or ratios");
    prep_cmd->add_option("--targets", prep.targets,
                         "target space: flows, cumulative, or ratios");
    prep_cmd->add_flag("--with-macro", prep.with_macro, "append macro features to lookbacks");
    prep_cmd->add_option("--macro-dir", prep.macro_dir, "directory of macro series CSVs");
    prep_cmd->add_option("--macro-freeze", prep.macro_freeze,
                         "hold macro features at this quarter, e.g. 2019Q4");
    prep_cmd->add_option("--threshold", prep.threshold,
                         "drop funds missing more than this fraction");

    std::string calib_windows;
    CLI::App* calib_cmd =
        app.add_subcommand("calibrate", "fit curve parameters to every window");
    calib_cmd->fallthrough();
    calib_cmd->add_option("--windows", calib_windows, "window file")->required();

    train_options train_direct;
    train_direct.arch = "direct_m3";
    CLI::App* td_cmd =
        app.add_subcommand("train-direct", "train a sequence model that outputs flows");
    td_cmd->fallthrough();
    td_cmd->add_option("--windows", train_direct.windows, "window file")->required();
    td_cmd->add_option("--arch", train_direct.arch, "direct architecture name");
    td_cmd->add_option("--epochs", train_direct.epochs, "training epochs");
    td_cmd->add_option("--batch-size", train_direct.batch_size, "windows per batch");
    td_cmd->add_option("--learning-rate", train_direct.learning_rate, "Adam step size");
    td_cmd->add_option("--train-fraction", train_direct.train_fraction,
                       "share of funds in the training split");

    train_options train_indirect;
    train_indirect.arch = "indirect_gru";
    CLI::App* ti_cmd = app.add_subcommand(
        "train-indirect", "train a model that predicts curve parameters");
    ti_cmd->fallthrough();
    ti_cmd->add_option("--windows", train_indirect.windows, "window file")->required();
    ti_cmd->add_option("--labels", train_indirect.labels,
                       "calibrated parameter labels CSV");
    ti_cmd->add_option("--arch", train_indirect.arch, "indirect architecture name");
    ti_cmd->add_option("--epochs", train_indirect.epochs, "training epochs");
    ti_cmd->add_option("--batch-size", train_indirect.batch_size, "windows per batch");
    ti_cmd->add_option("--learning-rate", train_indirect.learning_rate, "Adam step size");
    ti_cmd->add_option("--train-fraction", train_indirect.train_fraction,
                       "share of funds in the training split");

    predict_options predict;
    CLI::App* pred_cmd =
        app.add_subcommand("predict", "forecast every window with a saved model");
    pred_cmd->fallthrough();
    pred_cmd->add_option("--checkpoint", predict.checkpoint, "saved model JSON")->required();
    pred_cmd->add_option("--windows", predict.windows, "window file")->required();

    evaluate_options evaluate;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "score a saved model on a window file");
    eval_cmd->fallthrough();
    eval_cmd->add_option("--checkpoint", evaluate.checkpoint, "saved model JSON")->required();
    eval_cmd->add_option("--windows", evaluate.windows, "window file")->required();
    eval_cmd->add_option("--labels", evaluate.labels, "calibrated parameter labels CSV");

    stress_options stress;
    CLI::App* stress_cmd = app.add_subcommand(
        "stress", "train twin models on baseline and shocked macro histories");
    stress_cmd->fallthrough();
    stress_cmd->add_option("--funds", stress.funds, "fund panel CSV")->required();
    stress_cmd->add_option("--macro-dir", stress.macro_dir, "directory of macro series CSVs")
        ->required();
    stress_cmd->add_option("--scenario", stress.scenario, "shock scenario JSON")->required();
    stress_cmd->add_option("--arch", stress.arch, "architecture name");
    stress_cmd->add_option("--epochs", stress.epochs, "training epochs");
    stress_cmd->add_option("--batch-size", stress.batch_size, "windows per batch");
    stress_cmd->add_option("--learning-rate", stress.learning_rate, "Adam step size");
    stress_cmd->add_option("--train-fraction", stress.train_fraction,
                           "share of funds in the training split");
    stress_cmd->add_option("--threshold", stress.threshold,
                           "drop funds missing more than this fraction");
    stress_cmd->add_option("--macro-freeze", stress.macro_freeze,
                           "hold macro features at this quarter");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success))
            return app.exit(e); // --help lands here and is not an error
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "run 'pecf --help' for usage\n";
        return 2;
    }

    try {
        const auto make_stage = [&](const std::string& command) {
            return detail::stage(command, out_dir, seed);
        };
        if (synth_cmd->parsed()) {
            detail::stage st = make_stage("synth");
            run_synth(st, synth);
        } else if (prep_cmd->parsed()) {
            detail::stage st = make_stage("prepare");
            run_prepare(st, prep);
        } else if (calib_cmd->parsed()) {
            detail::stage st = make_stage("calibrate");
            run_calibrate(st, calib_windows);
        } else if (td_cmd->parsed()) {
            detail::stage st = make_stage("train-direct");
            run_train(st, pipeline_mode::direct, train_direct);
        } else if (ti_cmd->parsed()) {
            detail::stage st = make_stage("train-indirect");
            run_train(st, pipeline_mode::indirect, train_indirect);
        } else if (pred_cmd->parsed()) {
            detail::stage st = make_stage("predict");
            run_predict(st, predict);
        } else if (eval_cmd->parsed()) {
            detail::stage st = make_stage("evaluate");
            run_evaluate(st, evaluate);
        } else if (stress_cmd->parsed()) {
            detail::stage st = make_stage("stress");
            run_stress(st, stress);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace pecf::cli
