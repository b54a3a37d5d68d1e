#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pecf/fund_data.hpp"
#include "pecf/imputation.hpp"
#include "pecf/macro.hpp"
#include "pecf/windowing.hpp"

namespace pecf::io {

/// Shortest decimal representation that parses back to the same double
/// (std::to_chars without a precision argument guarantees round-tripping).
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error(context + ": invalid number '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error(context + ": invalid integer '" + std::string(s) + "'");
    return v;
}

/// Writes a whole file through a temp-then-rename so readers never observe a
/// half-written artifact and interrupted runs leave the previous version
/// intact.
inline void atomic_write(const std::filesystem::path& path, std::string_view contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(cell);
    return out;
}

} // namespace detail

inline const std::string fund_csv_header =
    "fund_id,vintage_year,commitment,quarter_index,called_pct,dpi_pct,rvpi_pct";

/// Reads the quarterly fund table. Rows may arrive in any order; they are
/// grouped by fund (keeping first-appearance order) and sorted by quarter.
/// Empty ratio cells mean "not reported". Malformed rows name their line.
inline std::vector<fund_record> read_fund_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != fund_csv_header)
        throw std::runtime_error(path.string() + ": expected header '" + fund_csv_header + "'");

    std::vector<fund_record> records;
    std::map<std::string, std::size_t> index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 7)
            throw std::runtime_error(ctx + ": expected 7 columns, got " +
                                     std::to_string(cells.size()));

        const std::string& id = cells[0];
        if (id.empty()) throw std::runtime_error(ctx + ": empty fund_id");
        const int vintage = static_cast<int>(parse_long(cells[1], ctx));
        const double commitment = parse_double(cells[2], ctx);

        auto [it, inserted] = index.try_emplace(id, records.size());
        if (inserted) {
            fund_record rec;
            rec.fund_id = id;
            rec.vintage_year = vintage;
            rec.commitment = commitment;
            records.push_back(std::move(rec));
        } else {
            const fund_record& rec = records[it->second];
            if (rec.vintage_year != vintage || rec.commitment != commitment)
                throw std::runtime_error(ctx + ": fund " + id +
                                         " changes vintage_year or commitment mid-file");
        }

        fund_quarter q;
        q.quarter_index = static_cast<int>(parse_long(cells[3], ctx));
        if (!cells[4].empty()) q.called_pct = parse_double(cells[4], ctx);
        if (!cells[5].empty()) q.dpi_pct = parse_double(cells[5], ctx);
        if (!cells[6].empty()) q.rvpi_pct = parse_double(cells[6], ctx);
        records[it->second].quarters.push_back(q);
    }

    for (fund_record& rec : records) {
        std::sort(rec.quarters.begin(), rec.quarters.end(),
                  [](const fund_quarter& a, const fund_quarter& b) {
                      return a.quarter_index < b.quarter_index;
                  });
        for (std::size_t i = 1; i < rec.quarters.size(); ++i)
            if (rec.quarters[i].quarter_index == rec.quarters[i - 1].quarter_index)
                throw std::runtime_error(path.string() + ": fund " + rec.fund_id +
                                         " has duplicate quarter_index " +
                                         std::to_string(rec.quarters[i].quarter_index));
    }
    return records;
}

inline std::string fund_csv_to_string(const std::vector<fund_record>& records) {
    std::string out = fund_csv_header + "\n";
    for (const fund_record& rec : records) {
        const std::string prefix = rec.fund_id + "," + std::to_string(rec.vintage_year) + "," +
                                   format_double(rec.commitment) + ",";
        for (const fund_quarter& q : rec.quarters) {
            out += prefix + std::to_string(q.quarter_index) + ",";
            if (q.called_pct) out += format_double(*q.called_pct);
            out += ",";
            if (q.dpi_pct) out += format_double(*q.dpi_pct);
            out += ",";
            if (q.rvpi_pct) out += format_double(*q.rvpi_pct);
            out += "\n";
        }
    }
    return out;
}

inline void write_fund_csv(const std::filesystem::path& path,
                           const std::vector<fund_record>& records) {
    atomic_write(path, fund_csv_to_string(records));
}

/// Prepared series are written back in the same schema with every cell
/// populated (vintage padding included), so downstream stages and external
/// tools read one format.
inline std::vector<fund_record> series_to_records(const std::vector<fund_series>& funds) {
    std::vector<fund_record> out;
    for (const fund_series& f : funds) {
        fund_record rec;
        rec.fund_id = f.fund_id;
        rec.vintage_year = f.vintage_year;
        rec.commitment = f.commitment;
        for (std::size_t q = 0; q < f.length(); ++q) {
            fund_quarter fq;
            fq.quarter_index = static_cast<int>(q);
            fq.called_pct = 100.0 * f.called[q];
            fq.dpi_pct = 100.0 * f.dpi[q];
            fq.rvpi_pct = 100.0 * f.rvpi[q];
            rec.quarters.push_back(fq);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline const std::string labels_csv_header = "fund_id,window_index,rc,g,b,objective";

/// Calibrated per-window labels, keyed by (fund_id, window_index).
inline std::string labels_csv_to_string(const window_dataset& ds) {
    std::string out = labels_csv_header + "\n";
    for (const rolling_window& w : ds.windows) {
        if (!w.labels)
            throw std::runtime_error("labels_csv: window " + w.fund_id + "/" +
                                     std::to_string(w.window_index) + " has no labels");
        out += w.fund_id + "," + std::to_string(w.window_index) + "," +
               format_double(w.labels->rc) + "," + format_double(w.labels->g) + "," +
               format_double(w.labels->b) + "," + format_double(w.labels->objective) + "\n";
    }
    return out;
}

inline void write_labels_csv(const std::filesystem::path& path, const window_dataset& ds) {
    atomic_write(path, labels_csv_to_string(ds));
}

/// Loads labels and attaches them to matching windows; a window without a
/// label line, or a label for a missing window, is an error.
inline void read_labels_csv(const std::filesystem::path& path, window_dataset& ds) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != labels_csv_header)
        throw std::runtime_error(path.string() + ": expected header '" + labels_csv_header + "'");

    std::map<std::pair<std::string, int>, window_labels> by_key;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 6)
            throw std::runtime_error(ctx + ": expected 6 columns, got " +
                                     std::to_string(cells.size()));
        window_labels lab;
        lab.rc = parse_double(cells[2], ctx);
        lab.g = parse_double(cells[3], ctx);
        lab.b = parse_double(cells[4], ctx);
        lab.objective = parse_double(cells[5], ctx);
        const auto key = std::make_pair(cells[0], static_cast<int>(parse_long(cells[1], ctx)));
        if (!by_key.emplace(key, lab).second)
            throw std::runtime_error(ctx + ": duplicate label for " + cells[0] + "/" + cells[1]);
    }

    for (rolling_window& w : ds.windows) {
        const auto it = by_key.find({w.fund_id, w.window_index});
        if (it == by_key.end())
            throw std::runtime_error(path.string() + ": no label for window " + w.fund_id + "/" +
                                     std::to_string(w.window_index));
        w.labels = it->second;
        by_key.erase(it);
    }
    if (!by_key.empty())
        throw std::runtime_error(path.string() + ": label for unknown window " +
                                 by_key.begin()->first.first + "/" +
                                 std::to_string(by_key.begin()->first.second));
}

/// Reads one macro series CSV: "date,value" with ISO-8601 dates.
inline macro_series read_macro_csv(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,value")
        throw std::runtime_error(path.string() + ": expected header 'date,value'");
    macro_series s;
    s.name = std::move(name);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 2)
            throw std::runtime_error(ctx + ": expected 2 columns, got " +
                                     std::to_string(cells.size()));
        s.obs.push_back({iso_date::parse(cells[0]), parse_double(cells[1], ctx)});
    }
    return s;
}

inline std::string macro_csv_to_string(const macro_series& s) {
    std::string out = "date,value\n";
    char buf[16];
    for (const macro_observation& o : s.obs) {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", o.date.year, o.date.month, o.date.day);
        out += std::string(buf) + "," + format_double(o.value) + "\n";
    }
    return out;
}

/// Loads the seven macro series from a directory of <name>.csv files.
inline std::vector<macro_series> read_macro_dir(const std::filesystem::path& dir) {
    std::vector<macro_series> out;
    for (const std::string& name : macro_feature_names())
        out.push_back(read_macro_csv(dir / (name + ".csv"), name));
    return out;
}

inline stress_scenario read_scenario_json(const std::filesystem::path& path) {
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    stress_scenario sc;
    sc.name = j.at("name").get<std::string>();
    for (const nlohmann::json& sj : j.at("shocks")) {
        macro_shock shock;
        shock.series = sj.at("series").get<std::string>();
        shock.factor = sj.at("factor").get<double>();
        shock.start = calendar_quarter::parse(sj.at("start_quarter").get<std::string>());
        shock.duration = sj.at("duration").get<int>();
        sc.shocks.push_back(shock);
    }
    return sc;
}

/// One JSON object per fund, in dataset order.
inline std::string imputation_reports_to_jsonl(const std::vector<imputation_report>& reports) {
    std::string out;
    for (const imputation_report& r : reports) {
        const nlohmann::json j = {{"fund_id", r.fund_id},
                                  {"missing_fractions", r.missing_fractions},
                                  {"removed", r.removed},
                                  {"filled_indices", r.filled_indices}};
        out += j.dump() + "\n";
    }
    return out;
}

// --------------------------------------------------------------------------
// Window file: a JSON header (sizes, column names, fund table, per-window
// metadata) followed by the raw lookback/target/mask payload. Doubles live
// in the binary section, so the round trip is exact by construction.

inline constexpr char window_magic[8] = {'P', 'E', 'C', 'F', 'W', 'I', 'N', '1'};

inline std::string window_dataset_to_bytes(const window_dataset& ds) {
    nlohmann::json funds = nlohmann::json::array();
    for (const fund_info& f : ds.funds)
        funds.push_back({{"fund_id", f.fund_id},
                         {"vintage_year", f.vintage_year},
                         {"commitment", f.commitment}});

    const auto state_json = [](const window_state& s) {
        return nlohmann::json{
            {"quarter", s.quarter}, {"cc", s.cc}, {"dc", s.dc}, {"rvc", s.rvc}};
    };
    nlohmann::json windows = nlohmann::json::array();
    for (const rolling_window& w : ds.windows) {
        nlohmann::json wj = {{"fund_id", w.fund_id},
                             {"window_index", w.window_index},
                             {"weight", w.weight},
                             {"lookback_start", state_json(w.lookback_start)},
                             {"target_start", state_json(w.target_start)}};
        if (w.labels)
            wj["labels"] = {{"rc", w.labels->rc},
                            {"g", w.labels->g},
                            {"b", w.labels->b},
                            {"objective", w.labels->objective}};
        windows.push_back(std::move(wj));
    }
    const nlohmann::json header = {{"format", "pecf-windows"},
                                   {"version", 1},
                                   {"w_in", ds.w_in},
                                   {"w_out", ds.w_out},
                                   {"features", ds.feature_names},
                                   {"targets", ds.target_names},
                                   {"n_windows", ds.windows.size()},
                                   {"funds", funds},
                                   {"windows", windows}};
    const std::string header_str = header.dump();

    std::string out(window_magic, sizeof window_magic);
    const std::uint64_t header_len = header_str.size();
    out.append(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out += header_str;

    const auto append_doubles = [&out](const std::vector<double>& v) {
        out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    };
    for (const rolling_window& w : ds.windows) append_doubles(w.lookback.data);
    for (const rolling_window& w : ds.windows) append_doubles(w.target.data);
    for (const rolling_window& w : ds.windows)
        out.append(reinterpret_cast<const char*>(w.target_mask.data()), w.target_mask.size());
    return out;
}

inline void write_window_file(const std::filesystem::path& path, const window_dataset& ds) {
    atomic_write(path, window_dataset_to_bytes(ds));
}

inline window_dataset window_dataset_from_bytes(const std::string& bytes,
                                                const std::string& origin) {
    if (bytes.size() < sizeof window_magic + sizeof(std::uint64_t) ||
        std::memcmp(bytes.data(), window_magic, sizeof window_magic) != 0)
        throw std::runtime_error(origin + ": not a window file");
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + sizeof window_magic, sizeof header_len);
    const std::size_t header_off = sizeof window_magic + sizeof header_len;
    if (bytes.size() < header_off + header_len)
        throw std::runtime_error(origin + ": truncated window file header");
    const nlohmann::json header =
        nlohmann::json::parse(bytes.substr(header_off, header_len));

    window_dataset ds;
    ds.w_in = header.at("w_in").get<int>();
    ds.w_out = header.at("w_out").get<int>();
    ds.feature_names = header.at("features").get<std::vector<std::string>>();
    ds.target_names = header.at("targets").get<std::vector<std::string>>();
    for (const nlohmann::json& fj : header.at("funds"))
        ds.funds.push_back({fj.at("fund_id").get<std::string>(),
                            fj.at("vintage_year").get<int>(),
                            fj.at("commitment").get<double>()});

    const auto state_from = [](const nlohmann::json& j) {
        window_state s;
        s.quarter = j.at("quarter").get<int>();
        s.cc = j.at("cc").get<double>();
        s.dc = j.at("dc").get<double>();
        s.rvc = j.at("rvc").get<double>();
        return s;
    };

    const std::size_t n = header.at("n_windows").get<std::size_t>();
    const std::size_t lb_cells = static_cast<std::size_t>(ds.w_in) * ds.feature_names.size();
    const std::size_t tg_cells = static_cast<std::size_t>(ds.w_out) * ds.target_names.size();
    const std::size_t payload = n * (lb_cells + tg_cells) * sizeof(double) +
                                n * static_cast<std::size_t>(ds.w_out);
    if (bytes.size() != header_off + header_len + payload)
        throw std::runtime_error(origin + ": window file payload size mismatch");

    const char* p = bytes.data() + header_off + header_len;
    const nlohmann::json& windows = header.at("windows");
    if (windows.size() != n)
        throw std::runtime_error(origin + ": n_windows does not match window metadata");

    ds.windows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const nlohmann::json& wj = windows[i];
        rolling_window& w = ds.windows[i];
        w.fund_id = wj.at("fund_id").get<std::string>();
        w.window_index = wj.at("window_index").get<int>();
        w.weight = wj.at("weight").get<double>();
        w.lookback_start = state_from(wj.at("lookback_start"));
        w.target_start = state_from(wj.at("target_start"));
        if (wj.contains("labels")) {
            const nlohmann::json& lj = wj.at("labels");
            w.labels = window_labels{lj.at("rc").get<double>(), lj.at("g").get<double>(),
                                     lj.at("b").get<double>(), lj.at("objective").get<double>()};
        }
        w.lookback = tensor::matrix(static_cast<std::size_t>(ds.w_in), ds.feature_names.size());
        w.target = tensor::matrix(static_cast<std::size_t>(ds.w_out), ds.target_names.size());
    }
    for (rolling_window& w : ds.windows) {
        std::memcpy(w.lookback.data.data(), p, lb_cells * sizeof(double));
        p += lb_cells * sizeof(double);
    }
    for (rolling_window& w : ds.windows) {
        std::memcpy(w.target.data.data(), p, tg_cells * sizeof(double));
        p += tg_cells * sizeof(double);
    }
    for (rolling_window& w : ds.windows) {
        w.target_mask.resize(static_cast<std::size_t>(ds.w_out));
        std::memcpy(w.target_mask.data(), p, w.target_mask.size());
        p += w.target_mask.size();
    }
    return ds;
}

inline window_dataset read_window_file(const std::filesystem::path& path) {
    return window_dataset_from_bytes(read_file(path), path.string());
}

} // namespace pecf::io
