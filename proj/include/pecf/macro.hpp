#pragma once

#include <array>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pecf {

/// Calendar quarters are held as a single index, year * 4 + quarter (0-based),
/// so arithmetic over quarter ranges is plain integer arithmetic.
struct calendar_quarter {
    int index = 0;

    static calendar_quarter of(int year, int q1_to_4) {
        if (q1_to_4 < 1 || q1_to_4 > 4)
            throw std::runtime_error("calendar_quarter: quarter must be 1..4");
        return {year * 4 + (q1_to_4 - 1)};
    }

    [[nodiscard]] int year() const { return index >= 0 ? index / 4 : (index - 3) / 4; }
    [[nodiscard]] int quarter() const { return index - year() * 4 + 1; }

    /// "2008Q3" style label.
    [[nodiscard]] std::string label() const {
        return std::to_string(year()) + "Q" + std::to_string(quarter());
    }

    static calendar_quarter parse(const std::string& s) {
        const std::size_t qpos = s.find('Q');
        if (qpos == std::string::npos || qpos == 0 || qpos + 1 >= s.size())
            throw std::runtime_error("invalid quarter label '" + s + "', expected e.g. 2008Q3");
        return of(std::stoi(s.substr(0, qpos)), std::stoi(s.substr(qpos + 1)));
    }

    auto operator<=>(const calendar_quarter&) const = default;
};

/// Minimal ISO-8601 date, enough to bucket observations into quarters.
struct iso_date {
    int year = 0, month = 0, day = 0;

    static iso_date parse(const std::string& s) {
        iso_date d;
        if (std::sscanf(s.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day) != 3 ||
            s.size() != 10 || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
            throw std::runtime_error("invalid ISO-8601 date '" + s + "'");
        return d;
    }

    [[nodiscard]] calendar_quarter quarter() const {
        return {year * 4 + (month - 1) / 3};
    }

    auto operator<=>(const iso_date&) const = default;
};

struct macro_observation {
    iso_date date;
    double value = 0.0;
};

/// One raw macro time series at its native frequency (daily, monthly or
/// quarterly); the resampler below does not care which, it only looks at
/// observation dates.
struct macro_series {
    std::string name;
    std::vector<macro_observation> obs;
};

/// The macro panel used as model features, in a fixed column order.
inline const std::array<std::string, 7>& macro_feature_names() {
    static const std::array<std::string, 7> names{
        "gdp", "unemployment", "cpi", "effective_yield",
        "gold", "russell2000", "sp500"};
    return names;
}

struct quarterly_series {
    std::string name;
    calendar_quarter first{0};
    std::vector<double> values; // one per quarter from `first`

    [[nodiscard]] calendar_quarter last() const {
        return {first.index + static_cast<int>(values.size()) - 1};
    }
};

/// Downsamples to quarterly frequency by taking the last observation inside
/// each calendar quarter. Every quarter between the first and last observed
/// ones must be covered; a hole is a data error, not something to bridge
/// silently. Quarterly input passes through unchanged, so the operation is
/// idempotent.
inline quarterly_series resample_quarterly(const macro_series& s) {
    if (s.obs.empty())
        throw std::runtime_error("macro series " + s.name + ": no observations");
    for (std::size_t i = 1; i < s.obs.size(); ++i)
        if (!(s.obs[i - 1].date < s.obs[i].date))
            throw std::runtime_error("macro series " + s.name +
                                     ": observation dates must be strictly increasing");

    std::map<int, double> by_quarter; // quarter index -> last value in quarter
    for (const macro_observation& o : s.obs) by_quarter[o.date.quarter().index] = o.value;

    quarterly_series out;
    out.name = s.name;
    out.first = {by_quarter.begin()->first};
    const int last = by_quarter.rbegin()->first;
    for (int q = out.first.index; q <= last; ++q) {
        const auto it = by_quarter.find(q);
        if (it == by_quarter.end())
            throw std::runtime_error("macro series " + s.name + ": no observations in " +
                                     calendar_quarter{q}.label());
        out.values.push_back(it->second);
    }
    return out;
}

/// Year-over-year relative change: out[t] = in[t] / in[t-4] - 1. The first
/// four quarters have no base and are dropped; a non-positive base is an
/// error because the ratio would be meaningless for the level series used
/// here (prices, indices, rates).
inline quarterly_series yoy_change(const quarterly_series& s) {
    if (s.values.size() < 5)
        throw std::runtime_error("macro series " + s.name +
                                 ": need more than 4 quarters for year-over-year changes");
    quarterly_series out;
    out.name = s.name;
    out.first = {s.first.index + 4};
    out.values.reserve(s.values.size() - 4);
    for (std::size_t t = 4; t < s.values.size(); ++t) {
        const double base = s.values[t - 4];
        if (!(base > 0.0))
            throw std::runtime_error("macro series " + s.name + ": non-positive base value in " +
                                     calendar_quarter{s.first.index + static_cast<int>(t) - 4}.label());
        out.values.push_back(s.values[t] / base - 1.0);
    }
    return out;
}

/// Quarterly feature matrix: for each covered calendar quarter, one row of
/// year-over-year changes across the seven macro series in fixed order.
struct macro_feature_table {
    calendar_quarter first{0};
    std::vector<std::array<double, 7>> rows;

    [[nodiscard]] bool covers(calendar_quarter q) const {
        const int k = q.index - first.index;
        return k >= 0 && k < static_cast<int>(rows.size());
    }

    [[nodiscard]] const std::array<double, 7>& at(calendar_quarter q) const {
        if (!covers(q))
            throw std::runtime_error("macro features do not cover " + q.label());
        return rows[static_cast<std::size_t>(q.index - first.index)];
    }

    /// Row for quarter q, with everything after `freeze` held at the freeze
    /// quarter's row. Used to forecast beyond the macro data edge without
    /// peeking at values a model would not have had.
    [[nodiscard]] const std::array<double, 7>& at_frozen(calendar_quarter q,
                                                        std::optional<calendar_quarter> freeze) const {
        if (freeze && q > *freeze) return at(*freeze);
        return at(q);
    }
};

/// Resamples and differences all seven series, then intersects their covered
/// ranges into a single aligned table.
inline macro_feature_table build_feature_table(const std::vector<macro_series>& series) {
    std::map<std::string, quarterly_series> yoy;
    for (const macro_series& s : series) yoy.emplace(s.name, yoy_change(resample_quarterly(s)));

    int lo = std::numeric_limits<int>::min();
    int hi = std::numeric_limits<int>::max();
    for (const std::string& name : macro_feature_names()) {
        const auto it = yoy.find(name);
        if (it == yoy.end())
            throw std::runtime_error("macro series '" + name + "' is missing");
        lo = std::max(lo, it->second.first.index);
        hi = std::min(hi, it->second.last().index);
    }
    if (lo > hi) throw std::runtime_error("macro series have no common covered quarters");

    macro_feature_table table;
    table.first = {lo};
    table.rows.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t col = 0; col < macro_feature_names().size(); ++col) {
        const quarterly_series& q = yoy.at(macro_feature_names()[col]);
        for (int idx = lo; idx <= hi; ++idx)
            table.rows[static_cast<std::size_t>(idx - lo)][col] =
                q.values[static_cast<std::size_t>(idx - q.first.index)];
    }
    return table;
}

/// A multiplicative shock to one series over a span of quarters.
struct macro_shock {
    std::string series;
    double factor = 1.0;
    calendar_quarter start{0};
    int duration = 1; // quarters
};

struct stress_scenario {
    std::string name;
    std::vector<macro_shock> shocks;
};

/// Applies a scenario to raw macro levels (before resampling and
/// differencing, so the shock propagates into the year-over-year features
/// the way a level move would). Pure: returns a modified copy.
inline std::vector<macro_series> apply_stress(const std::vector<macro_series>& series,
                                              const stress_scenario& scenario) {
    std::vector<macro_series> out = series;
    for (const macro_shock& shock : scenario.shocks) {
        if (shock.duration < 1)
            throw std::runtime_error("stress scenario '" + scenario.name +
                                     "': shock duration must be >= 1 quarter");
        macro_series* target = nullptr;
        for (macro_series& s : out)
            if (s.name == shock.series) target = &s;
        if (!target)
            throw std::runtime_error("stress scenario '" + scenario.name +
                                     "' shocks unknown series '" + shock.series + "'");
        const int lo = shock.start.index;
        const int hi = lo + shock.duration; // exclusive
        for (macro_observation& o : target->obs) {
            const int q = o.date.quarter().index;
            if (q >= lo && q < hi) o.value *= shock.factor;
        }
    }
    return out;
}

/// Maps a fund quarter to the calendar: fund quarter 0 is Q1 of the vintage
/// year, so fund quarter q of vintage v lands in calendar quarter v*4 + q.
inline calendar_quarter fund_quarter_to_calendar(int vintage_year, int fund_quarter) {
    return {vintage_year * 4 + fund_quarter};
}

} // namespace pecf
