#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pecf {

/// One reported quarter of a fund, as delivered by a data provider:
/// cumulative ratios in percent of commitment (called) or of called capital
/// (dpi, rvpi). Any cell may be absent.
struct fund_quarter {
    int quarter_index = 0;
    std::optional<double> called_pct;
    std::optional<double> dpi_pct;
    std::optional<double> rvpi_pct;
};

/// Raw quarterly history of a single fund. Gaps appear both as absent rows
/// (a quarter with no entry at all) and as rows with empty cells.
struct fund_record {
    std::string fund_id;
    int vintage_year = 0;
    double commitment = 0.0;
    std::vector<fund_quarter> quarters;

    /// Number of quarters spanned by the record: last reported index + 1.
    [[nodiscard]] int series_length() const {
        return quarters.empty() ? 0 : quarters.back().quarter_index + 1;
    }

    /// Structural checks. Throws on malformed records; appends non-fatal
    /// oddities (called capital above 120 % of commitment) to `warnings`
    /// when a sink is given.
    void validate(std::vector<std::string>* warnings = nullptr) const {
        if (fund_id.empty())
            throw std::runtime_error("fund record with empty fund_id");
        if (!(commitment > 0.0))
            throw std::runtime_error("fund " + fund_id + ": commitment must be positive");
        if (quarters.empty())
            throw std::runtime_error("fund " + fund_id + ": no quarters");
        if (quarters.front().quarter_index != 0)
            throw std::runtime_error("fund " + fund_id + ": first quarter_index must be 0, got " +
                                     std::to_string(quarters.front().quarter_index));
        int prev = -1;
        for (const fund_quarter& q : quarters) {
            if (q.quarter_index <= prev)
                throw std::runtime_error("fund " + fund_id + ": quarter_index " +
                                         std::to_string(q.quarter_index) +
                                         " is not strictly increasing");
            prev = q.quarter_index;
            for (const auto* cell : {&q.called_pct, &q.dpi_pct, &q.rvpi_pct}) {
                if (cell->has_value() && **cell < 0.0)
                    throw std::runtime_error("fund " + fund_id + " quarter " +
                                             std::to_string(q.quarter_index) +
                                             ": negative ratio value");
            }
            if (warnings && q.called_pct && *q.called_pct > 120.0)
                warnings->push_back("fund " + fund_id + " quarter " +
                                    std::to_string(q.quarter_index) +
                                    ": called capital exceeds 120% of commitment");
        }
    }

    /// Dense per-field view over [0, series_length): quarters with no row at
    /// all come back as missing cells.
    [[nodiscard]] std::vector<std::optional<double>>
    field_series(std::optional<double> fund_quarter::* field) const {
        std::vector<std::optional<double>> out(static_cast<std::size_t>(series_length()));
        for (const fund_quarter& q : quarters)
            out[static_cast<std::size_t>(q.quarter_index)] = q.*field;
        return out;
    }

    [[nodiscard]] std::vector<std::optional<double>> called_series() const {
        return field_series(&fund_quarter::called_pct);
    }
    [[nodiscard]] std::vector<std::optional<double>> dpi_series() const {
        return field_series(&fund_quarter::dpi_pct);
    }
    [[nodiscard]] std::vector<std::optional<double>> rvpi_series() const {
        return field_series(&fund_quarter::rvpi_pct);
    }
};

/// Cumulative series as fractions of commitment:
///   cc  - cumulative contributions
///   dc  - cumulative distributions
///   rvc - residual (net asset) value
struct normalized_series {
    std::vector<double> cc, dc, rvc;
};

/// Quarterly contribution/distribution flows plus the residual value level.
/// rvc stays a level: it is a snapshot, not an accumulating quantity.
struct quarterly_flows {
    std::vector<double> qcc, qdc, rvc;
};

/// Converts reported percent ratios to commitment fractions:
///   cc  = called% / 100
///   dc  = dpi% x called% / 10000   (dpi is quoted on called capital)
///   rvc = rvpi% x called% / 10000
/// Requires a complete record; a missing cell or absent row is an error.
inline normalized_series to_normalized(const fund_record& f) {
    const auto called = f.called_series();
    const auto dpi = f.dpi_series();
    const auto rvpi = f.rvpi_series();
    const std::size_t n = called.size();
    if (n == 0)
        throw std::runtime_error("fund " + f.fund_id + ": empty record in to_normalized");
    normalized_series out;
    out.cc.resize(n);
    out.dc.resize(n);
    out.rvc.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (!called[t] || !dpi[t] || !rvpi[t])
            throw std::runtime_error("fund " + f.fund_id + " quarter " + std::to_string(t) +
                                     ": missing value; impute before normalizing");
        if (*called[t] < 0.0 || *dpi[t] < 0.0 || *rvpi[t] < 0.0)
            throw std::runtime_error("fund " + f.fund_id + " quarter " + std::to_string(t) +
                                     ": negative ratio value");
        const double cc = *called[t] / 100.0;
        out.cc[t] = cc;
        out.dc[t] = (*dpi[t] / 100.0) * cc;
        out.rvc[t] = (*rvpi[t] / 100.0) * cc;
    }
    return out;
}

/// First-differences the cumulative contribution and distribution series;
/// the residual value passes through as a level. Flow 0 is the level at 0.
inline quarterly_flows to_quarterly_flows(const normalized_series& s) {
    const std::size_t n = s.cc.size();
    if (n == 0 || s.dc.size() != n || s.rvc.size() != n)
        throw std::runtime_error("to_quarterly_flows: empty or ragged series");
    quarterly_flows out;
    out.qcc.resize(n);
    out.qdc.resize(n);
    out.rvc = s.rvc;
    out.qcc[0] = s.cc[0];
    out.qdc[0] = s.dc[0];
    for (std::size_t t = 1; t < n; ++t) {
        if (s.cc[t] < s.cc[t - 1])
            throw std::runtime_error("decreasing cumulative contributions at quarter " +
                                     std::to_string(t));
        if (s.dc[t] < s.dc[t - 1])
            throw std::runtime_error("decreasing cumulative distributions at quarter " +
                                     std::to_string(t));
        out.qcc[t] = s.cc[t] - s.cc[t - 1];
        out.qdc[t] = s.dc[t] - s.dc[t - 1];
    }
    return out;
}

/// Prefix-sums flows back into cumulative series; inverse of
/// to_quarterly_flows up to float accumulation.
inline normalized_series to_cumulative(const quarterly_flows& f) {
    const std::size_t n = f.qcc.size();
    if (n == 0 || f.qdc.size() != n || f.rvc.size() != n)
        throw std::runtime_error("to_cumulative: empty or ragged series");
    normalized_series out;
    out.cc.resize(n);
    out.dc.resize(n);
    out.rvc = f.rvc;
    double cc = 0.0, dc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        cc += f.qcc[t];
        dc += f.qdc[t];
        out.cc[t] = cc;
        out.dc[t] = dc;
    }
    return out;
}

/// Converts commitment fractions into currency amounts.
inline std::vector<double> scale_to_currency(const std::vector<double>& fractions,
                                             double commitment) {
    if (!(commitment > 0.0))
        throw std::runtime_error("scale_to_currency: commitment must be positive");
    std::vector<double> out(fractions.size());
    for (std::size_t i = 0; i < fractions.size(); ++i) out[i] = fractions[i] * commitment;
    return out;
}

inline quarterly_flows scale_to_currency(const quarterly_flows& f, double commitment) {
    quarterly_flows out;
    out.qcc = scale_to_currency(f.qcc, commitment);
    out.qdc = scale_to_currency(f.qdc, commitment);
    out.rvc = scale_to_currency(f.rvc, commitment);
    return out;
}

/// A fund after imputation and padding: complete ratio series stored as
/// fractions (called/100, dpi/100, rvpi/100), plus how many quarters were
/// actually reported. Quarters at index >= observed_len are vintage padding.
struct fund_series {
    std::string fund_id;
    int vintage_year = 0;
    double commitment = 0.0;
    std::vector<double> called, dpi, rvpi;
    std::size_t observed_len = 0;

    [[nodiscard]] std::size_t length() const { return called.size(); }
    [[nodiscard]] bool padded(std::size_t q) const { return q >= observed_len; }

    [[nodiscard]] normalized_series normalized() const {
        normalized_series out;
        const std::size_t n = length();
        out.cc.resize(n);
        out.dc.resize(n);
        out.rvc.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            out.cc[t] = called[t];
            out.dc[t] = dpi[t] * called[t];
            out.rvc[t] = rvpi[t] * called[t];
        }
        return out;
    }

    [[nodiscard]] quarterly_flows flows() const { return to_quarterly_flows(normalized()); }
};

} // namespace pecf
