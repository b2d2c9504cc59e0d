#pragma once

// Benchmarking criteria for AD measures.
//
// coverage: test points are sorted ascending by AD value (stable tie-break
// on point_id), the cumulative mean of their absolute errors is walked, and
// the coverage is the percentage-scale position of the LARGEST prefix whose
// cumulative error stays at or below the threshold (curves can dip back
// under, so the last crossing is used for every measure alike). The
// threshold is a linear-interpolation percentile of the raw per-point
// absolute errors, computed once per (dataset, model) and shared by all
// measures.
//
// auc: the error sequence in AD order is smoothed by a symmetric moving
// average with edge-including reflective padding, then summed as
// Σ|smoothed(i) − e_avg| with e_avg the model's MAE. Raw sums are min-max
// scaled across the measures of one (dataset, model) cell.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "adbench/ad_measures.hpp"
#include "adbench/errors.hpp"
#include "adbench/stats.hpp"

namespace adbench {

struct CoverageResult {
    double threshold = 0.0;    // error units
    double percentile = 25.0;
    double coverage_pct = 0.0; // ∈ [0, 100]
    std::vector<double> pct_scale;  // 100·(i+1)/n over the AD-sorted points
    std::vector<double> cum_err;    // running mean of ε in AD order
};

struct AucResult {
    int window = 1;
    double e_avg = 0.0;    // model MAE on the test set
    double raw_auc = 0.0;
    double scaled_auc = std::nan("");  // set by scale_auc
    std::vector<double> pct_scale;
    std::vector<double> smoothed;
};

namespace detail {

// AD-ascending order with stable tie-break on point_id
inline std::vector<std::size_t> ad_order(const AdScores& s) {
    std::vector<std::size_t> order(s.values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s.values[a] != s.values[b]) return s.values[a] < s.values[b];
        return s.point_ids[a] < s.point_ids[b];
    });
    return order;
}

}  // namespace detail

inline CoverageResult coverage(const AdScores& scores, double percentile = 25.0) {
    const std::size_t n = scores.values.size();
    if (n < 4) throw DegenerateInputError("coverage needs at least 4 points");
    if (!(percentile > 0.0 && percentile < 100.0))
        throw InvalidInputError("percentile must be in (0, 100)");

    CoverageResult r;
    r.percentile = percentile;
    r.threshold = percentile_linear(scores.abs_errors, percentile);

    const auto order = detail::ad_order(scores);
    r.pct_scale.resize(n);
    r.cum_err.resize(n);
    double running = 0.0;
    std::ptrdiff_t last_within = -1;
    for (std::size_t i = 0; i < n; ++i) {
        running += scores.abs_errors[order[i]];
        r.pct_scale[i] = 100.0 * static_cast<double>(i + 1) / static_cast<double>(n);
        r.cum_err[i] = running / static_cast<double>(i + 1);
        if (r.cum_err[i] <= r.threshold) last_within = static_cast<std::ptrdiff_t>(i);
    }
    r.coverage_pct = last_within < 0 ? 0.0 : r.pct_scale[static_cast<std::size_t>(last_within)];
    return r;
}

// Symmetric moving average, uniform weights, edge-including reflection:
// position −i reads values[i−1], position len−1+i reads values[len−i].
// Output length equals input length; for window ≤ len the total weight of
// every element is exactly the window size, so the mean is conserved.
inline std::vector<double> moving_average(std::span<const double> values, int window) {
    const auto len = static_cast<std::ptrdiff_t>(values.size());
    if (window % 2 == 0) throw EvenWindowError("window must be odd, got " + std::to_string(window));
    if (window < 1 || window > 2 * len - 1)
        throw WindowTooLargeError("window " + std::to_string(window) + " out of range for length " +
                                  std::to_string(len));
    const std::ptrdiff_t h = (window - 1) / 2;
    std::vector<double> out(values.size());
    auto reflect = [&](std::ptrdiff_t p) -> double {
        if (p < 0) p = -p - 1;
        else if (p >= len) p = 2 * len - 1 - p;
        return values[static_cast<std::size_t>(p)];
    };
    for (std::ptrdiff_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (std::ptrdiff_t d = -h; d <= h; ++d) s += reflect(i + d);
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(window);
    }
    return out;
}

// Smoothing window default: nearest odd integer to max(5, 0.05·n_test).
inline int default_window(std::size_t n_test) {
    const double v = std::max(5.0, 0.05 * static_cast<double>(n_test));
    const auto w = static_cast<int>(2 * std::lround((v - 1.0) / 2.0) + 1);
    return std::max(1, w);
}

inline AucResult auc_deviation(const AdScores& scores, int window, double e_avg) {
    const std::size_t n = scores.values.size();
    if (n == 0) throw DegenerateInputError("auc: empty scores");
    const auto order = detail::ad_order(scores);
    std::vector<double> errs(n);
    AucResult r;
    r.window = window;
    r.e_avg = e_avg;
    r.pct_scale.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        errs[i] = scores.abs_errors[order[i]];
        r.pct_scale[i] = 100.0 * static_cast<double>(i + 1) / static_cast<double>(n);
    }
    r.smoothed = moving_average(errs, window);
    r.raw_auc = 0.0;
    for (double v : r.smoothed) r.raw_auc += std::abs(v - e_avg);
    return r;
}

// Min-max scale raw AUC sums across the measures of one (dataset, model)
// cell; identical sums all map to 0 with a warning.
inline void scale_auc(std::vector<AucResult*> cell) {
    if (cell.empty()) return;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto* r : cell) {
        lo = std::min(lo, r->raw_auc);
        hi = std::max(hi, r->raw_auc);
    }
    if (cell.size() < 2 || hi == lo) {
        warn("scale_auc: degenerate scale (all raw sums equal); mapping to 0");
        for (auto* r : cell) r->scaled_auc = 0.0;
        return;
    }
    for (auto* r : cell) r->scaled_auc = (r->raw_auc - lo) / (hi - lo);
}

// --- cross-dataset tables --------------------------------------------------

struct CellOutcome {
    std::string dataset;
    std::string model;
    std::string measure;
    bool ok = false;
    std::string fail_reason;
    double coverage_pct = std::nan("");
    double raw_auc = std::nan("");
    double scaled_auc = std::nan("");
};

// rows = measures, cols = datasets, cell = mean over models; the final
// column is the mean of the row's dataset cells; rows sorted descending by
// the final column. Failed cells are excluded from every mean and listed in
// footnotes.
struct BenchmarkTable {
    std::string value_name;  // "coverage_pct" or "scaled_auc"
    std::vector<std::string> datasets;
    std::vector<std::string> measures;           // sorted by final column, descending
    std::vector<std::vector<double>> cells;      // [measure][dataset], NaN = no data
    std::vector<double> final_col;
    std::vector<std::string> footnotes;
};

namespace detail {

inline BenchmarkTable build_table(const std::vector<CellOutcome>& outcomes,
                                  double CellOutcome::*field, const std::string& value_name) {
    BenchmarkTable t;
    t.value_name = value_name;
    std::vector<std::string> datasets, measures;
    for (const auto& c : outcomes) {
        if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
            datasets.push_back(c.dataset);
        if (std::find(measures.begin(), measures.end(), c.measure) == measures.end())
            measures.push_back(c.measure);
    }
    t.datasets = datasets;

    std::vector<std::vector<double>> cells(measures.size(),
                                           std::vector<double>(datasets.size(), std::nan("")));
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        for (std::size_t di = 0; di < datasets.size(); ++di) {
            double sum = 0.0;
            std::size_t cnt = 0;
            for (const auto& c : outcomes) {
                if (c.measure != measures[mi] || c.dataset != datasets[di]) continue;
                if (!c.ok || std::isnan(c.*field)) continue;
                sum += c.*field;
                ++cnt;
            }
            if (cnt > 0) cells[mi][di] = sum / static_cast<double>(cnt);
        }
    }
    std::vector<double> final_col(measures.size(), std::nan(""));
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (double v : cells[mi])
            if (!std::isnan(v)) {
                sum += v;
                ++cnt;
            }
        if (cnt > 0) final_col[mi] = sum / static_cast<double>(cnt);
    }

    // descending by final column; ties break on the measure name so the
    // bench and re-aggregation paths emit identical tables
    std::vector<std::size_t> order(measures.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::isnan(final_col[a]) ? -std::numeric_limits<double>::infinity()
                                                   : final_col[a];
        const double fb = std::isnan(final_col[b]) ? -std::numeric_limits<double>::infinity()
                                                   : final_col[b];
        if (fa != fb) return fa > fb;
        return measures[a] < measures[b];
    });
    for (std::size_t i : order) {
        t.measures.push_back(measures[i]);
        t.cells.push_back(cells[i]);
        t.final_col.push_back(final_col[i]);
    }
    for (const auto& c : outcomes)
        if (!c.ok)
            t.footnotes.push_back(c.dataset + "/" + c.model + "/" + c.measure +
                                  " failed: " + c.fail_reason + " (excluded from means)");
    return t;
}

}  // namespace detail

inline std::pair<BenchmarkTable, BenchmarkTable> aggregate(
    const std::vector<CellOutcome>& outcomes) {
    return {detail::build_table(outcomes, &CellOutcome::coverage_pct, "coverage_pct"),
            detail::build_table(outcomes, &CellOutcome::scaled_auc, "scaled_auc")};
}

// --- table rendering --------------------------------------------------------

inline CsvTable table_to_csv(const BenchmarkTable& t) {
    CsvTable out;
    out.header.push_back("measure");
    for (const auto& d : t.datasets) out.header.push_back(d);
    out.header.push_back("avg");
    for (std::size_t mi = 0; mi < t.measures.size(); ++mi) {
        std::vector<std::string> row{t.measures[mi]};
        for (double v : t.cells[mi]) row.push_back(std::isnan(v) ? "" : format_double(v));
        row.push_back(std::isnan(t.final_col[mi]) ? "" : format_double(t.final_col[mi]));
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline std::string table_to_text(const BenchmarkTable& t) {
    auto fmt = [](double v) {
        if (std::isnan(v)) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{"measure"};
    for (const auto& d : t.datasets) head.push_back(d);
    head.push_back("avg");
    grid.push_back(head);
    for (std::size_t mi = 0; mi < t.measures.size(); ++mi) {
        std::vector<std::string> row{t.measures[mi]};
        for (double v : t.cells[mi]) row.push_back(fmt(v));
        row.push_back(fmt(t.final_col[mi]));
        grid.push_back(std::move(row));
    }
    std::vector<std::size_t> width(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::string out = t.value_name + "\n";
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            out.append(width[c] - row[c].size() + 2, ' ');
        }
        out += '\n';
    }
    for (const auto& f : t.footnotes) out += "note: " + f + "\n";
    return out;
}

}  // namespace adbench
