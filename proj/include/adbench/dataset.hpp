#pragma once

// Dataset loading, preprocessing and the deterministic 7:3 split.
//
// load_csv keeps missing cells as NaN and flags non-numeric columns as
// categorical (levels sorted lexicographically, stored as level indices).
// preprocess(d, spec, fit_on) recomputes every statistic from fit_on, so
// calling it with fit_on = train on both splits cannot leak test data.
// Pipeline order: impute → categorical encoding → outlier clip →
// correlation filter → z-score.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adbench/csv.hpp"
#include "adbench/errors.hpp"
#include "adbench/linalg.hpp"
#include "adbench/rng.hpp"
#include "adbench/stats.hpp"

namespace adbench {

struct Dataset {
    std::string name;
    Matrix features;  // NaN marks a missing cell until preprocess runs
    std::vector<double> target;
    std::vector<std::string> feature_names;
    std::string target_name;

    // per-column metadata carried from load to preprocess
    std::vector<bool> categorical;                   // per feature column
    std::vector<std::vector<std::string>> levels;    // sorted level names, empty for numeric
    std::vector<std::size_t> row_ids;                // original row indices (identity by default)

    std::size_t n_rows() const { return features.rows; }
    std::size_t n_features() const { return features.cols; }

    bool same_schema(const Dataset& other) const {
        return feature_names == other.feature_names && target_name == other.target_name &&
               categorical == other.categorical && levels == other.levels;
    }
};

struct PreprocessSpec {
    enum class Impute { mean, median, drop_row };
    enum class Normalize { zscore, none };
    enum class CategoricalEncoding { binary, none };
    enum class OutlierPolicy { keep, zscore_clip };

    Impute impute = Impute::mean;
    Normalize normalize = Normalize::zscore;
    CategoricalEncoding categorical_encoding = CategoricalEncoding::binary;
    OutlierPolicy outlier_policy = OutlierPolicy::keep;
    double clip_k = 3.0;

    // drop one of each feature pair with |pearson| > threshold, fit on train
    bool correlation_filter = false;
    double correlation_threshold = 0.95;

    // z-score the target with train statistics alongside the features
    bool normalize_target = true;
};

struct SplitDataset {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
};

namespace detail {

inline bool is_missing_token(const std::string& s) {
    static const std::set<std::string> kTokens = {"", "NA", "N/A", "na", "n/a",
                                                  "nan", "NaN", "NAN", "null", "NULL", "?"};
    return kTokens.count(s) > 0;
}

inline Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.name = d.name;
    out.feature_names = d.feature_names;
    out.target_name = d.target_name;
    out.categorical = d.categorical;
    out.levels = d.levels;
    out.features = Matrix(idx.size(), d.n_features());
    out.target.resize(idx.size());
    out.row_ids.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = d.features.row(idx[r]);
        std::copy(src.begin(), src.end(), out.features.row(r).begin());
        out.target[r] = d.target[idx[r]];
        out.row_ids[r] = d.row_ids.empty() ? idx[r] : d.row_ids[idx[r]];
    }
    return out;
}

}  // namespace detail

inline Dataset load_csv(const std::string& path, const std::string& target_column,
                        const std::string& name = "") {
    const CsvTable t = read_csv(path);
    std::size_t target_col = t.header.size();
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (t.header[c] == target_column) target_col = c;
    if (target_col == t.header.size())
        throw MissingTargetError("target column '" + target_column + "' not in header of " + path);
    if (t.header.size() < 2)
        throw InvalidInputError("need at least one feature column besides the target: " + path);
    if (t.rows.empty()) throw EmptyFileError("CSV has a header but no data rows: " + path);

    const std::size_t n_cols = t.header.size();

    // rows with a missing target cannot be imputed honestly — drop them
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (!detail::is_missing_token(t.rows[r][target_col])) kept.push_back(r);
    if (kept.size() < t.rows.size())
        warn(std::to_string(t.rows.size() - kept.size()) + " rows with missing target dropped: " + path);
    if (kept.empty()) throw EmptyFileError("no rows with a target value: " + path);

    // column classification over the kept rows: numeric unless a non-missing
    // cell fails to parse
    std::vector<bool> col_categorical(n_cols, false);
    for (std::size_t c = 0; c < n_cols; ++c) {
        for (std::size_t r : kept) {
            if (detail::is_missing_token(t.rows[r][c])) continue;
            double v;
            if (!parse_double(t.rows[r][c], v)) {
                col_categorical[c] = true;
                break;
            }
        }
    }
    if (col_categorical[target_col])
        throw InvalidInputError("target column '" + target_column + "' is not numeric: " + path);

    Dataset d;
    d.name = name.empty() ? path : name;
    d.target_name = target_column;
    d.features = Matrix(kept.size(), n_cols - 1);
    d.target.resize(kept.size());
    d.row_ids.resize(kept.size());
    std::iota(d.row_ids.begin(), d.row_ids.end(), std::size_t{0});

    std::size_t out_c = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c == target_col) continue;
        d.feature_names.push_back(t.header[c]);
        d.categorical.push_back(col_categorical[c]);
        if (col_categorical[c]) {
            std::set<std::string> level_set;
            for (std::size_t r : kept)
                if (!detail::is_missing_token(t.rows[r][c])) level_set.insert(t.rows[r][c]);
            std::vector<std::string> lv(level_set.begin(), level_set.end());
            for (std::size_t k = 0; k < kept.size(); ++k) {
                const auto& cell = t.rows[kept[k]][c];
                if (detail::is_missing_token(cell)) {
                    d.features(k, out_c) = std::nan("");
                } else {
                    const auto it = std::lower_bound(lv.begin(), lv.end(), cell);
                    d.features(k, out_c) = static_cast<double>(it - lv.begin());
                }
            }
            d.levels.push_back(std::move(lv));
        } else {
            for (std::size_t k = 0; k < kept.size(); ++k) {
                const auto& cell = t.rows[kept[k]][c];
                double v = std::nan("");
                if (!detail::is_missing_token(cell)) parse_double(cell, v);
                d.features(k, out_c) = v;
            }
            d.levels.emplace_back();
        }
        ++out_c;
    }
    for (std::size_t k = 0; k < kept.size(); ++k) {
        double v = 0.0;
        parse_double(t.rows[kept[k]][target_col], v);
        d.target[k] = v;
    }
    return d;
}

inline void write_csv(const Dataset& d, const std::string& path) {
    CsvTable t;
    t.header = d.feature_names;
    t.header.push_back(d.target_name);
    t.rows.resize(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        auto& row = t.rows[r];
        row.reserve(d.n_features() + 1);
        for (std::size_t c = 0; c < d.n_features(); ++c)
            row.push_back(format_double(d.features(r, c)));
        row.push_back(format_double(d.target[r]));
    }
    write_csv(path, t);
}

inline Dataset preprocess(const Dataset& d, const PreprocessSpec& spec, const Dataset& fit_on) {
    if (!d.same_schema(fit_on)) throw SchemaMismatchError("preprocess: d and fit_on schemas differ");

    const std::size_t p = d.n_features();

    // --- imputation statistics from fit_on ---
    std::vector<double> fill(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        std::vector<double> col;
        for (std::size_t r = 0; r < fit_on.n_rows(); ++r) {
            const double v = fit_on.features(r, c);
            if (!std::isnan(v)) col.push_back(v);
        }
        if (col.empty()) {
            fill[c] = 0.0;
        } else if (d.categorical[c]) {
            // most frequent level index in fit_on; lowest index wins ties
            std::map<double, std::size_t> counts;
            for (double v : col) ++counts[v];
            std::size_t best_count = 0;
            double best_level = col[0];
            for (const auto& [lvl, cnt] : counts) {
                if (cnt > best_count) {
                    best_count = cnt;
                    best_level = lvl;
                }
            }
            fill[c] = best_level;
        } else if (spec.impute == PreprocessSpec::Impute::median) {
            fill[c] = median(col);
        } else {
            fill[c] = mean(col);
        }
    }

    Dataset out = d;
    if (out.row_ids.empty()) {
        out.row_ids.resize(out.n_rows());
        std::iota(out.row_ids.begin(), out.row_ids.end(), std::size_t{0});
    }

    if (spec.impute == PreprocessSpec::Impute::drop_row) {
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < out.n_rows(); ++r) {
            bool complete = true;
            for (std::size_t c = 0; c < p; ++c)
                if (std::isnan(out.features(r, c))) complete = false;
            if (complete) keep.push_back(r);
        }
        out = detail::take_rows(out, keep);
        if (out.n_rows() == 0) throw DegenerateInputError("drop_row removed every row");
    } else {
        for (std::size_t r = 0; r < out.n_rows(); ++r)
            for (std::size_t c = 0; c < p; ++c)
                if (std::isnan(out.features(r, c))) out.features(r, c) = fill[c];
    }

    // --- categorical encoding ---
    if (spec.categorical_encoding == PreprocessSpec::CategoricalEncoding::binary) {
        Matrix enc(out.n_rows(), 0);
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols;  // column-wise staging
        for (std::size_t c = 0; c < p; ++c) {
            if (!out.categorical[c]) {
                std::vector<double> col(out.n_rows());
                for (std::size_t r = 0; r < out.n_rows(); ++r) col[r] = out.features(r, c);
                cols.push_back(std::move(col));
                names.push_back(out.feature_names[c]);
                continue;
            }
            const std::size_t n_levels = std::max<std::size_t>(out.levels[c].size(), 2);
            std::size_t bits = 0;
            while ((std::size_t{1} << bits) < n_levels) ++bits;
            for (std::size_t b = 0; b < bits; ++b) {
                std::vector<double> col(out.n_rows());
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    const auto idx = static_cast<std::size_t>(out.features(r, c));
                    col[r] = static_cast<double>((idx >> b) & 1u);
                }
                cols.push_back(std::move(col));
                names.push_back(bits == 1 ? out.feature_names[c]
                                          : out.feature_names[c] + "_bit" + std::to_string(b));
            }
        }
        enc = Matrix(out.n_rows(), cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c)
            for (std::size_t r = 0; r < out.n_rows(); ++r) enc(r, c) = cols[c][r];
        out.features = std::move(enc);
        out.feature_names = std::move(names);
        out.categorical.assign(out.feature_names.size(), false);
        out.levels.assign(out.feature_names.size(), {});
    }

    // the fitted-on dataset must pass through the same row/column surgery
    // to keep the statistics aligned with the transformed columns
    Dataset fit_enc;
    const bool self_fit = (&d == &fit_on);
    if (self_fit) {
        fit_enc = out;
    } else {
        PreprocessSpec head = spec;
        head.normalize = PreprocessSpec::Normalize::none;
        head.outlier_policy = PreprocessSpec::OutlierPolicy::keep;
        head.correlation_filter = false;
        fit_enc = preprocess(fit_on, head, fit_on);
    }

    const std::size_t q = out.n_features();
    if (fit_enc.n_features() != q) throw SchemaMismatchError("encoding changed schemas inconsistently");

    auto column_of = [](const Dataset& ds, std::size_t c) {
        std::vector<double> col(ds.n_rows());
        for (std::size_t r = 0; r < ds.n_rows(); ++r) col[r] = ds.features(r, c);
        return col;
    };

    // --- outlier clip (train mean ± k·std, population std) ---
    if (spec.outlier_policy == PreprocessSpec::OutlierPolicy::zscore_clip) {
        for (std::size_t c = 0; c < q; ++c) {
            const auto col = column_of(fit_enc, c);
            const double m = mean(col);
            const double s = stddev_population(col);
            if (s == 0.0) continue;
            const double lo = m - spec.clip_k * s;
            const double hi = m + spec.clip_k * s;
            for (std::size_t r = 0; r < out.n_rows(); ++r)
                out.features(r, c) = std::clamp(out.features(r, c), lo, hi);
            for (std::size_t r = 0; r < fit_enc.n_rows(); ++r)
                fit_enc.features(r, c) = std::clamp(fit_enc.features(r, c), lo, hi);
        }
    }

    // --- correlation filter: for each pair |r| > threshold keep the lower
    // index, drop the higher; scan order fixed for determinism ---
    if (spec.correlation_filter && q >= 2) {
        std::vector<bool> drop(q, false);
        for (std::size_t i = 0; i < q; ++i) {
            if (drop[i]) continue;
            const auto ci = column_of(fit_enc, i);
            for (std::size_t j = i + 1; j < q; ++j) {
                if (drop[j]) continue;
                const auto cj = column_of(fit_enc, j);
                if (std::abs(pearson(ci, cj)) > spec.correlation_threshold) drop[j] = true;
            }
        }
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < q; ++c)
            if (!drop[c]) keep.push_back(c);
        if (keep.size() < q) {
            auto shrink = [&](Dataset& ds) {
                Matrix m(ds.n_rows(), keep.size());
                std::vector<std::string> nm;
                std::vector<bool> cat;
                std::vector<std::vector<std::string>> lv;
                for (std::size_t k = 0; k < keep.size(); ++k) {
                    nm.push_back(ds.feature_names[keep[k]]);
                    cat.push_back(ds.categorical[keep[k]]);
                    lv.push_back(ds.levels[keep[k]]);
                    for (std::size_t r = 0; r < ds.n_rows(); ++r) m(r, k) = ds.features(r, keep[k]);
                }
                ds.features = std::move(m);
                ds.feature_names = std::move(nm);
                ds.categorical = std::move(cat);
                ds.levels = std::move(lv);
            };
            shrink(out);
            shrink(fit_enc);
        }
    }

    // --- z-score with fit statistics; zero-variance columns map to zeros ---
    if (spec.normalize == PreprocessSpec::Normalize::zscore) {
        for (std::size_t c = 0; c < out.n_features(); ++c) {
            const auto col = column_of(fit_enc, c);
            const double m = mean(col);
            const double s = stddev_population(col);
            for (std::size_t r = 0; r < out.n_rows(); ++r)
                out.features(r, c) = (s == 0.0) ? 0.0 : (out.features(r, c) - m) / s;
        }
        if (spec.normalize_target) {
            const double m = mean(fit_enc.target);
            const double s = stddev_population(fit_enc.target);
            for (auto& y : out.target) y = (s == 0.0) ? 0.0 : (y - m) / s;
        }
    }

    if (!out.features.all_finite())
        throw InvalidInputError("preprocess left non-finite feature values");
    return out;
}

// Seeded Fisher-Yates permutation, floor(n·fraction) rows to train.
inline SplitDataset split(const Dataset& d, std::uint64_t seed, double train_fraction = 0.7) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidInputError("train_fraction must be in (0, 1)");
    const std::size_t n = d.n_rows();
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * train_fraction));
    if (n_train == 0 || n_train == n)
        throw DegenerateSplitError("split leaves an empty side (n=" + std::to_string(n) + ")");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);

    SplitDataset s;
    s.seed = seed;
    s.train_fraction = train_fraction;
    s.train = detail::take_rows(d, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)});
    s.test = detail::take_rows(d, {idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end()});
    return s;
}

// Seeded permutation prefix, returned in original row order.
inline Dataset subsample(const Dataset& d, std::size_t n, std::uint64_t seed) {
    if (n >= d.n_rows()) return d;
    std::vector<std::size_t> idx(d.n_rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return detail::take_rows(d, idx);
}

}  // namespace adbench
