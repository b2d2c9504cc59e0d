#pragma once

// Scalar statistics shared across modules: moments, linear-interpolation
// percentile, Pearson/Spearman correlation with average ranks for ties.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace adbench {

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// population variance (divide by n)
inline double variance_population(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

// sample variance (divide by n−1); n < 2 → 0; identical values → exact 0
// (the mean of n equal doubles can round, leaving ~1e-16 residue otherwise)
inline double variance_sample(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    bool all_equal = true;
    for (double x : v)
        if (x != v[0]) {
            all_equal = false;
            break;
        }
    if (all_equal) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev_population(std::span<const double> v) {
    return std::sqrt(variance_population(v));
}

inline double stddev_sample(std::span<const double> v) {
    return std::sqrt(variance_sample(v));
}

// Linear interpolation between order statistics (the "inclusive" definition):
// rank = p/100·(n−1), result = v(⌊rank⌋) + frac·(v(⌊rank⌋+1) − v(⌊rank⌋)).
inline double percentile_linear(std::span<const double> v, double p) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    if (s.empty()) return 0.0;
    if (s.size() == 1) return s[0];
    const double rank = (p / 100.0) * static_cast<double>(s.size() - 1);
    const double lo = std::clamp(std::floor(rank), 0.0, static_cast<double>(s.size() - 1));
    const auto i = static_cast<std::size_t>(lo);
    if (i + 1 >= s.size()) return s.back();
    const double frac = rank - lo;
    return s[i] + frac * (s[i + 1] - s[i]);
}

inline double median(std::span<const double> v) { return percentile_linear(v, 50.0); }

// Pearson correlation; either side constant → 0 by convention here (callers
// that need a different guard handle it themselves). Clamped to [−1, 1] so
// rounding never pushes a correlation outside its range.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2) return 0.0;
    const double ma = mean(a.subspan(0, n));
    const double mb = mean(b.subspan(0, n));
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// 1-based average ranks with tie averaging
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // average of 1-based ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

// Spearman = Pearson on average ranks; constant input → 0.
inline double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

}  // namespace adbench
