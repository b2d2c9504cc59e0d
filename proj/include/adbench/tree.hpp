#pragma once

// CART regression tree and bagged random forest. Splits minimize the summed
// squared error of the two children, evaluated at midpoints between
// consecutive distinct feature values. Tie-break is lowest feature index,
// then lowest threshold, which makes trees bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "adbench/ensemble.hpp"
#include "adbench/regressor.hpp"
#include "adbench/rng.hpp"

namespace adbench {

struct TreeParams {
    int max_depth = 64;
    int min_leaf = 1;
    int mtry = 0;  // features sampled per split; 0 = all (plain CART)
};

class DecisionTree : public Regressor {
public:
    explicit DecisionTree(TreeParams params = {}, std::uint64_t seed = 0)
        : params_(params), seed_(seed) {}

    std::string kind() const override { return "decision_tree"; }
    std::size_t node_count() const { return nodes_.size(); }

    struct Node {
        int feature = -1;  // -1 → leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    const std::vector<Node>& nodes() const { return nodes_; }

protected:
    void do_fit(const Dataset& train) override {
        nodes_.clear();
        Rng rng(mix_seed(seed_, 0x7EE5));
        std::vector<std::size_t> idx(train.n_rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        build(train, idx, 0, rng);
    }

    std::vector<double> do_predict(const Matrix& x) const override {
        std::vector<double> out(x.rows);
        for (std::size_t r = 0; r < x.rows; ++r) {
            int node = 0;
            while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = nodes_[static_cast<std::size_t>(node)];
                node = x(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left
                                                                                  : nd.right;
            }
            out[r] = nodes_[static_cast<std::size_t>(node)].value;
        }
        return out;
    }

private:
    int build(const Dataset& d, const std::vector<std::size_t>& idx, int depth, Rng& rng) {
        const auto node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i : idx) {
            sum += d.target[i];
            sum_sq += d.target[i] * d.target[i];
        }
        const auto n = static_cast<double>(idx.size());
        const double node_mean = sum / n;
        const double node_sse = sum_sq - sum * sum / n;

        nodes_[static_cast<std::size_t>(node_id)].value = node_mean;
        if (depth >= params_.max_depth ||
            idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf) || node_sse <= 1e-24)
            return node_id;

        // candidate features: all, or an mtry-subset drawn without replacement
        const std::size_t p = d.n_features();
        std::vector<std::size_t> feats(p);
        std::iota(feats.begin(), feats.end(), std::size_t{0});
        if (params_.mtry > 0 && static_cast<std::size_t>(params_.mtry) < p) {
            rng.shuffle(feats);
            feats.resize(static_cast<std::size_t>(params_.mtry));
            std::sort(feats.begin(), feats.end());  // keep tie-break order by feature index
        }

        double best_sse = std::numeric_limits<double>::infinity();
        std::size_t best_feat = 0;
        double best_thr = 0.0;

        std::vector<std::pair<double, double>> vals(idx.size());  // (x_j, y)
        for (std::size_t f : feats) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                vals[i] = {d.features(idx[i], f), d.target[idx[i]]};
            std::sort(vals.begin(), vals.end());

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left_sum += vals[i].second;
                left_sq += vals[i].second * vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(vals.size() - i - 1);
                if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double sse = (left_sq - left_sum * left_sum / nl) +
                                   (right_sq - right_sum * right_sum / nr);
                if (sse < best_sse) {  // strict: first (lowest feat, lowest thr) wins ties
                    best_sse = sse;
                    best_feat = f;
                    best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (!std::isfinite(best_sse)) return node_id;  // no valid split

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (d.features(i, best_feat) <= best_thr ? left_idx : right_idx).push_back(i);
        if (left_idx.empty() || right_idx.empty()) return node_id;

        nodes_[static_cast<std::size_t>(node_id)].feature = static_cast<int>(best_feat);
        nodes_[static_cast<std::size_t>(node_id)].threshold = best_thr;
        const int left = build(d, left_idx, depth + 1, rng);
        nodes_[static_cast<std::size_t>(node_id)].left = left;
        const int right = build(d, right_idx, depth + 1, rng);
        nodes_[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    TreeParams params_;
    std::uint64_t seed_;
    std::vector<Node> nodes_;

    friend class ModelWriter;
    friend class ModelReader;
};

struct ForestParams {
    int n_trees = 50;
    int max_depth = 64;
    int min_leaf = 1;
    int mtry = 0;  // 0 → max(1, p/3)
};

class RandomForest : public Regressor {
public:
    explicit RandomForest(ForestParams params = {}, std::uint64_t seed = 0)
        : params_(params), seed_(seed) {}

    std::string kind() const override { return "random_forest"; }

    const Ensemble& trees() const {
        require_fitted();
        return trees_;
    }

    // per-tree predictions, n_trees × n_rows
    Matrix predict_trees(const Matrix& x) const {
        require_fitted();
        return trees_.predict_members(x);
    }

protected:
    void do_fit(const Dataset& train) override {
        TreeParams tp;
        tp.max_depth = params_.max_depth;
        tp.min_leaf = params_.min_leaf;
        tp.mtry = params_.mtry > 0
                      ? params_.mtry
                      : static_cast<int>(std::max<std::size_t>(1, train.n_features() / 3));
        trees_.fit(train, params_.n_trees, seed_,
                   [&](std::uint64_t s) { return std::make_unique<DecisionTree>(tp, s); });
    }

    std::vector<double> do_predict(const Matrix& x) const override { return trees_.predict(x); }

private:
    ForestParams params_;
    std::uint64_t seed_;
    Ensemble trees_;

    friend class ModelWriter;
    friend class ModelReader;
};

}  // namespace adbench
