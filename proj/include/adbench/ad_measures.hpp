#pragma once

// The eleven applicability-domain measures behind one fit/score interface.
// Larger score ⇒ the prediction at that point is expected to be less
// accurate. Novelty measures (κ, min-κ, γ, δ, cosine, leverage) need only
// the training inputs; confidence measures need a fitted model context:
// a bagged ensemble (ensemble_sd, correll), a GPR (gpr_var), a random
// forest (rf_sd) or a BNN (bnn_sd). Fitted measures are immutable and
// score() is safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "adbench/bnn.hpp"
#include "adbench/csv.hpp"
#include "adbench/dataset.hpp"
#include "adbench/ensemble.hpp"
#include "adbench/errors.hpp"
#include "adbench/gpr.hpp"
#include "adbench/linalg.hpp"
#include "adbench/stats.hpp"
#include "adbench/tree.hpp"

namespace adbench {

enum class MeasureKind {
    kappa,
    min_kappa,
    gamma,
    delta,
    cosine,
    leverage,
    ensemble_sd,
    correll,
    gpr_var,
    rf_sd,
    bnn_sd,
};

inline const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::kappa: return "kappa";
        case MeasureKind::min_kappa: return "min_kappa";
        case MeasureKind::gamma: return "gamma";
        case MeasureKind::delta: return "delta";
        case MeasureKind::cosine: return "cosine";
        case MeasureKind::leverage: return "leverage";
        case MeasureKind::ensemble_sd: return "ensemble_sd";
        case MeasureKind::correll: return "correll";
        case MeasureKind::gpr_var: return "gpr_var";
        case MeasureKind::rf_sd: return "rf_sd";
        case MeasureKind::bnn_sd: return "bnn_sd";
    }
    return "?";
}

inline MeasureKind measure_kind_from_string(const std::string& s) {
    static const std::vector<std::pair<std::string, MeasureKind>> kMap = {
        {"kappa", MeasureKind::kappa},           {"min_kappa", MeasureKind::min_kappa},
        {"gamma", MeasureKind::gamma},           {"delta", MeasureKind::delta},
        {"cosine", MeasureKind::cosine},         {"leverage", MeasureKind::leverage},
        {"ensemble_sd", MeasureKind::ensemble_sd}, {"correll", MeasureKind::correll},
        {"gpr_var", MeasureKind::gpr_var},       {"rf_sd", MeasureKind::rf_sd},
        {"bnn_sd", MeasureKind::bnn_sd},
    };
    for (const auto& [name, kind] : kMap)
        if (name == s) return kind;
    throw ConfigError("unknown measure kind: " + s);
}

inline bool is_novelty(MeasureKind k) {
    switch (k) {
        case MeasureKind::kappa:
        case MeasureKind::min_kappa:
        case MeasureKind::gamma:
        case MeasureKind::delta:
        case MeasureKind::cosine:
        case MeasureKind::leverage: return true;
        default: return false;
    }
}

// AD values paired index-wise with the per-point absolute errors they are
// judged against — the interchange record consumed by the validation module.
struct AdScores {
    std::string measure_kind;
    std::string model_kind;
    std::string dataset_name;
    std::vector<double> values;
    std::vector<double> abs_errors;
    std::vector<std::size_t> point_ids;
};

struct MeasureOptions {
    int k_neighbors = 5;
    bool leverage_intercept = false;
    int n_samples = 1000;          // bnn_sd Monte-Carlo passes
    std::uint64_t seed = 0;        // bnn_sd base seed
};

struct MeasureContext {
    std::shared_ptr<const Ensemble> ensemble;
    std::shared_ptr<const Gpr> gpr;
    std::shared_ptr<const RandomForest> forest;
    std::shared_ptr<const Bnn> bnn;
};

class AdMeasure {
public:
    virtual ~AdMeasure() = default;

    double score(std::span<const double> x) const { return score_point(x, 0); }

    // point_id feeds the bnn_sd per-point seed (seed ⊕ point_id); the other
    // measures ignore it
    virtual double score_point(std::span<const double> x, std::uint64_t point_id) const = 0;
    virtual MeasureKind kind() const = 0;

    AdScores score_all(const Dataset& test, const EvalReport& eval) const {
        if (test.n_rows() == 0) throw DegenerateInputError("score_all: empty test set");
        if (eval.abs_errors.size() != test.n_rows())
            throw LengthMismatchError("score_all: eval has " +
                                      std::to_string(eval.abs_errors.size()) + " errors for " +
                                      std::to_string(test.n_rows()) + " test rows");
        AdScores s;
        s.measure_kind = to_string(kind());
        s.dataset_name = test.name;
        s.values.resize(test.n_rows());
        s.abs_errors = eval.abs_errors;
        s.point_ids.resize(test.n_rows());
        for (std::size_t i = 0; i < test.n_rows(); ++i) {
            s.point_ids[i] = i;
            s.values[i] = score_point(test.features.row(i), i);
        }
        return s;
    }
};

namespace detail {

// indices and distances of the k nearest training rows, ordered by
// (distance, index) so boundary ties resolve deterministically
struct Neighbors {
    std::vector<std::size_t> idx;
    std::vector<double> dist;
};

inline Neighbors k_nearest(const Matrix& train, std::span<const double> x, int k) {
    const std::size_t n = train.rows;
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = {std::sqrt(squared_distance(train.row(i), x)), i};
    const auto kk = static_cast<std::size_t>(k);
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    Neighbors nb;
    nb.idx.resize(kk);
    nb.dist.resize(kk);
    for (std::size_t i = 0; i < kk; ++i) {
        nb.dist[i] = d[i].first;
        nb.idx[i] = d[i].second;
    }
    return nb;
}

}  // namespace detail

// --- DA-index family + cosine: k-nearest-neighbor geometry ---------------

class KnnMeasure : public AdMeasure {
public:
    KnnMeasure(MeasureKind kind, Matrix train, int k) : kind_(kind), train_(std::move(train)), k_(k) {
        if (k_ < 1) throw InvalidInputError("k_neighbors must be ≥ 1");
        if (static_cast<std::size_t>(k_) > train_.rows)
            throw InvalidInputError("k_neighbors (" + std::to_string(k_) +
                                    ") exceeds training size (" + std::to_string(train_.rows) + ")");
    }

    MeasureKind kind() const override { return kind_; }
    int k_neighbors() const { return k_; }
    const Matrix& train_matrix() const { return train_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        const auto nb = detail::k_nearest(train_, x, k_);
        switch (kind_) {
            case MeasureKind::kappa:
                return nb.dist.back();  // k-th smallest distance
            case MeasureKind::min_kappa:
                return nb.dist.front();
            case MeasureKind::gamma:
                return mean(nb.dist);
            case MeasureKind::delta: {
                // ‖(1/k)Σ (x_b − x)‖
                std::vector<double> v(train_.cols, 0.0);
                for (std::size_t i : nb.idx) {
                    const auto row = train_.row(i);
                    for (std::size_t c = 0; c < train_.cols; ++c) v[c] += row[c] - x[c];
                }
                for (auto& c : v) c /= static_cast<double>(k_);
                return norm2(v);
            }
            case MeasureKind::cosine: {
                // mean over neighbors of 1 − cos(x, x_b); after z-scoring
                // cos spans [−1, 1], so the measure spans [0, 2]; the clamp
                // keeps rounding from producing cos marginally beyond ±1
                const double nx = norm2(x);
                if (nx == 0.0) throw ZeroVectorError("cosine: zero query vector");
                double acc = 0.0;
                for (std::size_t i : nb.idx) {
                    const auto row = train_.row(i);
                    const double nr = norm2(row);
                    if (nr == 0.0) throw ZeroVectorError("cosine: zero training vector");
                    acc += 1.0 - std::clamp(dot(x, row) / (nx * nr), -1.0, 1.0);
                }
                return acc / static_cast<double>(k_);
            }
            default:
                throw InvalidInputError("not a knn measure");
        }
    }

private:
    KnnMeasure() : kind_(MeasureKind::kappa), k_(0) {}

    MeasureKind kind_;
    Matrix train_;
    int k_;

    friend class ModelWriter;
    friend class ModelReader;
};

// --- leverage h = xᵀ(XᵀX)⁻¹x ----------------------------------------------

class LeverageMeasure : public AdMeasure {
public:
    LeverageMeasure(const Matrix& train, bool intercept) : intercept_(intercept) {
        Matrix x = train;
        if (intercept_) {
            x = Matrix(train.rows, train.cols + 1);
            for (std::size_t r = 0; r < train.rows; ++r) {
                x(r, 0) = 1.0;
                std::copy(train.row(r).begin(), train.row(r).end(), x.row(r).begin() + 1);
            }
        }
        Matrix g = gram(x);
        double trace = 0.0;
        for (std::size_t i = 0; i < g.rows; ++i) trace += g(i, i);
        if (trace <= 0.0) throw SingularGramError("leverage: XᵀX has zero trace");
        Matrix l = g;
        if (!cholesky_inplace(l)) {
            // rank-deficient Gram: ridge jitter 1e-8·trace/p
            const double jitter = 1e-8 * trace / static_cast<double>(g.rows);
            l = g;
            for (std::size_t i = 0; i < l.rows; ++i) l(i, i) += jitter;
            if (!cholesky_inplace(l))
                throw SingularGramError("leverage: XᵀX singular even with jitter");
        }
        chol_ = std::move(l);
    }

    MeasureKind kind() const override { return MeasureKind::leverage; }
    bool intercept() const { return intercept_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        std::vector<double> v;
        if (intercept_) {
            v.reserve(x.size() + 1);
            v.push_back(1.0);
            v.insert(v.end(), x.begin(), x.end());
        } else {
            v.assign(x.begin(), x.end());
        }
        if (v.size() != chol_.rows)
            throw SchemaMismatchError("leverage: query width mismatch");
        // h = xᵀ(LLᵀ)⁻¹x = ‖L⁻¹x‖²
        const auto z = forward_subst(chol_, v);
        return dot(z, z);
    }

private:
    LeverageMeasure() : intercept_(false) {}

    bool intercept_;
    Matrix chol_;

    friend class ModelWriter;
    friend class ModelReader;
};

// --- ensemble SD (Eq. with n−1 denominator) -------------------------------

class EnsembleSdMeasure : public AdMeasure {
public:
    explicit EnsembleSdMeasure(std::shared_ptr<const Ensemble> ensemble)
        : ensemble_(std::move(ensemble)) {
        if (!ensemble_ || !ensemble_->is_fitted())
            throw MissingModelContextError("ensemble_sd needs a fitted ensemble");
    }

    MeasureKind kind() const override { return MeasureKind::ensemble_sd; }
    const Ensemble& ensemble() const { return *ensemble_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        const auto preds = ensemble_->predict_members_one(x);
        return preds.size() < 2 ? 0.0 : stddev_sample(preds);
    }

private:
    EnsembleSdMeasure() = default;

    std::shared_ptr<const Ensemble> ensemble_;

    friend class ModelWriter;
    friend class ModelReader;
};

// --- CORRELL: 1 − max_i Spearman(member preds at Tᵢ, member preds at x) ---

class CorrellMeasure : public AdMeasure {
public:
    CorrellMeasure(std::shared_ptr<const Ensemble> ensemble, const Dataset& train)
        : ensemble_(std::move(ensemble)) {
        if (!ensemble_ || !ensemble_->is_fitted())
            throw MissingModelContextError("correll needs a fitted ensemble");
        // member predictions for every training point, ranked once here;
        // per query only the query vector needs ranking
        train_preds_ = ensemble_->predict_members(train.features);
        rebuild_ranks();
    }

    MeasureKind kind() const override { return MeasureKind::correll; }
    const Matrix& train_prediction_matrix() const { return train_preds_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        const auto preds = ensemble_->predict_members_one(x);
        const auto rx = average_ranks(preds);
        double best = -1.0;
        bool any = false;
        for (const auto& rt : train_rank_) {
            // Spearman = Pearson on ranks; a constant vector contributes 0
            const double rho = pearson(rx, rt);
            best = std::max(best, rho);
            any = true;
        }
        if (!any) return 1.0;
        return 1.0 - best;
    }

private:
    CorrellMeasure() = default;
    void rebuild_ranks() {
        train_rank_.clear();
        train_rank_.reserve(train_preds_.cols);
        for (std::size_t t = 0; t < train_preds_.cols; ++t) {
            std::vector<double> col(train_preds_.rows);
            for (std::size_t m = 0; m < train_preds_.rows; ++m) col[m] = train_preds_(m, t);
            train_rank_.push_back(average_ranks(col));
        }
    }

    std::shared_ptr<const Ensemble> ensemble_;
    Matrix train_preds_;                            // n_members × n_train
    std::vector<std::vector<double>> train_rank_;   // per train point

    friend class ModelWriter;
    friend class ModelReader;
};

// --- model-uncertainty passthroughs ---------------------------------------

class GprVarMeasure : public AdMeasure {
public:
    explicit GprVarMeasure(std::shared_ptr<const Gpr> gpr) : gpr_(std::move(gpr)) {
        if (!gpr_ || !gpr_->is_fitted())
            throw MissingModelContextError("gpr_var needs a fitted gpr");
    }
    MeasureKind kind() const override { return MeasureKind::gpr_var; }
    const Gpr& gpr() const { return *gpr_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        return gpr_->var_one(x);
    }

private:
    GprVarMeasure() = default;
    std::shared_ptr<const Gpr> gpr_;
    friend class ModelWriter;
    friend class ModelReader;
};

class RfSdMeasure : public AdMeasure {
public:
    explicit RfSdMeasure(std::shared_ptr<const RandomForest> forest) : forest_(std::move(forest)) {
        if (!forest_ || !forest_->is_fitted())
            throw MissingModelContextError("rf_sd needs a fitted random forest");
        if (forest_->trees().size() < 2)
            warn("rf_sd: single-tree forest always scores 0");
    }
    MeasureKind kind() const override { return MeasureKind::rf_sd; }
    const RandomForest& forest() const { return *forest_; }

    double score_point(std::span<const double> x, std::uint64_t) const override {
        const auto preds = forest_->trees().predict_members_one(x);
        return preds.size() < 2 ? 0.0 : stddev_sample(preds);
    }

private:
    RfSdMeasure() = default;
    std::shared_ptr<const RandomForest> forest_;
    friend class ModelWriter;
    friend class ModelReader;
};

class BnnSdMeasure : public AdMeasure {
public:
    BnnSdMeasure(std::shared_ptr<const Bnn> bnn, int n_samples, std::uint64_t seed)
        : bnn_(std::move(bnn)), n_samples_(n_samples), seed_(seed) {
        if (!bnn_ || !bnn_->is_fitted())
            throw MissingModelContextError("bnn_sd needs a fitted bnn");
    }
    MeasureKind kind() const override { return MeasureKind::bnn_sd; }
    const Bnn& bnn() const { return *bnn_; }
    std::uint64_t seed() const { return seed_; }
    int n_samples() const { return n_samples_; }

    double score_point(std::span<const double> x, std::uint64_t point_id) const override {
        return bnn_->mc_sd_one(x, n_samples_, seed_, point_id);
    }

private:
    BnnSdMeasure() : n_samples_(0), seed_(0) {}
    std::shared_ptr<const Bnn> bnn_;
    int n_samples_;
    std::uint64_t seed_;
    friend class ModelWriter;
    friend class ModelReader;
};

inline std::unique_ptr<AdMeasure> fit_measure(MeasureKind kind, const Dataset& train,
                                              const MeasureOptions& opt = {},
                                              const MeasureContext& ctx = {}) {
    switch (kind) {
        case MeasureKind::kappa:
        case MeasureKind::min_kappa:
        case MeasureKind::gamma:
        case MeasureKind::delta:
        case MeasureKind::cosine:
            return std::make_unique<KnnMeasure>(kind, train.features, opt.k_neighbors);
        case MeasureKind::leverage:
            return std::make_unique<LeverageMeasure>(train.features, opt.leverage_intercept);
        case MeasureKind::ensemble_sd:
            if (!ctx.ensemble) throw MissingModelContextError("ensemble_sd needs an ensemble");
            return std::make_unique<EnsembleSdMeasure>(ctx.ensemble);
        case MeasureKind::correll:
            if (!ctx.ensemble) throw MissingModelContextError("correll needs an ensemble");
            return std::make_unique<CorrellMeasure>(ctx.ensemble, train);
        case MeasureKind::gpr_var:
            if (!ctx.gpr) throw MissingModelContextError("gpr_var needs a gpr model");
            return std::make_unique<GprVarMeasure>(ctx.gpr);
        case MeasureKind::rf_sd:
            if (!ctx.forest) throw MissingModelContextError("rf_sd needs a random forest");
            return std::make_unique<RfSdMeasure>(ctx.forest);
        case MeasureKind::bnn_sd:
            if (!ctx.bnn) throw MissingModelContextError("bnn_sd needs a bnn model");
            return std::make_unique<BnnSdMeasure>(ctx.bnn, opt.n_samples, opt.seed);
    }
    throw InvalidInputError("unknown measure kind");
}

// --- AdScores CSV interchange ---------------------------------------------
// columns: point_id, ad_value, abs_error, measure_kind, model_kind, dataset_name

inline void write_scores_csv(const AdScores& s, const std::string& path) {
    CsvTable t;
    t.header = {"point_id", "ad_value", "abs_error", "measure_kind", "model_kind", "dataset_name"};
    t.rows.reserve(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i)
        t.rows.push_back({std::to_string(s.point_ids[i]), format_double(s.values[i]),
                          format_double(s.abs_errors[i]), s.measure_kind, s.model_kind,
                          s.dataset_name});
    write_csv(path, t);
}

inline AdScores read_scores_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const std::vector<std::string> expect = {"point_id",     "ad_value",   "abs_error",
                                             "measure_kind", "model_kind", "dataset_name"};
    if (t.header != expect) throw SchemaMismatchError("not an AdScores CSV: " + path);
    AdScores s;
    for (const auto& row : t.rows) {
        s.point_ids.push_back(static_cast<std::size_t>(std::stoull(row[0])));
        double v = 0.0, e = 0.0;
        if (!parse_double(row[1], v) || !parse_double(row[2], e))
            throw InvalidInputError("bad numeric field in " + path);
        s.values.push_back(v);
        s.abs_errors.push_back(e);
        s.measure_kind = row[3];
        s.model_kind = row[4];
        s.dataset_name = row[5];
    }
    return s;
}

}  // namespace adbench
