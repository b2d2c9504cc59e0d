#pragma once

// Uniform fit/predict contract for the model zoo. NotFitted/SchemaMismatch
// enforcement lives in the non-virtual wrappers so concrete models only
// implement do_fit/do_predict. Fitted models are immutable: predict is const
// and safe to call concurrently.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adbench/dataset.hpp"
#include "adbench/errors.hpp"
#include "adbench/linalg.hpp"

namespace adbench {

using Hyperparams = std::map<std::string, double>;

inline double hyper_or(const Hyperparams& h, const std::string& key, double fallback) {
    const auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

class Regressor {
public:
    virtual ~Regressor() = default;

    void fit(const Dataset& train) {
        if (train.n_rows() == 0) throw InvalidInputError("fit: empty training set");
        do_fit(train);
        n_features_ = train.n_features();
        fitted_ = true;
    }

    std::vector<double> predict(const Matrix& x) const {
        require_fitted();
        if (x.cols != n_features_)
            throw SchemaMismatchError("predict: expected " + std::to_string(n_features_) +
                                      " features, got " + std::to_string(x.cols));
        return do_predict(x);
    }

    double predict_one(std::span<const double> x) const {
        Matrix m(1, x.size());
        std::copy(x.begin(), x.end(), m.row(0).begin());
        return predict(m)[0];
    }

    virtual std::string kind() const = 0;
    bool is_fitted() const { return fitted_; }
    std::size_t n_features() const { return n_features_; }

    // per-epoch/per-sweep training loss for iterative kinds (empty otherwise)
    virtual const std::vector<double>& loss_trace() const {
        static const std::vector<double> kEmpty;
        return kEmpty;
    }

protected:
    void require_fitted() const {
        if (!fitted_) throw NotFittedError(kind() + ": predict before fit");
    }
    // serialization needs to reconstruct the fitted flag
    void mark_fitted(std::size_t n_features) {
        fitted_ = true;
        n_features_ = n_features;
    }

    virtual void do_fit(const Dataset& train) = 0;
    virtual std::vector<double> do_predict(const Matrix& x) const = 0;

private:
    bool fitted_ = false;
    std::size_t n_features_ = 0;

    friend class ModelReader;
};

struct EvalReport {
    double rmse = 0.0;
    double r2 = 0.0;
    std::vector<double> abs_errors;  // ε(i) = |y_true − y_pred| per test point
};

inline EvalReport evaluate(const Regressor& model, const Dataset& test) {
    const auto pred = model.predict(test.features);
    EvalReport rep;
    rep.abs_errors.resize(test.n_rows());
    double ss_res = 0.0;
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        const double e = test.target[i] - pred[i];
        rep.abs_errors[i] = std::abs(e);
        ss_res += e * e;
    }
    rep.rmse = std::sqrt(ss_res / static_cast<double>(test.n_rows()));
    const double m = mean(test.target);
    double ss_tot = 0.0;
    for (double y : test.target) ss_tot += (y - m) * (y - m);
    if (ss_tot == 0.0) {
        warn("evaluate: zero-variance test target, R² undefined");
        rep.r2 = std::nan("");
    } else {
        rep.r2 = 1.0 - ss_res / ss_tot;
    }
    return rep;
}

}  // namespace adbench
