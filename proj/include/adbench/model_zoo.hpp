#pragma once

// ModelSpec → Regressor factory. Hyperparameters arrive as a name→real map
// from the config; anything unset falls back to the documented defaults.

#include <cstdint>
#include <memory>
#include <string>

#include "adbench/bnn.hpp"
#include "adbench/config.hpp"
#include "adbench/gpr.hpp"
#include "adbench/linear_models.hpp"
#include "adbench/mlp.hpp"
#include "adbench/regressor.hpp"
#include "adbench/tree.hpp"

namespace adbench {

inline std::vector<int> hidden_from_params(const Hyperparams& h,
                                           const std::vector<int>& fallback) {
    std::vector<int> sizes;
    for (int i = 1; i <= 8; ++i) {
        const auto it = h.find("hidden" + std::to_string(i));
        if (it == h.end()) break;
        sizes.push_back(static_cast<int>(it->second));
    }
    return sizes.empty() ? fallback : sizes;
}

inline std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, std::uint64_t seed) {
    const auto& h = spec.hyperparameters;
    if (spec.kind == "linear") return std::make_unique<LinearRegression>();
    if (spec.kind == "ridge")
        return std::make_unique<RidgeRegression>(hyper_or(h, "lambda", 1.0));
    if (spec.kind == "lasso")
        return std::make_unique<LassoRegression>(hyper_or(h, "lambda", 0.1),
                                                 static_cast<int>(hyper_or(h, "max_sweeps", 1000)),
                                                 hyper_or(h, "tol", 1e-10));
    if (spec.kind == "decision_tree") {
        TreeParams p;
        p.max_depth = static_cast<int>(hyper_or(h, "max_depth", 64));
        p.min_leaf = static_cast<int>(hyper_or(h, "min_leaf", 1));
        p.mtry = static_cast<int>(hyper_or(h, "mtry", 0));
        return std::make_unique<DecisionTree>(p, seed);
    }
    if (spec.kind == "random_forest") {
        ForestParams p;
        p.n_trees = static_cast<int>(hyper_or(h, "n_trees", 50));
        p.max_depth = static_cast<int>(hyper_or(h, "max_depth", 64));
        p.min_leaf = static_cast<int>(hyper_or(h, "min_leaf", 1));
        p.mtry = static_cast<int>(hyper_or(h, "mtry", 0));
        return std::make_unique<RandomForest>(p, seed);
    }
    if (spec.kind == "mlp") {
        MlpParams p;
        p.hidden = hidden_from_params(h, {32, 16});
        p.epochs = static_cast<int>(hyper_or(h, "epochs", 200));
        p.batch = static_cast<int>(hyper_or(h, "batch", 32));
        p.lr = hyper_or(h, "lr", 1e-2);
        return std::make_unique<Mlp>(p, seed);
    }
    if (spec.kind == "gpr") {
        if (h.count("gamma") && h.count("alpha"))
            return std::make_unique<Gpr>(h.at("gamma"), h.at("alpha"));
        return std::make_unique<Gpr>();
    }
    if (spec.kind == "bnn") {
        BnnParams p;
        p.hidden = hidden_from_params(h, {32, 16, 8});
        p.epochs = static_cast<int>(hyper_or(h, "epochs", 200));
        p.batch = static_cast<int>(hyper_or(h, "batch", 64));
        p.lr = hyper_or(h, "lr", 1e-2);
        p.prior_sigma = hyper_or(h, "prior_sigma", 1.0);
        p.noise_sigma = hyper_or(h, "noise_sigma", 0.1);
        p.mc_samples = static_cast<int>(hyper_or(h, "mc_samples", 1000));
        return std::make_unique<Bnn>(p, seed);
    }
    throw ConfigError("unknown model kind: " + spec.kind);
}

}  // namespace adbench
