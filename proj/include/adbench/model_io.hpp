#pragma once

// Versioned text dumps of fitted models and measures so benchmark stages can
// rerun without refitting. Format: whitespace-separated tokens; the first
// line is a magic+version tag; doubles are written with to_chars and parse
// back bit-exactly.
//
//   adbench.model.v1 <kind> ... end
//   adbench.measure.v1 <kind> ... end
//
// Matrices serialize as: matrix <rows> <cols> v00 v01 ...; vectors as:
// vec <n> v0 v1 ...

#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include "adbench/ad_measures.hpp"
#include "adbench/bnn.hpp"
#include "adbench/ensemble.hpp"
#include "adbench/gpr.hpp"
#include "adbench/linear_models.hpp"
#include "adbench/mlp.hpp"
#include "adbench/regressor.hpp"
#include "adbench/tree.hpp"

namespace adbench {

inline constexpr const char* kModelMagic = "adbench.model.v1";
inline constexpr const char* kMeasureMagic = "adbench.measure.v1";

namespace io_detail {

inline void put_double(std::ostream& os, double v) { os << format_double(v) << ' '; }

inline void put_vec(std::ostream& os, std::span<const double> v) {
    os << "vec " << v.size() << '\n';
    for (double x : v) put_double(os, x);
    os << '\n';
}

inline void put_matrix(std::ostream& os, const Matrix& m) {
    os << "matrix " << m.rows << ' ' << m.cols << '\n';
    for (double x : m.data) put_double(os, x);
    os << '\n';
}

inline std::string expect(std::istream& is, const char* what) {
    std::string tok;
    if (!(is >> tok)) throw InvalidInputError(std::string("dump truncated, expected ") + what);
    return tok;
}

inline void expect_token(std::istream& is, const std::string& want) {
    const auto got = expect(is, want.c_str());
    if (got != want)
        throw InvalidInputError("dump corrupt: expected '" + want + "', got '" + got + "'");
}

inline double get_double(std::istream& is) {
    const auto tok = expect(is, "number");
    double v = 0.0;
    if (!parse_double(tok, v)) throw InvalidInputError("dump corrupt: bad number '" + tok + "'");
    return v;
}

inline std::size_t get_size(std::istream& is) {
    return static_cast<std::size_t>(std::stoull(expect(is, "count")));
}

inline std::vector<double> get_vec(std::istream& is) {
    expect_token(is, "vec");
    std::vector<double> v(get_size(is));
    for (auto& x : v) x = get_double(is);
    return v;
}

inline Matrix get_matrix(std::istream& is) {
    expect_token(is, "matrix");
    const auto rows = get_size(is);
    const auto cols = get_size(is);
    Matrix m(rows, cols);
    for (auto& x : m.data) x = get_double(is);
    return m;
}

}  // namespace io_detail

class ModelWriter {
public:
    static void save(const Regressor& model, std::ostream& os) {
        os << kModelMagic << '\n';
        os << model.kind() << ' ' << model.n_features() << '\n';
        dispatch(model, os);
        os << "end\n";
    }

    static void save_file(const Regressor& model, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InvalidInputError("cannot write " + path);
        save(model, out);
    }

    static void save(const Ensemble& e, std::ostream& os) {
        os << "ensemble " << e.size() << ' ' << e.bootstrap_seed() << '\n';
        for (std::size_t i = 0; i < e.size(); ++i) save(e.member(i), os);
    }

    static void save_measure(const AdMeasure& m, std::ostream& os) {
        using io_detail::put_matrix;
        os << kMeasureMagic << '\n' << to_string(m.kind()) << '\n';
        switch (m.kind()) {
            case MeasureKind::kappa:
            case MeasureKind::min_kappa:
            case MeasureKind::gamma:
            case MeasureKind::delta:
            case MeasureKind::cosine: {
                const auto& k = dynamic_cast<const KnnMeasure&>(m);
                os << k.k_ << '\n';
                put_matrix(os, k.train_);
                break;
            }
            case MeasureKind::leverage: {
                const auto& l = dynamic_cast<const LeverageMeasure&>(m);
                os << (l.intercept_ ? 1 : 0) << '\n';
                put_matrix(os, l.chol_);
                break;
            }
            case MeasureKind::ensemble_sd: {
                const auto& e = dynamic_cast<const EnsembleSdMeasure&>(m);
                save(*e.ensemble_, os);
                break;
            }
            case MeasureKind::correll: {
                const auto& c = dynamic_cast<const CorrellMeasure&>(m);
                save(*c.ensemble_, os);
                put_matrix(os, c.train_preds_);
                break;
            }
            case MeasureKind::gpr_var: {
                const auto& g = dynamic_cast<const GprVarMeasure&>(m);
                save(*g.gpr_, os);
                break;
            }
            case MeasureKind::rf_sd: {
                const auto& f = dynamic_cast<const RfSdMeasure&>(m);
                save(*f.forest_, os);
                break;
            }
            case MeasureKind::bnn_sd: {
                const auto& b = dynamic_cast<const BnnSdMeasure&>(m);
                os << b.n_samples_ << ' ' << b.seed_ << '\n';
                save(*b.bnn_, os);
                break;
            }
        }
        os << "end\n";
    }

    static void save_measure_file(const AdMeasure& m, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InvalidInputError("cannot write " + path);
        save_measure(m, out);
    }

private:
    static void dispatch(const Regressor& model, std::ostream& os) {
        using io_detail::put_double;
        using io_detail::put_matrix;
        using io_detail::put_vec;
        const std::string kind = model.kind();
        if (kind == "linear" || kind == "ridge" || kind == "lasso") {
            const auto& lb = dynamic_cast<const LinearBase&>(model);
            put_vec(os, lb.coefficients());
            put_double(os, lb.intercept());
            os << '\n';
        } else if (kind == "decision_tree") {
            const auto& t = dynamic_cast<const DecisionTree&>(model);
            os << t.nodes_.size() << '\n';
            for (const auto& nd : t.nodes_) {
                os << nd.feature << ' ' << nd.left << ' ' << nd.right << ' ';
                put_double(os, nd.threshold);
                put_double(os, nd.value);
                os << '\n';
            }
        } else if (kind == "random_forest") {
            const auto& f = dynamic_cast<const RandomForest&>(model);
            save(f.trees_, os);
        } else if (kind == "mlp") {
            const auto& m = dynamic_cast<const Mlp&>(model);
            os << m.layout_.sizes.size() << ' ';
            for (int s : m.layout_.sizes) os << s << ' ';
            os << '\n';
            put_vec(os, m.weights_);
        } else if (kind == "gpr") {
            const auto& g = dynamic_cast<const Gpr&>(model);
            put_double(os, g.gamma_);
            put_double(os, g.alpha_);
            os << '\n';
            put_matrix(os, g.train_x_);
            put_matrix(os, g.chol_);
            put_vec(os, g.alpha_vector_);
        } else if (kind == "bnn") {
            const auto& b = dynamic_cast<const Bnn&>(model);
            os << b.seed_ << ' ' << b.params_.mc_samples << ' ';
            put_double(os, b.params_.prior_sigma);
            put_double(os, b.params_.noise_sigma);
            os << b.layout_.sizes.size() << ' ';
            for (int s : b.layout_.sizes) os << s << ' ';
            os << '\n';
            put_vec(os, b.theta_);
        } else {
            throw InvalidInputError("cannot serialize model kind: " + kind);
        }
    }
};

class ModelReader {
public:
    static std::unique_ptr<Regressor> load(std::istream& is) {
        io_detail::expect_token(is, kModelMagic);
        auto model = load_body(is);
        io_detail::expect_token(is, "end");
        return model;
    }

    static std::unique_ptr<Regressor> load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InvalidInputError("cannot open " + path);
        std::string magic;
        in >> magic;
        if (magic != kModelMagic)
            throw VersionMismatchError("not an adbench model dump (or wrong version): " + path);
        auto model = load_body(in);
        io_detail::expect_token(in, "end");
        return model;
    }

    static std::shared_ptr<Ensemble> load_ensemble(std::istream& is) {
        io_detail::expect_token(is, "ensemble");
        const auto n = io_detail::get_size(is);
        std::uint64_t seed = 0;
        is >> seed;
        auto e = std::make_shared<Ensemble>();
        e->bootstrap_seed_ = seed;
        for (std::size_t i = 0; i < n; ++i) e->members_.push_back(load(is));
        return e;
    }

    static std::unique_ptr<AdMeasure> load_measure_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InvalidInputError("cannot open " + path);
        std::string magic;
        in >> magic;
        if (magic != kMeasureMagic)
            throw VersionMismatchError("not an adbench measure dump (or wrong version): " + path);
        auto m = load_measure_body(in);
        io_detail::expect_token(in, "end");
        return m;
    }

private:
    static std::unique_ptr<Regressor> load_body(std::istream& is) {
        using io_detail::get_double;
        using io_detail::get_matrix;
        using io_detail::get_size;
        using io_detail::get_vec;
        const std::string kind = io_detail::expect(is, "model kind");
        const auto n_features = get_size(is);

        auto finish = [&](auto model_ptr) -> std::unique_ptr<Regressor> {
            model_ptr->mark_fitted(n_features);
            return model_ptr;
        };

        if (kind == "linear" || kind == "ridge" || kind == "lasso") {
            std::unique_ptr<LinearBase> m;
            if (kind == "linear") m = std::make_unique<LinearRegression>();
            else if (kind == "ridge") m = std::make_unique<RidgeRegression>();
            else m = std::make_unique<LassoRegression>();
            m->coef_ = get_vec(is);
            m->intercept_ = get_double(is);
            return finish(std::move(m));
        }
        if (kind == "decision_tree") {
            auto t = std::make_unique<DecisionTree>();
            const auto n_nodes = get_size(is);
            t->nodes_.resize(n_nodes);
            for (auto& nd : t->nodes_) {
                is >> nd.feature >> nd.left >> nd.right;
                nd.threshold = get_double(is);
                nd.value = get_double(is);
            }
            return finish(std::move(t));
        }
        if (kind == "random_forest") {
            auto f = std::make_unique<RandomForest>();
            auto trees = load_ensemble(is);
            f->trees_ = std::move(*trees);
            return finish(std::move(f));
        }
        if (kind == "mlp") {
            auto m = std::make_unique<Mlp>();
            const auto n_sizes = get_size(is);
            std::vector<int> sizes(n_sizes);
            for (auto& s : sizes) is >> s;
            m->layout_ = net::Layout::make(sizes);
            m->weights_ = get_vec(is);
            if (m->weights_.size() != m->layout_.total)
                throw InvalidInputError("mlp dump: weight count mismatch");
            return finish(std::move(m));
        }
        if (kind == "gpr") {
            auto g = std::make_unique<Gpr>();
            g->fixed_ = true;
            g->gamma_ = get_double(is);
            g->alpha_ = get_double(is);
            g->train_x_ = get_matrix(is);
            g->chol_ = get_matrix(is);
            g->alpha_vector_ = get_vec(is);
            return finish(std::move(g));
        }
        if (kind == "bnn") {
            auto b = std::make_unique<Bnn>();
            is >> b->seed_ >> b->params_.mc_samples;
            b->params_.prior_sigma = get_double(is);
            b->params_.noise_sigma = get_double(is);
            const auto n_sizes = get_size(is);
            std::vector<int> sizes(n_sizes);
            for (auto& s : sizes) is >> s;
            b->layout_ = net::Layout::make(sizes);
            b->theta_ = get_vec(is);
            if (b->theta_.size() != 2 * b->layout_.total)
                throw InvalidInputError("bnn dump: parameter count mismatch");
            return finish(std::move(b));
        }
        throw VersionMismatchError("unknown model kind in dump: " + kind);
    }

    static std::unique_ptr<AdMeasure> load_measure_body(std::istream& is) {
        using io_detail::get_matrix;
        const MeasureKind kind = measure_kind_from_string(io_detail::expect(is, "measure kind"));
        switch (kind) {
            case MeasureKind::kappa:
            case MeasureKind::min_kappa:
            case MeasureKind::gamma:
            case MeasureKind::delta:
            case MeasureKind::cosine: {
                auto m = std::unique_ptr<KnnMeasure>(new KnnMeasure());
                m->kind_ = kind;
                is >> m->k_;
                m->train_ = get_matrix(is);
                return m;
            }
            case MeasureKind::leverage: {
                auto m = std::unique_ptr<LeverageMeasure>(new LeverageMeasure());
                int flag = 0;
                is >> flag;
                m->intercept_ = flag != 0;
                m->chol_ = get_matrix(is);
                return m;
            }
            case MeasureKind::ensemble_sd: {
                auto m = std::unique_ptr<EnsembleSdMeasure>(new EnsembleSdMeasure());
                m->ensemble_ = load_ensemble(is);
                return m;
            }
            case MeasureKind::correll: {
                auto m = std::unique_ptr<CorrellMeasure>(new CorrellMeasure());
                m->ensemble_ = load_ensemble(is);
                m->train_preds_ = get_matrix(is);
                m->rebuild_ranks();
                return m;
            }
            case MeasureKind::gpr_var: {
                auto m = std::unique_ptr<GprVarMeasure>(new GprVarMeasure());
                auto model = load(is);
                auto* gpr = dynamic_cast<Gpr*>(model.get());
                if (!gpr) throw InvalidInputError("gpr_var dump does not contain a gpr");
                model.release();
                m->gpr_ = std::shared_ptr<const Gpr>(gpr);
                return m;
            }
            case MeasureKind::rf_sd: {
                auto m = std::unique_ptr<RfSdMeasure>(new RfSdMeasure());
                auto model = load(is);
                auto* rf = dynamic_cast<RandomForest*>(model.get());
                if (!rf) throw InvalidInputError("rf_sd dump does not contain a forest");
                model.release();
                m->forest_ = std::shared_ptr<const RandomForest>(rf);
                return m;
            }
            case MeasureKind::bnn_sd: {
                auto m = std::unique_ptr<BnnSdMeasure>(new BnnSdMeasure());
                is >> m->n_samples_ >> m->seed_;
                auto model = load(is);
                auto* bnn = dynamic_cast<Bnn*>(model.get());
                if (!bnn) throw InvalidInputError("bnn_sd dump does not contain a bnn");
                model.release();
                m->bnn_ = std::shared_ptr<const Bnn>(bnn);
                return m;
            }
        }
        throw VersionMismatchError("unknown measure kind in dump");
    }
};

}  // namespace adbench
