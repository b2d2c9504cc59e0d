#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adbench/ad_measures.hpp"
#include "adbench/linear_models.hpp"
#include "adbench/model_zoo.hpp"
#include "adbench/synth.hpp"
#include "oracles.hpp"

using namespace adbench;

namespace {

Dataset from_matrix(const Matrix& x, std::vector<double> y = {}) {
    Dataset d;
    d.name = "toy";
    d.features = x;
    d.target = y.empty() ? std::vector<double>(x.rows, 0.0) : std::move(y);
    for (std::size_t c = 0; c < x.cols; ++c) {
        d.feature_names.push_back("f" + std::to_string(c));
        d.categorical.push_back(false);
        d.levels.emplace_back();
    }
    d.target_name = "y";
    return d;
}

Matrix col(std::initializer_list<double> vals) {
    Matrix m(vals.size(), 1);
    std::size_t i = 0;
    for (double v : vals) m(i++, 0) = v;
    return m;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -2, double hi = 2) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("kappa: fifth neighbor distance, duplicates, brute force") {
    const Dataset train = from_matrix(col({0, 1, 2, 3, 4}));
    const auto m = fit_measure(MeasureKind::kappa, train, {.k_neighbors = 5});
    const std::vector<double> x{0.0};
    CHECK(m->score(x) == doctest::Approx(4.0).epsilon(1e-12));

    // x duplicated ≥ k times in train → 0
    Matrix dup(6, 1);
    for (std::size_t i = 0; i < 5; ++i) dup(i, 0) = 1.5;
    dup(5, 0) = 9.0;
    const auto md = fit_measure(MeasureKind::kappa, from_matrix(dup), {.k_neighbors = 5});
    CHECK(md->score(std::vector<double>{1.5}) == 0.0);

    Rng rng(100);
    const Matrix big = random_matrix(30, 3, rng);
    const auto mb = fit_measure(MeasureKind::kappa, from_matrix(big), {.k_neighbors = 5});
    for (int t = 0; t < 20; ++t) {
        std::vector<double> q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        CHECK(mb->score(q) == doctest::Approx(oracle::kappa(big, q, 5)).epsilon(1e-12));
    }
}

TEST_CASE("k exceeding the training size is rejected at fit") {
    const Dataset train = from_matrix(col({0, 1, 2, 3}));
    CHECK_THROWS_AS((void)fit_measure(MeasureKind::kappa, train, {.k_neighbors = 5}),
                    InvalidInputError);
}

TEST_CASE("min_kappa: zero on members, 0.4 on the hand case, equals kappa|k=1") {
    const Dataset train = from_matrix(col({0, 1, 2, 3, 4}));
    const auto m = fit_measure(MeasureKind::min_kappa, train, {.k_neighbors = 5});
    CHECK(m->score(std::vector<double>{2.0}) == 0.0);
    CHECK(m->score(std::vector<double>{2.4}) == doctest::Approx(0.4).epsilon(1e-12));

    Rng rng(7);
    const Matrix big = random_matrix(40, 2, rng);
    const auto mk = fit_measure(MeasureKind::min_kappa, from_matrix(big), {.k_neighbors = 5});
    const auto k1 = fit_measure(MeasureKind::kappa, from_matrix(big), {.k_neighbors = 1});
    for (int t = 0; t < 50; ++t) {
        std::vector<double> q{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        CHECK(mk->score(q) == doctest::Approx(k1->score(q)).epsilon(1e-12));
    }
}

TEST_CASE("gamma: mean distance, sandwich min_kappa ≤ gamma ≤ kappa") {
    const Dataset train = from_matrix(col({0, 1, 2, 3, 4}));
    const auto m = fit_measure(MeasureKind::gamma, train, {.k_neighbors = 5});
    CHECK(m->score(std::vector<double>{0.0}) == doctest::Approx(2.0).epsilon(1e-12));

    Rng rng(8);
    const Matrix big = random_matrix(35, 3, rng);
    const Dataset btrain = from_matrix(big);
    const auto mg = fit_measure(MeasureKind::gamma, btrain, {.k_neighbors = 4});
    const auto mk = fit_measure(MeasureKind::kappa, btrain, {.k_neighbors = 4});
    const auto mn = fit_measure(MeasureKind::min_kappa, btrain, {.k_neighbors = 4});
    const auto md = fit_measure(MeasureKind::delta, btrain, {.k_neighbors = 4});
    for (int t = 0; t < 100; ++t) {
        std::vector<double> q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double g = mg->score(q);
        CHECK(g >= mn->score(q) - 1e-12);
        CHECK(g <= mk->score(q) + 1e-12);
        CHECK(md->score(q) <= g + 1e-12);  // Jensen: ‖mean vec‖ ≤ mean dist
        CHECK(g == doctest::Approx(oracle::gamma(big, q, 4)).epsilon(1e-12));
    }
}

TEST_CASE("delta: cancels at the neighbor centroid, hand case 2.0") {
    Matrix two(2, 1);
    two(0, 0) = 1.0;
    two(1, 0) = 3.0;
    const auto m = fit_measure(MeasureKind::delta, from_matrix(two), {.k_neighbors = 2});
    CHECK(m->score(std::vector<double>{2.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m->score(std::vector<double>{0.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("cosine: parallel 0, orthogonal 1, antiparallel 2, zero vectors rejected") {
    Matrix nb(1, 2);
    nb(0, 0) = 0.0;
    nb(0, 1) = 1.0;
    const auto m = fit_measure(MeasureKind::cosine, from_matrix(nb), {.k_neighbors = 1});
    CHECK(m->score(std::vector<double>{1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m->score(std::vector<double>{0.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));

    Matrix anti(1, 2);
    anti(0, 0) = -1.0;
    anti(0, 1) = 0.0;
    const auto ma = fit_measure(MeasureKind::cosine, from_matrix(anti), {.k_neighbors = 1});
    CHECK(ma->score(std::vector<double>{1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)ma->score(std::vector<double>{0.0, 0.0}), ZeroVectorError);
}

TEST_CASE("leverage: zero vector, identity design, hat-matrix identities") {
    const auto mi = fit_measure(MeasureKind::leverage, from_matrix(Matrix::identity(2)));
    CHECK(mi->score(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(mi->score(std::vector<double>{1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(12);
    const Matrix x = random_matrix(25, 4, rng);
    const auto m = fit_measure(MeasureKind::leverage, from_matrix(x));
    double trace = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double h = m->score(x.row(i));
        CHECK(h >= -1e-12);
        CHECK(h <= 1.0 + 1e-9);
        trace += h;
    }
    CHECK(trace == doctest::Approx(4.0).epsilon(1e-8));  // Σ h_ii = rank(X)
}

TEST_CASE("leverage survives a rank-deficient design via jitter") {
    Matrix x(10, 2);
    Rng rng(4);
    for (std::size_t r = 0; r < 10; ++r) {
        x(r, 0) = rng.next_normal();
        x(r, 1) = 3.0 * x(r, 0);  // collinear
    }
    const auto m = fit_measure(MeasureKind::leverage, from_matrix(x));
    CHECK(std::isfinite(m->score(x.row(0))));
    CHECK(m->score(x.row(0)) >= 0.0);
}

TEST_CASE("ensemble_sd: identical members 0, {1,2,3} → 1, two-pass oracle") {
    const Dataset train = make_synth(SynthKind::sine, 30, 0.1, 5);
    auto identical = std::make_shared<Ensemble>();
    identical->fit(train, 4, 1, [](std::uint64_t) { return std::make_unique<LinearRegression>(); },
                   /*bootstrap=*/false);
    MeasureContext ctx;
    ctx.ensemble = identical;
    const auto m0 = fit_measure(MeasureKind::ensemble_sd, train, {}, ctx);
    CHECK(m0->score(std::vector<double>{0.3}) == 0.0);

    // fixed member predictions {1,2,3} via hand-built constant regressors
    struct Const : Regressor {
        double v;
        explicit Const(double val) : v(val) { }
        std::string kind() const override { return "const"; }
        void do_fit(const Dataset&) override {}
        std::vector<double> do_predict(const Matrix& x) const override {
            return std::vector<double>(x.rows, v);
        }
    };
    auto fixed = std::make_shared<Ensemble>();
    for (double v : {1.0, 2.0, 3.0}) {
        auto c = std::make_unique<Const>(v);
        c->fit(train);
        fixed->add_member(std::move(c));
    }
    MeasureContext fctx;
    fctx.ensemble = fixed;
    const auto m1 = fit_measure(MeasureKind::ensemble_sd, train, {}, fctx);
    CHECK(m1->score(std::vector<double>{0.0}) == doctest::Approx(1.0).epsilon(1e-12));

    auto bagged = std::make_shared<Ensemble>();
    bagged->fit(train, 9, 2, [](std::uint64_t) { return std::make_unique<LinearRegression>(); });
    MeasureContext bctx;
    bctx.ensemble = bagged;
    const auto mb = fit_measure(MeasureKind::ensemble_sd, train, {}, bctx);
    Rng rng(9);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> q{rng.uniform(-1, 1)};
        const auto preds = bagged->predict_members_one(q);
        CHECK(mb->score(q) == doctest::Approx(oracle::sample_sd(preds)).epsilon(1e-12));
    }
}

TEST_CASE("correll: training-point match 0, reversed ranks 2, brute-force oracle") {
    const Dataset train = make_synth(SynthKind::sine, 20, 0.2, 6);
    auto bagged = std::make_shared<Ensemble>();
    bagged->fit(train, 10, 3, [](std::uint64_t s) {
        TreeParams p;
        p.min_leaf = 2;
        return std::make_unique<DecisionTree>(p, s);
    });
    MeasureContext ctx;
    ctx.ensemble = bagged;
    const auto m = fit_measure(MeasureKind::correll, train, {}, ctx);

    // query equal to a training point: its member vector matches that train
    // column exactly, so max Spearman = 1 and the score is 0
    CHECK(m->score(train.features.row(3)) == doctest::Approx(0.0).epsilon(1e-12));

    // brute-force over all training points on random queries
    const auto& cm = dynamic_cast<const CorrellMeasure&>(*m);
    Rng rng(14);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> q{rng.uniform(-1.5, 1.5)};
        const auto preds = bagged->predict_members_one(q);
        CHECK(m->score(q) ==
              doctest::Approx(oracle::correll(cm.train_prediction_matrix(), preds)).epsilon(1e-10));
    }
}

TEST_CASE("correll hand case: member vectors (1,2,3) against reversed train predictions") {
    // one training point whose member prediction vector is (3,2,1) while the
    // query produces (1,2,3): Spearman = −1, score = 2
    struct Probe : Regressor {
        double train_v, query_v;
        Probe(double tv, double qv) : train_v(tv), query_v(qv) {}
        std::string kind() const override { return "probe"; }
        void do_fit(const Dataset&) override {}
        std::vector<double> do_predict(const Matrix& x) const override {
            std::vector<double> out(x.rows);
            for (std::size_t r = 0; r < x.rows; ++r) out[r] = x(r, 0) < 0 ? train_v : query_v;
            return out;
        }
    };
    Matrix tx(1, 1);
    tx(0, 0) = -1.0;  // the single training point triggers train_v
    const Dataset train = from_matrix(tx);
    auto e = std::make_shared<Ensemble>();
    for (const auto& [tv, qv] : {std::pair{3.0, 1.0}, {2.0, 2.0}, {1.0, 3.0}}) {
        auto p = std::make_unique<Probe>(tv, qv);
        p->fit(train);
        e->add_member(std::move(p));
    }
    MeasureContext ctx;
    ctx.ensemble = e;
    const auto m = fit_measure(MeasureKind::correll, train, {}, ctx);
    CHECK(m->score(std::vector<double>{1.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rf_sd equals ensemble_sd over the same trees; degenerate forests score 0") {
    const Dataset train = make_synth(SynthKind::sine, 60, 0.15, 7);
    ForestParams p;
    p.n_trees = 12;
    auto forest = std::make_shared<RandomForest>(p, 8);
    forest->fit(train);
    MeasureContext ctx;
    ctx.forest = forest;
    const auto rf = fit_measure(MeasureKind::rf_sd, train, {}, ctx);

    auto tree_ensemble = std::shared_ptr<const Ensemble>(forest, &forest->trees());
    MeasureContext ectx;
    ectx.ensemble = tree_ensemble;
    const auto es = fit_measure(MeasureKind::ensemble_sd, train, {}, ectx);

    Rng rng(15);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> q{rng.uniform(-1.2, 1.2)};
        CHECK(rf->score(q) == doctest::Approx(es->score(q)).epsilon(1e-12));
    }

    ForestParams one;
    one.n_trees = 1;
    auto single = std::make_shared<RandomForest>(one, 3);
    single->fit(train);
    MeasureContext sctx;
    sctx.forest = single;
    const auto m1 = fit_measure(MeasureKind::rf_sd, train, {}, sctx);
    CHECK(m1->score(std::vector<double>{0.1}) == 0.0);

    // all trees agree (constant target) → 0
    Dataset flat = train;
    for (auto& y : flat.target) y = 3.25;
    auto agree = std::make_shared<RandomForest>(p, 4);
    agree->fit(flat);
    MeasureContext actx;
    actx.forest = agree;
    const auto ma = fit_measure(MeasureKind::rf_sd, flat, {}, actx);
    CHECK(ma->score(std::vector<double>{0.4}) == 0.0);
    CHECK(ma->score(std::vector<double>{2.7}) == 0.0);
}

TEST_CASE("translation invariance holds for distance measures and fails for leverage/cosine") {
    Rng rng(19);
    const Matrix x = random_matrix(20, 2, rng, 0.5, 2.0);
    const Dataset train = from_matrix(x);
    Matrix xs = x;
    const std::vector<double> shift{3.0, -2.0};
    for (std::size_t r = 0; r < xs.rows; ++r)
        for (std::size_t c = 0; c < 2; ++c) xs(r, c) += shift[c];
    const Dataset strain = from_matrix(xs);

    const MeasureOptions opt{.k_neighbors = 4};
    for (const auto kind :
         {MeasureKind::kappa, MeasureKind::min_kappa, MeasureKind::gamma, MeasureKind::delta}) {
        const auto m = fit_measure(kind, train, opt);
        const auto ms = fit_measure(kind, strain, opt);
        for (int t = 0; t < 10; ++t) {
            std::vector<double> q{rng.uniform(0.5, 2), rng.uniform(0.5, 2)};
            std::vector<double> qs{q[0] + shift[0], q[1] + shift[1]};
            CHECK(m->score(q) == doctest::Approx(ms->score(qs)).epsilon(1e-9));
        }
    }
    const auto lev = fit_measure(MeasureKind::leverage, train);
    const auto levs = fit_measure(MeasureKind::leverage, strain);
    const auto cos = fit_measure(MeasureKind::cosine, train, opt);
    const auto coss = fit_measure(MeasureKind::cosine, strain, opt);
    std::vector<double> q{1.0, 1.5};
    std::vector<double> qs{q[0] + shift[0], q[1] + shift[1]};
    CHECK(std::abs(lev->score(q) - levs->score(qs)) > 1e-6);
    CHECK(std::abs(cos->score(q) - coss->score(qs)) > 1e-6);
}

TEST_CASE("duplicate-of-training-point collapses the whole measure family") {
    Rng rng(23);
    Matrix x = random_matrix(12, 2, rng, 0.5, 2.0);
    // plant 5 duplicates of the query
    const std::vector<double> q{1.2, 0.9};
    for (std::size_t r = 0; r < 5; ++r) {
        x(r, 0) = q[0];
        x(r, 1) = q[1];
    }
    const Dataset train = from_matrix(x);
    const MeasureOptions opt{.k_neighbors = 5};
    CHECK(fit_measure(MeasureKind::kappa, train, opt)->score(q) == 0.0);
    CHECK(fit_measure(MeasureKind::min_kappa, train, opt)->score(q) == 0.0);
    CHECK(fit_measure(MeasureKind::cosine, train, opt)->score(q) ==
          doctest::Approx(0.0).epsilon(1e-12));

    Gpr g(1.0, 1e-6);
    Dataset gd = train;
    Rng yr(5);
    for (auto& y : gd.target) y = yr.next_normal();
    g.fit(gd);
    auto gp = std::make_shared<Gpr>(std::move(g));
    MeasureContext ctx;
    ctx.gpr = gp;
    CHECK(fit_measure(MeasureKind::gpr_var, gd, {}, ctx)->score(q) <= 1e-6 + 1e-8);
}

TEST_CASE("score_all: alignment, errors, batch equals one-by-one") {
    const Dataset train = make_synth(SynthKind::sine, 40, 0.1, 31);
    const Dataset test = make_synth_test(SynthKind::sine, 12, 0.1, 32, false);
    LinearRegression model;
    model.fit(train);
    const EvalReport eval = evaluate(model, test);

    const auto m = fit_measure(MeasureKind::gamma, train, {.k_neighbors = 5});
    const AdScores s = m->score_all(test, eval);
    REQUIRE(s.values.size() == 12);
    REQUIRE(s.abs_errors.size() == 12);
    REQUIRE(s.point_ids.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(s.point_ids[i] == i);
        CHECK(s.values[i] == doctest::Approx(m->score(test.features.row(i))).epsilon(1e-12));
        CHECK(s.values[i] >= 0.0);
        CHECK(std::isfinite(s.values[i]));
    }

    Dataset empty = test;
    empty.features = Matrix(0, 1);
    empty.target.clear();
    CHECK_THROWS_AS((void)m->score_all(empty, eval), DegenerateInputError);

    EvalReport bad = eval;
    bad.abs_errors.pop_back();
    CHECK_THROWS_AS((void)m->score_all(test, bad), LengthMismatchError);
}

TEST_CASE("missing model context fails fast") {
    const Dataset train = make_synth(SynthKind::sine, 20, 0.1, 2);
    CHECK_THROWS_AS((void)fit_measure(MeasureKind::ensemble_sd, train), MissingModelContextError);
    CHECK_THROWS_AS((void)fit_measure(MeasureKind::gpr_var, train), MissingModelContextError);
    CHECK_THROWS_AS((void)fit_measure(MeasureKind::rf_sd, train), MissingModelContextError);
    CHECK_THROWS_AS((void)fit_measure(MeasureKind::bnn_sd, train), MissingModelContextError);
}

TEST_CASE("directional sanity: confidence measures rise on extrapolated points") {
    const Dataset train = make_synth(SynthKind::sine, 150, 0.01, 51);
    const Dataset test = make_synth_test(SynthKind::sine, 60, 0.0, 52, true);

    auto median_split = [&](const AdMeasure& m) {
        std::vector<double> in, out;
        for (std::size_t i = 0; i < test.n_rows(); ++i) {
            const double v = m.score_point(test.features.row(i), i);
            (test.features(i, 0) <= 1.0 ? in : out).push_back(v);
        }
        return std::pair{median(in), median(out)};
    };

    auto bagged = std::make_shared<Ensemble>();
    ModelSpec mlp_spec{.kind = "mlp", .hyperparameters = {{"epochs", 100}}};
    bagged->fit(train, 10, 77,
                [&](std::uint64_t s) { return make_regressor(mlp_spec, s); });
    MeasureContext ectx;
    ectx.ensemble = bagged;
    const auto es = fit_measure(MeasureKind::ensemble_sd, train, {}, ectx);
    auto [in_sd, out_sd] = median_split(*es);
    CHECK(out_sd > in_sd);

    auto gpr = std::make_shared<Gpr>();
    gpr->fit(train);
    MeasureContext gctx;
    gctx.gpr = gpr;
    const auto gv = fit_measure(MeasureKind::gpr_var, train, {}, gctx);
    auto [in_gv, out_gv] = median_split(*gv);
    CHECK(out_gv > in_gv);

    ForestParams fp;
    fp.n_trees = 30;
    auto forest = std::make_shared<RandomForest>(fp, 78);
    forest->fit(train);
    MeasureContext fctx;
    fctx.forest = forest;
    const auto rf = fit_measure(MeasureKind::rf_sd, train, {}, fctx);
    auto [in_rf, out_rf] = median_split(*rf);
    CHECK(out_rf > in_rf);

    BnnParams bp;
    bp.epochs = 150;
    auto bnn = std::make_shared<Bnn>(bp, 79);
    bnn->fit(train);
    MeasureContext bctx;
    bctx.bnn = bnn;
    const auto bs = fit_measure(MeasureKind::bnn_sd, train, {.n_samples = 200, .seed = 5}, bctx);
    auto [in_bs, out_bs] = median_split(*bs);
    CHECK(out_bs > in_bs);
}
