#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "adbench/ensemble.hpp"
#include "adbench/linear_models.hpp"
#include "adbench/synth.hpp"
#include "adbench/tree.hpp"

using namespace adbench;

TEST_CASE("fully grown CART memorizes training data without duplicate rows") {
    const Dataset d = make_synth(SynthKind::sine, 80, 0.3, 41);
    TreeParams p;
    p.min_leaf = 1;
    DecisionTree t(p);
    t.fit(d);
    const auto pred = t.predict(d.features);
    for (std::size_t i = 0; i < d.n_rows(); ++i)
        CHECK(pred[i] == doctest::Approx(d.target[i]).epsilon(1e-12));
}

TEST_CASE("CART trees are reproducible and respect min_leaf") {
    const Dataset d = make_synth(SynthKind::sine, 60, 0.2, 7);
    TreeParams p;
    p.min_leaf = 5;
    DecisionTree a(p), b(p);
    a.fit(d);
    b.fit(d);
    REQUIRE(a.node_count() == b.node_count());
    const auto pa = a.predict(d.features);
    const auto pb = b.predict(d.features);
    CHECK(pa == pb);

    // every leaf mean comes from ≥ min_leaf points: count distinct values
    std::set<double> leaf_values;
    for (double v : pa) leaf_values.insert(v);
    CHECK(leaf_values.size() <= 60 / 5 + 1);
}

TEST_CASE("random forest on a smooth sine stays accurate in range") {
    const Dataset train = make_synth(SynthKind::sine, 300, 0.05, 11);
    const Dataset test = make_synth_test(SynthKind::sine, 60, 0.0, 12, false);
    ForestParams p;
    p.n_trees = 50;
    RandomForest f(p, 99);
    f.fit(train);
    const auto pred = f.predict(test.features);
    for (std::size_t i = 0; i < test.n_rows(); ++i)
        CHECK(std::abs(pred[i] - test.target[i]) < 0.2);
}

TEST_CASE("forest prediction equals the mean of its tree predictions exactly") {
    const Dataset d = make_synth(SynthKind::sine, 50, 0.1, 3);
    ForestParams p;
    p.n_trees = 7;
    RandomForest f(p, 5);
    f.fit(d);
    const Matrix trees = f.predict_trees(d.features);
    const auto pred = f.predict(d.features);
    for (std::size_t j = 0; j < d.n_rows(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < trees.rows; ++i) s += trees(i, j);
        CHECK(pred[j] == doctest::Approx(s / 7.0).epsilon(1e-12));
    }
}

TEST_CASE("ensemble degenerate and determinism contracts") {
    const Dataset d = make_synth(SynthKind::linear, 40, 0.1, 9);

    // n_members = 1, no bootstrap → identical to a single model fit
    Ensemble one;
    one.fit(d, 1, 42, [](std::uint64_t) { return std::make_unique<LinearRegression>(); },
            /*bootstrap=*/false);
    LinearRegression single;
    single.fit(d);
    const Matrix m = one.predict_members(d.features);
    const auto ps = single.predict(d.features);
    for (std::size_t j = 0; j < d.n_rows(); ++j)
        CHECK(m(0, j) == doctest::Approx(ps[j]).epsilon(1e-12));

    // all members on identical data (no bootstrap) → identical rows
    Ensemble same;
    same.fit(d, 4, 42, [](std::uint64_t) { return std::make_unique<LinearRegression>(); },
             /*bootstrap=*/false);
    const Matrix ms = same.predict_members(d.features);
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 0; j < d.n_rows(); ++j) CHECK(ms(i, j) == ms(0, j));

    // bootstrap with the same seed is reproducible
    Ensemble b1, b2;
    auto factory = [](std::uint64_t) { return std::make_unique<LinearRegression>(); };
    b1.fit(d, 5, 7, factory);
    b2.fit(d, 5, 7, factory);
    const Matrix p1 = b1.predict_members(d.features);
    const Matrix p2 = b2.predict_members(d.features);
    CHECK(p1.data == p2.data);
}

TEST_CASE("ensemble mean equals the brute-force average of member predictions") {
    const Dataset d = make_synth(SynthKind::sine, 60, 0.2, 21);
    Ensemble e;
    e.fit(d, 5, 13, [](std::uint64_t) { return std::make_unique<LinearRegression>(); });
    const Matrix members = e.predict_members(d.features);
    const auto avg = e.predict(d.features);
    for (std::size_t j = 0; j < d.n_rows(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) s += members(i, j);
        CHECK(avg[j] == doctest::Approx(s / 5.0).epsilon(1e-12));
    }
}
