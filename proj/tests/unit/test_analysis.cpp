#include <doctest.h>

#include <cmath>

#include "dtwar/analysis.hpp"
#include "dtwar/error.hpp"
#include "gen.hpp"

using namespace dtwar;

namespace {

double embedded_distance(const MdsEmbedding& e, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t d = 0; d < e.dims; ++d) s += (e(a, d) - e(b, d)) * (e(a, d) - e(b, d));
    return std::sqrt(s);
}

DistanceMatrix plain_matrix(std::size_t m, const std::vector<double>& v) {
    DistanceMatrix d;
    d.size = m;
    d.values = v;
    d.measure = Measure::L2;
    return d;
}

}  // namespace

TEST_CASE("distance matrix basics") {
    gen::Rng rng(1);
    LabeledDataset one;
    one.push_back(gen::series(rng, 1, 5), 0);
    const auto d1 = distance_matrix(one, Measure::Dtw);
    CHECK(d1.size == 1);
    CHECK(d1.values == std::vector<double>{0.0});

    LabeledDataset dup;
    const auto x = gen::series(rng, 2, 7);
    dup.push_back(x, 0);
    dup.push_back(x, 1);
    for (auto m : {Measure::Dtw, Measure::L2}) CHECK(distance_matrix(dup, m)(0, 1) == 0.0);

    LabeledDataset ds;
    for (int k = 0; k < 12; ++k) ds.push_back(gen::series(rng, 2, 9), k % 2);
    for (auto metric : {PointMetric::squared_l2(), PointMetric::lp(2.0), PointMetric::l1()}) {
        const auto dtw_m = distance_matrix(ds, Measure::Dtw, metric, 3);
        const auto l2_m = distance_matrix(ds, Measure::L2, metric);
        CHECK(l2_m.squared == (metric == PointMetric::squared_l2()));
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(dtw_m(i, i) == 0.0);
            for (std::size_t j = 0; j < ds.size(); ++j) {
                CHECK(dtw_m(i, j) == dtw_m(j, i));
                CHECK(dtw_m(i, j) <= l2_m(i, j));
                if (i < j) CHECK(dtw_m(i, j) == dtw_value(ds.example(i), ds.example(j), metric));
            }
        }
        CHECK(distance_matrix(ds, Measure::Dtw, metric, 1).values == dtw_m.values);
    }
    const auto p = random_admissible_path(9, AdmissibleBand{}, 3);
    const auto dp = distance_matrix(ds, Measure::DistP, PointMetric::squared_l2(), 1, p);
    CHECK(dp(2, 5) == dist_p(ds.example(2), ds.example(5), p));
    CHECK_THROWS(distance_matrix(ds, Measure::DistP));
    CHECK_THROWS(distance_matrix(ds, Measure::DistP, PointMetric::squared_l2(), 1, diagonal_path(4)));
    CHECK(parse_measure("dist_p") == Measure::DistP);
    CHECK_THROWS_AS(parse_measure("cosine"), ConfigError);
}

TEST_CASE("MDS of an equilateral triangle") {
    const auto e = mds_embed(plain_matrix(3, {0, 1, 1, 1, 0, 1, 1, 1, 0}));
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = a + 1; b < 3; ++b) CHECK(std::abs(embedded_distance(e, a, b) - 1.0) < 1e-9);
    }
    CHECK(e.clamped == 0);
}

TEST_CASE("MDS reconstructs planar configurations") {
    gen::Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = static_cast<std::size_t>(gen::uniform_int(rng, 4, 15));
        std::vector<double> pts(2 * m);
        for (auto& v : pts) v = gen::uniform(rng, -5, 5);
        std::vector<double> d(m * m);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                d[a * m + b] = std::hypot(pts[2 * a] - pts[2 * b], pts[2 * a + 1] - pts[2 * b + 1]);
            }
        }
        const auto e = mds_embed(plain_matrix(m, d));
        CHECK(e.eigenvalues[0] >= e.eigenvalues[1]);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) CHECK(std::abs(embedded_distance(e, a, b) - d[a * m + b]) < 1e-9);
        }
        // already-squared input gives the same embedding
        auto sq = plain_matrix(m, d);
        for (auto& v : sq.values) v *= v;
        sq.squared = true;
        const auto e2 = mds_embed(sq);
        for (std::size_t k = 0; k < e.coords.size(); ++k) CHECK(e2.coords[k] == doctest::Approx(e.coords[k]).epsilon(1e-9));
    }
    CHECK_THROWS(mds_embed(plain_matrix(2, {0, 1, 1, 0})));
}

TEST_CASE("silhouette of a hand-worked layout") {
    const std::vector<double> pts{0, 1, 10, 11};
    const std::vector<int> labels{0, 0, 1, 1};
    // point 0: a = 1, b = (10 + 11) / 2; the layout is symmetric
    const double s0 = 1.0 - 1.0 / 10.5;
    const double s1 = 1.0 - 1.0 / 9.5;
    CHECK(silhouette(pts, 1, labels) == doctest::Approx((s0 + s1) / 2.0).epsilon(1e-12));

    const std::vector<int> singleton{0, 0, 0, 1};
    const double v = silhouette(pts, 1, singleton);
    CHECK(v < 1.0);
    CHECK_THROWS(silhouette(pts, 1, std::vector<int>{0, 0, 0, 0}));
}

TEST_CASE("DTW separates warped classes better than l2 in the MDS plane") {
    const auto ds = synth_two_class(80, 1, 32, 5);
    const auto dtw_e = mds_embed(distance_matrix(ds, Measure::Dtw));
    const auto l2_e = mds_embed(distance_matrix(ds, Measure::L2));
    const double s_dtw = silhouette(dtw_e, ds.labels());
    const double s_l2 = silhouette(l2_e, ds.labels());
    MESSAGE("silhouette dtw " << s_dtw << ", l2 " << s_l2);
    CHECK(s_dtw > s_l2);
}

TEST_CASE("runtime bench records") {
    const std::vector<std::size_t> lengths{8, 16};
    const auto recs = runtime_bench(lengths, 2, 10, 3, 1e-4);
    REQUIRE(recs.size() == 6);
    const char* names[] = {"exact-dtw", "soft-dtw", "dist-p"};
    for (std::size_t k = 0; k < recs.size(); ++k) {
        CHECK(recs[k].method == names[k % 3]);
        CHECK(recs[k].length == lengths[k / 3]);
        CHECK(recs[k].channels == 2);
        CHECK(recs[k].repetitions == 10);
        CHECK(recs[k].inner >= 1);
        CHECK(recs[k].mean_seconds > 0.0);
        CHECK(recs[k].std_seconds >= 0.0);
    }
    CHECK_THROWS_AS(runtime_bench(lengths, 2, 9, 3), ConfigError);
}

TEST_CASE("pathsim trace") {
    gen::Rng rng(4);
    const auto ds = synth_two_class(20, 1, 16, 2);
    const Classifier f(ArchitectureSpec::preset("mlp", 1, 16, 2), 1);
    AttackConfig cfg;
    cfg.max_iters = 60;
    cfg.snapshot_every = 20;
    cfg.path_seed = 12;
    const auto& x = ds.example(0);
    const auto r = dtw_ar_attack(f, x, 1 - f.predict(x), cfg);
    const auto trace = pathsim_trace(r, x, cfg.metric);
    REQUIRE(trace.size() == 4);
    CHECK(trace[0].iteration == 0);
    // at iteration 0 X_adv = X, whose optimal path is the diagonal
    CHECK(trace[0].path_sim == path_sim(*r.path, diagonal_path(16)));
    CHECK(trace[3].iteration == 60);

    auto none = r;
    none.snapshots.clear();
    CHECK_THROWS(pathsim_trace(none, x, cfg.metric));
    none = r;
    none.path.reset();
    CHECK_THROWS(pathsim_trace(none, x, cfg.metric));
}
