#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dtwar/dtw.hpp"
#include "dtwar/error.hpp"
#include "dtwar/signal.hpp"
#include "gen.hpp"

using namespace dtwar;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const auto dir = fs::temp_directory_path() / "dtwar_unit";
    fs::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("TimeSeries rejects bad shapes and non-finite values") {
    CHECK_THROWS_AS(TimeSeries(0, 3), ShapeError);
    CHECK_THROWS_AS(TimeSeries(1, 0), ShapeError);
    CHECK_THROWS_AS(TimeSeries(1, 3, {1.0, 2.0}), ShapeError);
    CHECK_THROWS(TimeSeries(1, 2, {1.0, std::nan("")}));
    CHECK_THROWS(TimeSeries(1, 2, {1.0, INFINITY}));

    TimeSeries x(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(x(0, 2) == 3);
    CHECK(x(1, 0) == 4);
    CHECK(x.channel(1)[2] == 6);
}

TEST_CASE("load_csv maps label then values") {
    const auto p = temp_file("one.csv", "1,0.0,0.5,1.0\n");
    const auto ds = load_csv(p, 1, 3);
    REQUIRE(ds.size() == 1);
    CHECK(ds.label(0) == 1);
    CHECK(ds.example(0).values() == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("load_csv reports the row of a malformed line") {
    const auto p = temp_file("bad.csv", "0,1,2,3\n1,0.0,0.5,1.0,2.0\n");
    try {
        load_csv(p, 1, 3);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    const auto q = temp_file("bad0.csv", "1,0.0,0.5,1.0,2.0\n");
    try {
        load_csv(q, 1, 3);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 0") != std::string::npos);
    }
    CHECK_THROWS_AS(load_csv(temp_file("nonnum.csv", "1,0.0,abc,1.0\n"), 1, 3), ParseError);
    CHECK_THROWS_AS(load_csv(temp_file("empty.csv", ""), 1, 3), ParseError);
    CHECK_THROWS(load_csv(fs::temp_directory_path() / "dtwar_unit" / "missing.csv", 1, 3));
}

TEST_CASE("load_csv unflattens channel-major rows") {
    // hand-written fixture: label, ch0 t0, ch0 t1, ch1 t0, ch1 t1
    const auto p = temp_file("mv.csv", "0,1,2,3,4\n1,5,6,7,8\n0,-1,-2,-3,-4\n");
    const auto ds = load_csv(p, 2, 2);
    REQUIRE(ds.size() == 3);
    CHECK(ds.example(1)(0, 0) == 5);
    CHECK(ds.example(1)(0, 1) == 6);
    CHECK(ds.example(1)(1, 0) == 7);
    CHECK(ds.example(1)(1, 1) == 8);
    CHECK(ds.example(2)(1, 1) == -4);
    CHECK(ds.labels() == std::vector<int>{0, 1, 0});

    const auto out = fs::temp_directory_path() / "dtwar_unit" / "mv_round.csv";
    write_csv(ds, out);
    const auto back = load_csv(out, 2, 2);
    CHECK(back.examples() == ds.examples());
    CHECK(back.labels() == ds.labels());
}

TEST_CASE("write_csv round-trips random values to full precision") {
    gen::Rng rng(11);
    LabeledDataset ds;
    for (int k = 0; k < 20; ++k) ds.push_back(gen::series(rng, 3, 7, 1e3), k % 3);
    const auto out = fs::temp_directory_path() / "dtwar_unit" / "round.csv";
    write_csv(ds, out);
    const auto back = load_csv(out, 3, 7);
    CHECK(back.examples() == ds.examples());
    CHECK(back.labels() == ds.labels());
}

TEST_CASE("synth_two_class is deterministic and balanced") {
    const auto a = synth_two_class(4, 1, 16, 7);
    const auto b = synth_two_class(4, 1, 16, 7);
    CHECK(a.examples() == b.examples());
    CHECK(a.labels() == b.labels());
    CHECK(synth_two_class(4, 1, 16, 8).examples() != a.examples());

    const auto big = synth_two_class(100, 2, 16, 3);
    const auto ones = std::count(big.labels().begin(), big.labels().end(), 1);
    CHECK(ones == 50);
    CHECK(big.channels() == 2);
    CHECK(big.length() == 16);

    CHECK_THROWS(synth_two_class(0, 1, 16, 1));
    CHECK_THROWS(synth_two_class(1, 1, 16, 1));
}

TEST_CASE("synthetic classes are separable by 1-NN under DTW") {
    const auto ds = synth_two_class(200, 1, 32, 1);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double best = INFINITY;
        int label = -1;
        for (std::size_t j = 0; j < ds.size(); ++j) {
            if (j == i) continue;
            const double d = dtw_value(ds.example(i), ds.example(j));
            if (d < best) {
                best = d;
                label = ds.label(j);
            }
        }
        correct += label == ds.label(i);
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(ds.size());
    MESSAGE("1-NN DTW leave-one-out accuracy: " << acc);
    CHECK(acc >= 0.9);
}

TEST_CASE("znormalize") {
    CHECK(znormalize(TimeSeries::univariate({1, 1, 1, 1})).values() ==
          std::vector<double>{0, 0, 0, 0});
    CHECK(znormalize(TimeSeries::univariate({0, 2})).values() == std::vector<double>{-1, 1});

    gen::Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = gen::series(rng, 3, static_cast<std::size_t>(gen::uniform_int(rng, 2, 40)),
                                   gen::uniform(rng, 0.1, 50.0));
        const auto z = znormalize(x);
        for (std::size_t c = 0; c < z.channels(); ++c) {
            const auto ch = z.channel(c);
            const double mean = std::accumulate(ch.begin(), ch.end(), 0.0) / static_cast<double>(ch.size());
            double var = 0.0;
            for (double v : ch) var += (v - mean) * (v - mean);
            const double sd = std::sqrt(var / static_cast<double>(ch.size()));
            CHECK(std::abs(mean) < 1e-10);
            CHECK(std::abs(sd - 1.0) < 1e-10);
        }
        const auto zz = znormalize(z);
        for (std::size_t k = 0; k < z.size(); ++k) {
            CHECK(zz.values()[k] == doctest::Approx(z.values()[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("split is stratified and deterministic") {
    LabeledDataset ds;
    for (int k = 0; k < 8; ++k) ds.push_back(TimeSeries::univariate({double(k), 0.0}), k % 2);
    const auto s = split(ds, {0.5, 0.25, 0.25}, 3);
    CHECK(s.indices(Split::Train).size() == 4);
    CHECK(s.indices(Split::Validation).size() == 2);
    CHECK(s.indices(Split::Test).size() == 2);
    for (auto tag : {Split::Train, Split::Validation, Split::Test}) {
        const auto sub = s.subset(tag);
        const auto ones = std::count(sub.labels().begin(), sub.labels().end(), 1);
        CHECK(static_cast<std::size_t>(ones) * 2 == sub.size());
    }
    CHECK(split(ds, {0.5, 0.25, 0.25}, 3).tags() == s.tags());
    CHECK_THROWS_AS(split(ds, {0.9, 0.1, 0.1}, 3), ConfigError);
    CHECK_THROWS_AS(split(ds, {1.0, 0.0, 0.0}, 3), ConfigError);

    LabeledDataset tiny;
    tiny.push_back(TimeSeries::univariate({0.0}), 0);
    tiny.push_back(TimeSeries::univariate({1.0}), 0);
    tiny.push_back(TimeSeries::univariate({2.0}), 0);
    tiny.push_back(TimeSeries::univariate({3.0}), 1);
    try {
        split(tiny, {0.6, 0.2, 0.2}, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("class 1") != std::string::npos);
    }
}

TEST_CASE("dataset subsets keep the class count") {
    const auto ds = split(synth_two_class(20, 1, 8, 2), {0.6, 0.2, 0.2}, 2);
    const auto test = ds.subset(Split::Test);
    CHECK(test.num_classes() == 2);
    std::vector<std::size_t> only_zero;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        if (ds.label(k) == 0) only_zero.push_back(k);
    }
    CHECK(ds.subset(only_zero).num_classes() == 2);
}
