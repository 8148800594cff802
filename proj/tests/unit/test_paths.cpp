#include <doctest.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include "dtwar/error.hpp"
#include "dtwar/paths.hpp"
#include "gen.hpp"

using namespace dtwar;

namespace {

// Direct evaluation of the two-way nearest-cell l1 sum, in floating point.
double path_sim_oracle(const AlignmentPath& a, const AlignmentPath& b) {
    auto one_way = [](const AlignmentPath& from, const AlignmentPath& to) {
        double s = 0.0;
        for (const auto& c : from) {
            int best = INT_MAX;
            for (const auto& d : to) best = std::min(best, std::abs(c.i - d.i) + std::abs(c.j - d.j));
            s += best;
        }
        return s;
    };
    return (one_way(a, b) + one_way(b, a)) / (2.0 * a.grid());
}

std::set<Cell> cell_set(const AlignmentPath& p) { return {p.begin(), p.end()}; }

// Central Delannoy numbers D(T-1, T-1).
long long delannoy(int m, int n) {
    if (m == 0 || n == 0) return 1;
    return delannoy(m - 1, n) + delannoy(m, n - 1) + delannoy(m - 1, n - 1);
}

}  // namespace

TEST_CASE("diagonal_path") {
    CHECK(diagonal_path(1).cells() == std::vector<Cell>{{1, 1}});
    CHECK(diagonal_path(4).cells() == std::vector<Cell>{{1, 1}, {2, 2}, {3, 3}, {4, 4}});
    for (int t = 1; t <= 64; ++t) CHECK_FALSE(validate(diagonal_path(t)).has_value());
}

TEST_CASE("validate accepts and rejects") {
    const AlignmentPath ok({{1, 1}, {2, 1}, {3, 2}, {4, 2}, {4, 3}, {4, 4}}, 4);
    CHECK_FALSE(validate(ok).has_value());

    const auto jump = validate(AlignmentPath({{1, 1}, {3, 3}}, 3));
    REQUIRE(jump.has_value());
    CHECK(jump->index == 1);

    const auto short_end = validate(AlignmentPath({{1, 1}, {2, 2}, {3, 3}}, 4));
    REQUIRE(short_end.has_value());

    CHECK(validate(AlignmentPath({{2, 1}, {2, 2}}, 2)).has_value());
    CHECK(validate(AlignmentPath({{1, 1}, {2, 2}, {2, 2}}, 2)).has_value());
    CHECK(validate(AlignmentPath({{1, 1}, {1, 0}, {2, 2}}, 2)).has_value());
    CHECK(validate(AlignmentPath({}, 2)).has_value());
    CHECK_THROWS(AlignmentPath::checked({{1, 1}, {3, 3}}, 3));
}

TEST_CASE("valid paths have between T and 2T-1 cells") {
    gen::Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const int t = gen::uniform_int(rng, 1, 30);
        const auto p = gen::path(rng, t);
        REQUIRE_FALSE(validate(p).has_value());
        CHECK(p.size() >= static_cast<std::size_t>(t));
        CHECK(p.size() <= static_cast<std::size_t>(2 * t - 1));
    }
}

TEST_CASE("random_admissible_path stays valid and inside the band") {
    const AdmissibleBand band{0.5};
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto p = random_admissible_path(32, band, seed);
        REQUIRE_FALSE(validate(p).has_value());
        for (const auto& c : p) CHECK(std::abs(c.i - c.j) <= 16);
    }
    CHECK(random_admissible_path(32, band, 9) == random_admissible_path(32, band, 9));

    const AdmissibleBand narrow{0.1};  // ceil(0.8) = 1
    REQUIRE(narrow.width(8) == 1);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        for (const auto& c : random_admissible_path(8, narrow, seed)) CHECK(std::abs(c.i - c.j) <= 1);
    }
    CHECK_THROWS(AdmissibleBand{0.0}.check());
    CHECK_THROWS(AdmissibleBand{1.5}.check());
}

TEST_CASE("random_admissible_path reaches every path when unconstrained") {
    for (int t : {3, 4}) {
        std::set<AlignmentPath> seen;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            seen.insert(random_admissible_path(t, AdmissibleBand{1.0}, seed));
        }
        const auto all = enumerate_paths(t);
        CHECK(seen == std::set<AlignmentPath>(all.begin(), all.end()));
    }
}

TEST_CASE("enumerate_paths counts") {
    CHECK(enumerate_paths(1).size() == 1);
    const auto two = enumerate_paths(2);
    REQUIRE(two.size() == 3);
    const std::set<AlignmentPath> expect{
        AlignmentPath({{1, 1}, {2, 2}}, 2),
        AlignmentPath({{1, 1}, {1, 2}, {2, 2}}, 2),
        AlignmentPath({{1, 1}, {2, 1}, {2, 2}}, 2),
    };
    CHECK(std::set<AlignmentPath>(two.begin(), two.end()) == expect);
    CHECK(enumerate_paths(3).size() == 13);
    for (int t = 1; t <= 7; ++t) {
        const auto all = enumerate_paths(t);
        CHECK(static_cast<long long>(all.size()) == delannoy(t - 1, t - 1));
        CHECK(std::set<AlignmentPath>(all.begin(), all.end()).size() == all.size());
        for (const auto& p : all) CHECK_FALSE(validate(p).has_value());
    }
    CHECK_THROWS(enumerate_paths(11));
}

TEST_CASE("path_sim worked example and oracle agreement") {
    const AlignmentPath p2({{1, 1}, {2, 1}, {2, 2}, {3, 3}, {4, 4}}, 4);
    CHECK(path_sim(diagonal_path(4), p2) == 0.125);

    gen::Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const int t = gen::uniform_int(rng, 1, 24);
        const auto a = gen::path(rng, t), b = gen::path(rng, t);
        CHECK(path_sim(a, b) == doctest::Approx(path_sim_oracle(a, b)).epsilon(1e-15));
        CHECK(path_sim(a, b) == path_sim(b, a));
        CHECK(path_sim(a, b) >= 0.0);
        CHECK(path_sim(a, a) == 0.0);
    }
    CHECK_THROWS_AS(path_sim(diagonal_path(3), diagonal_path(4)), ShapeError);
}

TEST_CASE("path_sim is zero exactly when the cell sets match") {
    for (int t = 1; t <= 5; ++t) {
        const auto all = enumerate_paths(t);
        for (const auto& a : all) {
            for (const auto& b : all) {
                CHECK((path_sim(a, b) == 0.0) == (cell_set(a) == cell_set(b)));
            }
        }
    }
}

TEST_CASE("path text form round-trips") {
    const AlignmentPath p({{1, 1}, {2, 1}, {2, 2}}, 2);
    CHECK(to_string(p) == "(1,1)-(2,1)-(2,2)");
    CHECK(parse_path("(1,1)-(2,1)-(2,2)") == p);
    gen::Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto q = gen::path(rng, gen::uniform_int(rng, 1, 20));
        CHECK(parse_path(to_string(q)) == q);
    }
    CHECK_THROWS(parse_path("(1,1)-(2"));
    CHECK_THROWS(parse_path(""));
}

TEST_CASE("transposed swaps coordinates") {
    const AlignmentPath p({{1, 1}, {2, 1}, {2, 2}}, 2);
    CHECK(p.transposed().cells() == std::vector<Cell>{{1, 1}, {1, 2}, {2, 2}});
}
