#include "dtwar/paths.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dtwar/error.hpp"

namespace dtwar {

AlignmentPath AlignmentPath::checked(std::vector<Cell> cells, int grid) {
    AlignmentPath p(std::move(cells), grid);
    if (auto v = validate(p)) {
        throw Error("invalid alignment path at index " + std::to_string(v->index) + ": " +
                    v->message);
    }
    return p;
}

AlignmentPath AlignmentPath::transposed() const {
    std::vector<Cell> out;
    out.reserve(cells_.size());
    for (auto c : cells_) out.push_back({c.j, c.i});
    return {std::move(out), grid_};
}

std::optional<PathViolation> validate(const AlignmentPath& p) {
    const int T = p.grid();
    const auto& cells = p.cells();
    if (T < 1) return PathViolation{0, "grid size must be at least 1"};
    if (cells.empty()) return PathViolation{0, "path is empty"};
    if (cells.front() != Cell{1, 1}) return PathViolation{0, "path must start at (1,1)"};
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto c = cells[k];
        if (c.i < 1 || c.j < 1 || c.i > T || c.j > T) {
            return PathViolation{k, "cell outside the " + std::to_string(T) + "x" +
                                        std::to_string(T) + " grid"};
        }
        if (k > 0) {
            const int di = c.i - cells[k - 1].i;
            const int dj = c.j - cells[k - 1].j;
            const bool unit = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
            if (!unit) {
                return PathViolation{k, "step " + std::to_string(k) +
                                            " is not a unit monotone move"};
            }
        }
    }
    if (cells.back() != Cell{T, T}) {
        return PathViolation{cells.size() - 1, "path must end at (" + std::to_string(T) + "," +
                                                   std::to_string(T) + ")"};
    }
    // unit monotone steps from (1,1) to (T,T) already force T <= |P| <= 2T-1
    return std::nullopt;
}

void AdmissibleBand::check() const {
    if (!(radius > 0.0 && radius <= 1.0)) {
        throw ConfigError("band radius must lie in (0, 1]");
    }
}

int AdmissibleBand::width(int grid) const {
    const double w = std::ceil(radius * static_cast<double>(grid));
    return std::max(1, static_cast<int>(w));
}

AlignmentPath diagonal_path(int grid) {
    if (grid < 1) throw Error("diagonal_path: T must be at least 1");
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(grid));
    for (int t = 1; t <= grid; ++t) cells.push_back({t, t});
    return {std::move(cells), grid};
}

AlignmentPath random_admissible_path(int grid, AdmissibleBand band, std::uint64_t seed) {
    if (grid < 2) throw Error("random_admissible_path: T must be at least 2");
    band.check();
    std::mt19937_64 rng(seed);
    std::vector<Cell> cells{{1, 1}};
    cells.reserve(static_cast<std::size_t>(2 * grid));
    Cell at{1, 1};
    Cell options[3];
    while (at != Cell{grid, grid}) {
        int count = 0;
        for (Cell next : {Cell{at.i + 1, at.j}, Cell{at.i, at.j + 1}, Cell{at.i + 1, at.j + 1}}) {
            if (next.i <= grid && next.j <= grid && band.contains(next, grid)) {
                options[count++] = next;
            }
        }
        // the diagonal move, or the lone edge move on the last row/column,
        // is always available, so count >= 1
        if (count == 1) {
            at = options[0];
        } else {
            std::uniform_int_distribution<int> pick(0, count - 1);
            at = options[pick(rng)];
        }
        cells.push_back(at);
    }
    return {std::move(cells), grid};
}

namespace {

void walk(int grid, std::vector<Cell>& cells,
          const std::function<void(const std::vector<Cell>&)>& visit) {
    const Cell at = cells.back();
    if (at.i == grid && at.j == grid) {
        visit(cells);
        return;
    }
    for (Cell next : {Cell{at.i + 1, at.j + 1}, Cell{at.i, at.j + 1}, Cell{at.i + 1, at.j}}) {
        if (next.i > grid || next.j > grid) continue;
        cells.push_back(next);
        walk(grid, cells, visit);
        cells.pop_back();
    }
}

void require_enumerable(int grid) {
    if (grid < 1) throw Error("path enumeration: T must be at least 1");
    if (grid > kMaxEnumerationGrid) {
        throw Error("path enumeration: T = " + std::to_string(grid) + " exceeds the limit of " +
                    std::to_string(kMaxEnumerationGrid));
    }
}

}  // namespace

void for_each_path(int grid, const std::function<void(const std::vector<Cell>&)>& visit) {
    require_enumerable(grid);
    std::vector<Cell> cells{{1, 1}};
    cells.reserve(static_cast<std::size_t>(2 * grid));
    walk(grid, cells, visit);
}

std::vector<AlignmentPath> enumerate_paths(int grid) {
    std::vector<AlignmentPath> out;
    for_each_path(grid, [&](const std::vector<Cell>& cells) { out.emplace_back(cells, grid); });
    return out;
}

namespace {

std::int64_t directed_sum(const std::vector<Cell>& from, const std::vector<Cell>& to) {
    std::int64_t total = 0;
    for (auto c : from) {
        int best = std::numeric_limits<int>::max();
        for (auto d : to) {
            best = std::min(best, std::abs(c.i - d.i) + std::abs(c.j - d.j));
            if (best == 0) break;
        }
        total += best;
    }
    return total;
}

}  // namespace

std::int64_t path_sim_numerator(const AlignmentPath& a, const AlignmentPath& b) {
    if (a.grid() != b.grid()) {
        throw ShapeError("path_sim: grid sizes differ (" + std::to_string(a.grid()) + " vs " +
                         std::to_string(b.grid()) + ")");
    }
    if (a.cells().empty() || b.cells().empty()) throw Error("path_sim: empty path");
    return directed_sum(a.cells(), b.cells()) + directed_sum(b.cells(), a.cells());
}

double path_sim(const AlignmentPath& a, const AlignmentPath& b) {
    const auto num = path_sim_numerator(a, b);
    return static_cast<double>(num) / (2.0 * static_cast<double>(a.grid()));
}

std::string to_string(const AlignmentPath& p) {
    std::string out;
    out.reserve(p.size() * 8);
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) out += '-';
        out += '(';
        out += std::to_string(p.cells()[k].i);
        out += ',';
        out += std::to_string(p.cells()[k].j);
        out += ')';
    }
    return out;
}

AlignmentPath parse_path(std::string_view text) {
    std::vector<Cell> cells;
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> ParseError {
        return ParseError("path text, offset " + std::to_string(pos) + ": " + why);
    };
    auto skip_space = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                     text[pos] == '\n' || text[pos] == '\r')) {
            ++pos;
        }
    };
    auto expect = [&](char ch) {
        skip_space();
        if (pos >= text.size() || text[pos] != ch) throw fail(std::string("expected '") + ch + "'");
        ++pos;
    };
    auto number = [&] {
        skip_space();
        int v = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
        if (ec != std::errc{}) throw fail("expected an integer");
        pos = static_cast<std::size_t>(ptr - text.data());
        return v;
    };
    skip_space();
    if (pos == text.size()) throw fail("empty path text");
    while (true) {
        expect('(');
        const int i = number();
        expect(',');
        const int j = number();
        expect(')');
        cells.push_back({i, j});
        skip_space();
        if (pos == text.size()) break;
        expect('-');
    }
    const int grid = std::max(cells.back().i, cells.back().j);
    return {std::move(cells), grid};
}

}  // namespace dtwar
