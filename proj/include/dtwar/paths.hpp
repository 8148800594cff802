#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dtwar {

/// One cost-matrix cell, 1-based: `i` indexes the first series, `j` the second.
struct Cell {
    int i = 1;
    int j = 1;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// A sequence of cells through a T x T grid. Construction does not check the
/// path invariants; call validate() or AlignmentPath::checked().
class AlignmentPath {
public:
    AlignmentPath() = default;
    AlignmentPath(std::vector<Cell> cells, int grid) : cells_(std::move(cells)), grid_(grid) {}

    /// Throws Error with the violation text when the path is not valid.
    static AlignmentPath checked(std::vector<Cell> cells, int grid);

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    int grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return cells_.size(); }
    auto begin() const noexcept { return cells_.begin(); }
    auto end() const noexcept { return cells_.end(); }

    /// Swaps the roles of the two series: (i, j) -> (j, i).
    AlignmentPath transposed() const;

    friend bool operator==(const AlignmentPath&, const AlignmentPath&) = default;
    friend auto operator<=>(const AlignmentPath&, const AlignmentPath&) = default;

private:
    std::vector<Cell> cells_;
    int grid_ = 0;
};

struct PathViolation {
    std::size_t index = 0;  // offending cell (or step) index
    std::string message;
};

/// First invariant violation of `p`, or nullopt when the path is valid.
std::optional<PathViolation> validate(const AlignmentPath& p);

/// Cells allowed to drift at most ceil(radius * T) off the diagonal.
struct AdmissibleBand {
    double radius = 0.5;

    /// Throws ConfigError unless radius is in (0, 1].
    void check() const;
    int width(int grid) const;
    bool contains(Cell c, int grid) const { return std::abs(c.i - c.j) <= width(grid); }
};

AlignmentPath diagonal_path(int grid);

/// Seeded random walk from (1,1) to (T,T): each step picks uniformly among the
/// in-grid, in-band moves {down, right, diagonal}.
AlignmentPath random_admissible_path(int grid, AdmissibleBand band, std::uint64_t seed);

/// Largest grid accepted by the exhaustive enumerators.
inline constexpr int kMaxEnumerationGrid = 10;

/// Calls `visit` once per valid path through a T x T grid (T <= 10). The
/// vector passed to `visit` is reused between calls.
void for_each_path(int grid, const std::function<void(const std::vector<Cell>&)>& visit);

/// Every valid alignment path through a T x T grid (T <= 10).
std::vector<AlignmentPath> enumerate_paths(int grid);

/// Sum of nearest-cell l1 distances in both directions, as an exact integer.
std::int64_t path_sim_numerator(const AlignmentPath& a, const AlignmentPath& b);

/// Symmetric path dissimilarity: numerator / (2T). Zero iff the cell sets match.
double path_sim(const AlignmentPath& a, const AlignmentPath& b);

/// "(1,1)-(2,1)-(2,2)" text form.
std::string to_string(const AlignmentPath& p);

/// Parses the text form; the grid size is taken from the last cell.
AlignmentPath parse_path(std::string_view text);

}  // namespace dtwar
