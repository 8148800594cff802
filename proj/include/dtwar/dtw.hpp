#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtwar/paths.hpp"
#include "dtwar/signal.hpp"

namespace dtwar {

/// Frame distance d(X_i, Z_j) between two n-vectors.
struct PointMetric {
    enum class Kind { SquaredL2, L1, Lp };
    Kind kind = Kind::SquaredL2;
    double p = 2.0;  // used by Lp only

    static PointMetric squared_l2() { return {Kind::SquaredL2, 2.0}; }
    static PointMetric l1() { return {Kind::L1, 1.0}; }
    static PointMetric lp(double p);

    friend bool operator==(const PointMetric&, const PointMetric&) = default;
};

std::string to_string(const PointMetric& m);
/// Accepts "sql2", "l1" or "lp:<p>".
PointMetric parse_metric(std::string_view text);

double pointwise_distance(std::span<const double> a, std::span<const double> b,
                          const PointMetric& m);

/// d(X_i, Z_j) for 0-based frame indices; the frames are strided columns.
double frame_distance(const TimeSeries& x, std::size_t i, const TimeSeries& z, std::size_t j,
                      const PointMetric& m);

/// Accumulated DTW costs; element (r, c) is C_{r+1,c+1}.
class CostMatrix {
public:
    CostMatrix() = default;
    explicit CostMatrix(std::size_t grid) : grid_(grid), cells_(grid * grid, 0.0) {}

    std::size_t grid() const noexcept { return grid_; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return cells_[r * grid_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return cells_[r * grid_ + c]; }
    double final_cost() const noexcept { return cells_.back(); }
    const std::vector<double>& cells() const noexcept { return cells_; }

    /// Row-major CSV, one grid row per line.
    void write_csv(const std::filesystem::path& path) const;

private:
    std::size_t grid_ = 0;
    std::vector<double> cells_;
};

CostMatrix cost_matrix(const TimeSeries& x, const TimeSeries& z,
                       const PointMetric& m = PointMetric::squared_l2());

/// Optimal path by backtracking; ties prefer diagonal, then left (i, j-1), then up (i-1, j).
AlignmentPath backtrack(const CostMatrix& c);

struct DtwResult {
    double value = 0.0;
    AlignmentPath path;
};

DtwResult dtw(const TimeSeries& x, const TimeSeries& z,
              const PointMetric& m = PointMetric::squared_l2());

/// DTW value only; skips the path and keeps two rows of the DP.
double dtw_value(const TimeSeries& x, const TimeSeries& z,
                 const PointMetric& m = PointMetric::squared_l2());

/// Sum of d(X_i, Z_j) over the cells of `p` (cells taken in path order).
double dist_p(const TimeSeries& x, const TimeSeries& z, const AlignmentPath& p,
              const PointMetric& m = PointMetric::squared_l2());

/// dist_p along the diagonal; equals ||x - z||^2 under squared-l2.
double dist_diagonal(const TimeSeries& x, const TimeSeries& z,
                     const PointMetric& m = PointMetric::squared_l2());

/// Gradient of dist_p(x, z, p) with respect to z (an n x T series).
TimeSeries dist_p_gradient(const TimeSeries& x, const TimeSeries& z, const AlignmentPath& p,
                           const PointMetric& m = PointMetric::squared_l2());

struct SoftDtwResult {
    double value = 0.0;
    TimeSeries gradient;  // with respect to z
};

/// Soft-DTW with smoothing gamma > 0, gradient by reverse accumulation.
SoftDtwResult soft_dtw(const TimeSeries& x, const TimeSeries& z, double gamma,
                       const PointMetric& m = PointMetric::squared_l2());

double soft_dtw_value(const TimeSeries& x, const TimeSeries& z, double gamma,
                      const PointMetric& m = PointMetric::squared_l2());

enum class DtwMode { Dependent, Independent };

/// Dependent: frames are n-vectors. Independent: sum of per-channel univariate DTW.
double dtw_variant(const TimeSeries& x, const TimeSeries& z, DtwMode mode,
                   const PointMetric& m = PointMetric::squared_l2());

/// Minimum of dist_p over every enumerated path (T <= 10). Test oracle.
double brute_force_dtw(const TimeSeries& x, const TimeSeries& z,
                       const PointMetric& m = PointMetric::squared_l2());

}  // namespace dtwar
