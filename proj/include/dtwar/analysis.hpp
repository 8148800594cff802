#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtwar/attack.hpp"
#include "dtwar/dtw.hpp"
#include "dtwar/paths.hpp"
#include "dtwar/signal.hpp"

namespace dtwar {

enum class Measure { Dtw, L2, DistP };
const char* to_string(Measure m) noexcept;
Measure parse_measure(std::string_view text);

/// Symmetric m x m matrix of pairwise distances, row-major.
struct DistanceMatrix {
    std::size_t size = 0;
    std::vector<double> values;
    Measure measure = Measure::Dtw;
    bool squared = false;  // entries are sums of squared frame differences

    double operator()(std::size_t i, std::size_t j) const { return values[i * size + j]; }
    void write_csv(const std::filesystem::path& path) const;
};

/// Pairwise distances over every example of `ds`. L2 is the diagonal-path
/// distance under `metric` (the squared Euclidean distance for sql2); DistP
/// uses `path`, which must then be given.
DistanceMatrix distance_matrix(const LabeledDataset& ds, Measure measure,
                               const PointMetric& metric = PointMetric::squared_l2(),
                               std::size_t jobs = 1,
                               const std::optional<AlignmentPath>& path = std::nullopt);

struct MdsEmbedding {
    std::size_t points = 0;
    std::size_t dims = 0;
    std::vector<double> coords;       // points x dims, row-major
    std::vector<double> eigenvalues;  // the top `dims`, descending, before clamping
    std::size_t clamped = 0;          // how many of those were negative and set to zero
    std::size_t negative = 0;         // negative eigenvalues in the whole spectrum

    double operator()(std::size_t i, std::size_t d) const { return coords[i * dims + d]; }
};

/// Classical MDS on D. Entries are squared before double-centring unless D
/// already holds squared distances. Each coordinate column is sign-fixed so
/// that its largest-magnitude entry is positive.
MdsEmbedding mds_embed(const DistanceMatrix& d, std::size_t dims = 2);

/// Mean silhouette of points (rows of `coords`, `dims` wide) grouped by label.
double silhouette(std::span<const double> coords, std::size_t dims, std::span<const int> labels);
double silhouette(const MdsEmbedding& e, std::span<const int> labels);

struct BenchRecord {
    std::string method;
    std::size_t length = 0;
    std::size_t channels = 0;
    std::size_t repetitions = 0;  // timed windows
    std::size_t inner = 0;        // calls per window
    double mean_seconds = 0.0;    // per call
    double std_seconds = 0.0;
};

/// Per-call wall time of exact DTW (fill + backtrack), soft-DTW (value and
/// gradient) and dist_P along a random admissible path, for each length.
std::vector<BenchRecord> runtime_bench(std::span<const std::size_t> lengths, std::size_t channels,
                                       std::size_t repetitions, std::uint64_t seed,
                                       double min_window_seconds = 0.01);

void write_bench_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);

struct PathSimPoint {
    std::size_t iteration = 0;
    double path_sim = 0.0;
};

/// PathSim between the attack's random path and the optimal DTW path of
/// (x, snapshot) at every kept snapshot.
std::vector<PathSimPoint> pathsim_trace(const AdversarialResult& result, const TimeSeries& x,
                                        const PointMetric& metric);

void write_mds_csv(const MdsEmbedding& e, std::span<const int> labels,
                   const std::filesystem::path& path);

/// Writes a gnuplot script that scatters the points of `csv_name` by label.
void write_mds_gnuplot(const std::filesystem::path& script, const std::string& csv_name,
                       const std::string& title);

}  // namespace dtwar
