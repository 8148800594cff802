#include "dtwar/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "dtwar/error.hpp"
#include "dtwar/parallel.hpp"

namespace dtwar {

const char* to_string(Measure m) noexcept {
    switch (m) {
        case Measure::Dtw: return "dtw";
        case Measure::L2: return "l2";
        case Measure::DistP: return "dist_p";
    }
    return "?";
}

Measure parse_measure(std::string_view text) {
    if (text == "dtw") return Measure::Dtw;
    if (text == "l2") return Measure::L2;
    if (text == "dist_p" || text == "distp") return Measure::DistP;
    throw ConfigError("unknown measure '" + std::string(text) + "' (expected dtw, l2 or dist_p)");
}

void DistanceMatrix::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) out << (j ? "," : "") << (*this)(i, j);
        out << '\n';
    }
}

DistanceMatrix distance_matrix(const LabeledDataset& ds, Measure measure, const PointMetric& metric,
                               std::size_t jobs, const std::optional<AlignmentPath>& path) {
    if (ds.empty()) throw Error("distance_matrix: empty dataset");
    if (measure == Measure::DistP) {
        if (!path) throw ConfigError("distance_matrix: dist_p needs an alignment path");
        if (static_cast<std::size_t>(path->grid()) != ds.length()) {
            throw ShapeError("distance_matrix: path grid does not match series length");
        }
    }
    const std::size_t m = ds.size();
    DistanceMatrix out{m, std::vector<double>(m * m, 0.0), measure,
                       metric.kind == PointMetric::Kind::SquaredL2};
    // row i fills the upper triangle; every cell is written by exactly one row
    parallel_for(m, jobs, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& a = ds.example(i);
            const auto& b = ds.example(j);
            double d = 0.0;
            switch (measure) {
                case Measure::Dtw: d = dtw_value(a, b, metric); break;
                case Measure::L2: d = dist_diagonal(a, b, metric); break;
                case Measure::DistP: d = dist_p(a, b, *path, metric); break;
            }
            out.values[i * m + j] = d;
        }
    });
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < i; ++j) out.values[i * m + j] = out.values[j * m + i];
    }
    return out;
}

MdsEmbedding mds_embed(const DistanceMatrix& d, std::size_t dims) {
    const std::size_t m = d.size;
    if (dims == 0) throw ConfigError("mds: dims must be positive");
    if (m <= dims) throw Error("mds: need more points than dimensions");
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            sq(i, j) = d.squared ? v : v * v;
        }
    }
    // B = -1/2 J D^2 J
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
    const double all_mean = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + all_mean);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
    if (eig.info() != Eigen::Success) throw Error("mds: eigendecomposition failed");
    const Eigen::VectorXd& vals = eig.eigenvalues();  // ascending
    const Eigen::MatrixXd& vecs = eig.eigenvectors();

    MdsEmbedding e;
    e.points = m;
    e.dims = dims;
    e.coords.assign(m * dims, 0.0);
    const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) e.negative += vals(k) < -1e-12 * scale;
    for (std::size_t c = 0; c < dims; ++c) {
        const Eigen::Index k = n - 1 - static_cast<Eigen::Index>(c);
        double lambda = vals(k);
        e.eigenvalues.push_back(lambda);
        if (lambda < 0.0) {
            ++e.clamped;
            lambda = 0.0;
        }
        Eigen::VectorXd v = vecs.col(k);
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (v(big) < 0.0) v = -v;
        const double root = std::sqrt(lambda);
        for (std::size_t i = 0; i < m; ++i) e.coords[i * dims + c] = root * v(static_cast<Eigen::Index>(i));
    }
    return e;
}

double silhouette(std::span<const double> coords, std::size_t dims, std::span<const int> labels) {
    const std::size_t m = labels.size();
    if (dims == 0 || coords.size() != m * dims) throw ShapeError("silhouette: coords/labels mismatch");
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    if (counts.size() < 2) throw Error("silhouette: need at least two clusters");

    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dims; ++c) {
            const double u = coords[i * dims + c] - coords[j * dims + c];
            s += u * u;
        }
        return std::sqrt(s);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (counts[labels[i]] == 1) continue;  // singleton clusters score 0
        std::map<int, double> sums;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) sums[labels[j]] += dist(i, j);
        }
        const double a = sums[labels[i]] / static_cast<double>(counts[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, s] : sums) {
            if (label != labels[i]) b = std::min(b, s / static_cast<double>(counts[label]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(m);
}

double silhouette(const MdsEmbedding& e, std::span<const int> labels) {
    return silhouette(e.coords, e.dims, labels);
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
BenchRecord time_method(const char* name, std::size_t length, std::size_t channels,
                        std::size_t repetitions, double min_window, Fn&& fn) {
    // grow the inner loop until one window is long enough to time reliably
    std::size_t inner = 1;
    for (;;) {
        const auto t0 = Clock::now();
        for (std::size_t k = 0; k < inner; ++k) fn();
        const double s = std::chrono::duration<double>(Clock::now() - t0).count();
        if (s >= min_window || inner >= (std::size_t{1} << 24)) break;
        inner *= 2;
    }
    std::vector<double> per_call;
    for (std::size_t r = 0; r < repetitions; ++r) {
        const auto t0 = Clock::now();
        for (std::size_t k = 0; k < inner; ++k) fn();
        per_call.push_back(std::chrono::duration<double>(Clock::now() - t0).count() /
                           static_cast<double>(inner));
    }
    const double mean =
        std::accumulate(per_call.begin(), per_call.end(), 0.0) / static_cast<double>(repetitions);
    double var = 0.0;
    for (double v : per_call) var += (v - mean) * (v - mean);
    var /= static_cast<double>(repetitions > 1 ? repetitions - 1 : 1);
    return {name, length, channels, repetitions, inner, mean, std::sqrt(var)};
}

volatile double g_sink = 0.0;

}  // namespace

std::vector<BenchRecord> runtime_bench(std::span<const std::size_t> lengths, std::size_t channels,
                                       std::size_t repetitions, std::uint64_t seed,
                                       double min_window_seconds) {
    if (repetitions < 10) throw ConfigError("bench: need at least 10 repetitions");
    if (channels == 0) throw ConfigError("bench: channels must be positive");
    std::vector<BenchRecord> out;
    for (std::size_t T : lengths) {
        if (T < 2) throw ConfigError("bench: lengths must be at least 2");
        std::mt19937_64 rng(seed + T);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::vector<double> a(channels * T), b(channels * T);
        for (auto& v : a) v = noise(rng);
        for (auto& v : b) v = noise(rng);
        const TimeSeries x(channels, T, a), z(channels, T, b);
        const auto path = random_admissible_path(static_cast<int>(T), AdmissibleBand{}, seed + T);
        const auto metric = PointMetric::squared_l2();

        out.push_back(time_method("exact-dtw", T, channels, repetitions, min_window_seconds, [&] {
            g_sink = g_sink + dtw(x, z, metric).value;
        }));
        out.push_back(time_method("soft-dtw", T, channels, repetitions, min_window_seconds, [&] {
            g_sink = g_sink + soft_dtw(x, z, 1.0, metric).value;
        }));
        out.push_back(time_method("dist-p", T, channels, repetitions, min_window_seconds, [&] {
            g_sink = g_sink + dist_p(x, z, path, metric);
        }));
    }
    return out;
}

void write_bench_csv(std::span<const BenchRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(9);
    out << "method,length,channels,repetitions,inner,mean_seconds,std_seconds\n";
    for (const auto& r : records) {
        out << r.method << ',' << r.length << ',' << r.channels << ',' << r.repetitions << ','
            << r.inner << ',' << r.mean_seconds << ',' << r.std_seconds << '\n';
    }
}

std::vector<PathSimPoint> pathsim_trace(const AdversarialResult& result, const TimeSeries& x,
                                        const PointMetric& metric) {
    if (!result.path) throw Error("pathsim_trace: result has no alignment path");
    if (result.snapshots.empty()) throw Error("pathsim_trace: result has no snapshots");
    std::vector<PathSimPoint> out;
    for (const auto& snap : result.snapshots) {
        const auto best = dtw(x, snap.x_adv, metric);
        out.push_back({snap.iteration, path_sim(*result.path, best.path)});
    }
    return out;
}

void write_mds_csv(const MdsEmbedding& e, std::span<const int> labels,
                   const std::filesystem::path& path) {
    if (labels.size() != e.points) throw ShapeError("mds csv: label count mismatch");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "index,label";
    for (std::size_t c = 0; c < e.dims; ++c) out << ",x" << c + 1;
    out << '\n';
    for (std::size_t i = 0; i < e.points; ++i) {
        out << i << ',' << labels[i];
        for (std::size_t c = 0; c < e.dims; ++c) out << ',' << e(i, c);
        out << '\n';
    }
}

void write_mds_gnuplot(const std::filesystem::path& script, const std::string& csv_name,
                       const std::string& title) {
    std::ofstream out(script);
    if (!out) throw Error("cannot write " + script.string());
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set title '" << title << "'\n"
        << "set xlabel 'x1'\nset ylabel 'x2'\n"
        << "plot '" << csv_name << "' using 3:4:2 with points pt 7 ps 0.8 palette notitle\n";
}

}  // namespace dtwar
