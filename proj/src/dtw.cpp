#include "dtwar/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dtwar/error.hpp"

namespace dtwar {

PointMetric PointMetric::lp(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("lp metric needs finite p >= 1");
    return {Kind::Lp, p};
}

std::string to_string(const PointMetric& m) {
    switch (m.kind) {
        case PointMetric::Kind::SquaredL2: return "sql2";
        case PointMetric::Kind::L1: return "l1";
        case PointMetric::Kind::Lp: break;
    }
    std::string p = std::to_string(m.p);
    p.erase(p.find_last_not_of('0') + 1);
    if (!p.empty() && p.back() == '.') p.pop_back();
    return "lp:" + p;
}

PointMetric parse_metric(std::string_view text) {
    if (text == "sql2" || text == "squared-l2") return PointMetric::squared_l2();
    if (text == "l1") return PointMetric::l1();
    if (text.starts_with("lp:")) {
        try {
            return PointMetric::lp(std::stod(std::string(text.substr(3))));
        } catch (const std::invalid_argument&) {
        }
    }
    throw ConfigError("unknown point metric '" + std::string(text) + "' (use sql2, l1, lp:<p>)");
}

namespace {

// Generic d over strided frames: a[k * sa], b[k * sb], k < n.
inline double metric_strided(const double* a, std::size_t sa, const double* b, std::size_t sb,
                             std::size_t n, const PointMetric& m) {
    double acc = 0.0;
    switch (m.kind) {
        case PointMetric::Kind::SquaredL2:
            for (std::size_t k = 0; k < n; ++k) {
                const double d = a[k * sa] - b[k * sb];
                acc += d * d;
            }
            return acc;
        case PointMetric::Kind::L1:
            for (std::size_t k = 0; k < n; ++k) acc += std::abs(a[k * sa] - b[k * sb]);
            return acc;
        case PointMetric::Kind::Lp:
            if (m.p == 2.0) {
                for (std::size_t k = 0; k < n; ++k) {
                    const double d = a[k * sa] - b[k * sb];
                    acc += d * d;
                }
                return std::sqrt(acc);
            }
            for (std::size_t k = 0; k < n; ++k) acc += std::pow(std::abs(a[k * sa] - b[k * sb]), m.p);
            return std::pow(acc, 1.0 / m.p);
    }
    return acc;
}

// Adds weight * d/dz d(x_i, z_j) into grad's frame j.
void add_frame_gradient(const TimeSeries& x, std::size_t i, const TimeSeries& z, std::size_t j,
                        const PointMetric& m, double weight, TimeSeries& grad) {
    const std::size_t n = x.channels();
    switch (m.kind) {
        case PointMetric::Kind::SquaredL2:
            for (std::size_t c = 0; c < n; ++c) grad(c, j) += weight * 2.0 * (z(c, j) - x(c, i));
            return;
        case PointMetric::Kind::L1:
            for (std::size_t c = 0; c < n; ++c) {
                const double u = z(c, j) - x(c, i);
                grad(c, j) += weight * static_cast<double>((u > 0) - (u < 0));
            }
            return;
        case PointMetric::Kind::Lp: {
            const double norm = frame_distance(x, i, z, j, m);
            if (norm == 0.0) return;
            if (m.p == 2.0) {
                for (std::size_t c = 0; c < n; ++c) grad(c, j) += weight * (z(c, j) - x(c, i)) / norm;
                return;
            }
            const double denom = std::pow(norm, m.p - 1.0);
            for (std::size_t c = 0; c < n; ++c) {
                const double u = z(c, j) - x(c, i);
                const double sgn = static_cast<double>((u > 0) - (u < 0));
                grad(c, j) += weight * sgn * std::pow(std::abs(u), m.p - 1.0) / denom;
            }
            return;
        }
    }
}

// Pairwise frame distances, row-major (i over x, j over z).
std::vector<double> frame_distances(const TimeSeries& x, const TimeSeries& z,
                                    const PointMetric& m) {
    const std::size_t T = x.length();
    const std::size_t n = x.channels();
    std::vector<double> d(T * T);
    const double* xv = x.values().data();
    const double* zv = z.values().data();
    if (n == 1 && m.kind == PointMetric::Kind::SquaredL2) {
        for (std::size_t i = 0; i < T; ++i) {
            for (std::size_t j = 0; j < T; ++j) {
                const double u = xv[i] - zv[j];
                d[i * T + j] = u * u;
            }
        }
        return d;
    }
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            d[i * T + j] = metric_strided(xv + i, T, zv + j, T, n, m);
        }
    }
    return d;
}

}  // namespace

double pointwise_distance(std::span<const double> a, std::span<const double> b,
                          const PointMetric& m) {
    if (a.size() != b.size()) {
        throw ShapeError("pointwise_distance: dimension mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
    }
    return metric_strided(a.data(), 1, b.data(), 1, a.size(), m);
}

double frame_distance(const TimeSeries& x, std::size_t i, const TimeSeries& z, std::size_t j,
                      const PointMetric& m) {
    const std::size_t T = x.length();
    return metric_strided(x.values().data() + i, T, z.values().data() + j, T, x.channels(), m);
}

void CostMatrix::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write cost matrix: " + path.string());
    out.precision(17);
    for (std::size_t r = 0; r < grid_; ++r) {
        for (std::size_t c = 0; c < grid_; ++c) {
            if (c) out << ',';
            out << (*this)(r, c);
        }
        out << '\n';
    }
}

CostMatrix cost_matrix(const TimeSeries& x, const TimeSeries& z, const PointMetric& m) {
    require_same_shape(x, z, "cost_matrix");
    const std::size_t T = x.length();
    const auto d = frame_distances(x, z, m);
    CostMatrix c(T);
    c(0, 0) = d[0];
    for (std::size_t j = 1; j < T; ++j) c(0, j) = d[j] + c(0, j - 1);
    for (std::size_t i = 1; i < T; ++i) {
        c(i, 0) = d[i * T] + c(i - 1, 0);
        for (std::size_t j = 1; j < T; ++j) {
            const double best = std::min({c(i - 1, j), c(i, j - 1), c(i - 1, j - 1)});
            c(i, j) = d[i * T + j] + best;
        }
    }
    return c;
}

AlignmentPath backtrack(const CostMatrix& c) {
    const std::size_t T = c.grid();
    if (T == 0) throw Error("backtrack: empty cost matrix");
    std::vector<Cell> rev;
    rev.reserve(2 * T);
    std::size_t i = T - 1;
    std::size_t j = T - 1;
    rev.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1)});
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = c(i - 1, j - 1);
            const double left = c(i, j - 1);
            const double up = c(i - 1, j);
            if (diag <= left && diag <= up) {
                --i;
                --j;
            } else if (left <= up) {
                --j;
            } else {
                --i;
            }
        }
        rev.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1)});
    }
    std::reverse(rev.begin(), rev.end());
    return {std::move(rev), static_cast<int>(T)};
}

DtwResult dtw(const TimeSeries& x, const TimeSeries& z, const PointMetric& m) {
    const auto c = cost_matrix(x, z, m);
    return {c.final_cost(), backtrack(c)};
}

double dtw_value(const TimeSeries& x, const TimeSeries& z, const PointMetric& m) {
    require_same_shape(x, z, "dtw");
    const std::size_t T = x.length();
    std::vector<double> prev(T), cur(T);
    prev[0] = frame_distance(x, 0, z, 0, m);
    for (std::size_t j = 1; j < T; ++j) prev[j] = frame_distance(x, 0, z, j, m) + prev[j - 1];
    for (std::size_t i = 1; i < T; ++i) {
        cur[0] = frame_distance(x, i, z, 0, m) + prev[0];
        for (std::size_t j = 1; j < T; ++j) {
            cur[j] = frame_distance(x, i, z, j, m) + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[T - 1];
}

namespace {

void require_path_for(const AlignmentPath& p, const TimeSeries& x, const char* what) {
    if (auto v = validate(p)) {
        throw Error(std::string(what) + ": invalid path at index " + std::to_string(v->index) +
                    ": " + v->message);
    }
    if (static_cast<std::size_t>(p.grid()) != x.length()) {
        throw ShapeError(std::string(what) + ": path grid " + std::to_string(p.grid()) +
                         " does not match series length " + std::to_string(x.length()));
    }
}

}  // namespace

double dist_p(const TimeSeries& x, const TimeSeries& z, const AlignmentPath& p,
              const PointMetric& m) {
    require_same_shape(x, z, "dist_p");
    require_path_for(p, x, "dist_p");
    double total = 0.0;
    for (auto c : p) {
        total += frame_distance(x, static_cast<std::size_t>(c.i - 1), z,
                                static_cast<std::size_t>(c.j - 1), m);
    }
    return total;
}

double dist_diagonal(const TimeSeries& x, const TimeSeries& z, const PointMetric& m) {
    require_same_shape(x, z, "dist_diagonal");
    double total = 0.0;
    for (std::size_t t = 0; t < x.length(); ++t) total += frame_distance(x, t, z, t, m);
    return total;
}

TimeSeries dist_p_gradient(const TimeSeries& x, const TimeSeries& z, const AlignmentPath& p,
                           const PointMetric& m) {
    require_same_shape(x, z, "dist_p_gradient");
    require_path_for(p, x, "dist_p_gradient");
    TimeSeries grad(z.channels(), z.length());
    for (auto c : p) {
        add_frame_gradient(x, static_cast<std::size_t>(c.i - 1), z,
                           static_cast<std::size_t>(c.j - 1), m, 1.0, grad);
    }
    return grad;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double soft_min3(double a, double b, double c, double gamma) {
    const double lo = std::min({a, b, c});
    if (lo == kInf) return kInf;
    const double s = std::exp(-(a - lo) / gamma) + std::exp(-(b - lo) / gamma) +
                     std::exp(-(c - lo) / gamma);
    return lo - gamma * std::log(s);
}

// R is (T+2) x (T+2) with a padded border: R[0][0] = 0, other borders = +inf.
std::vector<double> soft_forward(const std::vector<double>& d, std::size_t T, double gamma) {
    const std::size_t W = T + 2;
    std::vector<double> r(W * W, kInf);
    r[0] = 0.0;
    for (std::size_t i = 1; i <= T; ++i) {
        for (std::size_t j = 1; j <= T; ++j) {
            r[i * W + j] = d[(i - 1) * T + (j - 1)] +
                           soft_min3(r[(i - 1) * W + j], r[i * W + j - 1],
                                     r[(i - 1) * W + j - 1], gamma);
        }
    }
    return r;
}

void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("soft_dtw: gamma must be a positive finite number");
    }
}

}  // namespace

double soft_dtw_value(const TimeSeries& x, const TimeSeries& z, double gamma,
                      const PointMetric& m) {
    check_gamma(gamma);
    require_same_shape(x, z, "soft_dtw");
    const std::size_t T = x.length();
    const auto r = soft_forward(frame_distances(x, z, m), T, gamma);
    return r[T * (T + 2) + T];
}

SoftDtwResult soft_dtw(const TimeSeries& x, const TimeSeries& z, double gamma,
                       const PointMetric& m) {
    check_gamma(gamma);
    require_same_shape(x, z, "soft_dtw");
    const std::size_t T = x.length();
    const std::size_t W = T + 2;
    const auto d = frame_distances(x, z, m);
    auto r = soft_forward(d, T, gamma);
    const double value = r[T * W + T];

    // Backward pass: E_{i,j} = dR_{T,T} / dR_{i,j}, which also equals the
    // derivative with respect to the local cost d_{i,j}.
    for (std::size_t i = 1; i <= T + 1; ++i) r[i * W + T + 1] = -kInf;
    for (std::size_t j = 1; j <= T + 1; ++j) r[(T + 1) * W + j] = -kInf;
    r[(T + 1) * W + T + 1] = value;
    auto dd = [&](std::size_t i, std::size_t j) {
        return (i > T || j > T) ? 0.0 : d[(i - 1) * T + (j - 1)];
    };
    std::vector<double> e(W * W, 0.0);
    e[(T + 1) * W + T + 1] = 1.0;
    for (std::size_t j = T; j >= 1; --j) {
        for (std::size_t i = T; i >= 1; --i) {
            const double rij = r[i * W + j];
            const double a = std::exp((r[(i + 1) * W + j] - rij - dd(i + 1, j)) / gamma);
            const double b = std::exp((r[i * W + j + 1] - rij - dd(i, j + 1)) / gamma);
            const double c = std::exp((r[(i + 1) * W + j + 1] - rij - dd(i + 1, j + 1)) / gamma);
            e[i * W + j] = e[(i + 1) * W + j] * a + e[i * W + j + 1] * b +
                           e[(i + 1) * W + j + 1] * c;
        }
    }

    TimeSeries grad(z.channels(), z.length());
    for (std::size_t i = 1; i <= T; ++i) {
        for (std::size_t j = 1; j <= T; ++j) {
            const double w = e[i * W + j];
            if (w != 0.0) add_frame_gradient(x, i - 1, z, j - 1, m, w, grad);
        }
    }
    return {value, std::move(grad)};
}

double dtw_variant(const TimeSeries& x, const TimeSeries& z, DtwMode mode, const PointMetric& m) {
    require_same_shape(x, z, "dtw_variant");
    if (mode == DtwMode::Dependent) return dtw_value(x, z, m);
    double total = 0.0;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        const auto xc = std::vector<double>(x.channel(c).begin(), x.channel(c).end());
        const auto zc = std::vector<double>(z.channel(c).begin(), z.channel(c).end());
        total += dtw_value(TimeSeries::univariate(xc), TimeSeries::univariate(zc), m);
    }
    return total;
}

double brute_force_dtw(const TimeSeries& x, const TimeSeries& z, const PointMetric& m) {
    require_same_shape(x, z, "brute_force_dtw");
    const int T = static_cast<int>(x.length());
    auto frames = [](const TimeSeries& s) {
        std::vector<std::vector<double>> out(s.length(), std::vector<double>(s.channels()));
        for (std::size_t t = 0; t < s.length(); ++t) {
            for (std::size_t c = 0; c < s.channels(); ++c) out[t][c] = s(c, t);
        }
        return out;
    };
    const auto xf = frames(x);
    const auto zf = frames(z);
    double best = kInf;
    for_each_path(T, [&](const std::vector<Cell>& cells) {
        double total = 0.0;
        for (auto c : cells) total += pointwise_distance(xf[c.i - 1], zf[c.j - 1], m);
        best = std::min(best, total);
    });
    return best;
}

}  // namespace dtwar
