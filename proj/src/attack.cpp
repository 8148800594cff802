#include "dtwar/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtwar/error.hpp"
#include "dtwar/parallel.hpp"

namespace dtwar {

void AttackConfig::check() const {
    if (!(rho < 0.0)) throw ConfigError("attack: rho must be negative");
    if (!(alpha1 > 0.0)) throw ConfigError("attack: alpha1 must be positive");
    if (!(alpha2 >= 0.0)) throw ConfigError("attack: alpha2 must be non-negative");
    if (!(eta > 0.0)) throw ConfigError("attack: eta must be positive");
    if (eta_label && !(*eta_label > 0.0)) throw ConfigError("attack: eta_label must be positive");
    if (eta_dtw && !(*eta_dtw > 0.0)) throw ConfigError("attack: eta_dtw must be positive");
    if (max_iters < 1) throw ConfigError("attack: max_iters must be at least 1");
    if (!(delta > 0.0)) throw ConfigError("attack: delta must be positive");
    if (!(gamma > 0.0)) throw ConfigError("attack: gamma must be positive");
    band.check();
}

const char* to_string(AttackMethod m) noexcept {
    switch (m) {
        case AttackMethod::DtwAr: return "dtw-ar";
        case AttackMethod::CwSdtw: return "cw-sdtw";
        case AttackMethod::Fgs: return "fgs";
        case AttackMethod::Pgd: return "pgd";
    }
    return "?";
}

AttackMethod parse_attack_method(std::string_view text) {
    for (auto m : {AttackMethod::DtwAr, AttackMethod::CwSdtw, AttackMethod::Fgs, AttackMethod::Pgd}) {
        if (text == to_string(m)) return m;
    }
    throw ConfigError("unknown attack '" + std::string(text) + "' (dtw-ar, cw-sdtw, fgs, pgd)");
}

// ---------------------------------------------------------------------------
// Losses

namespace {

void check_scores(std::span<const double> scores, int y_target) {
    if (scores.size() < 2) throw Error("label loss needs at least two classes");
    if (y_target < 0 || static_cast<std::size_t>(y_target) >= scores.size()) {
        throw Error("label loss: target " + std::to_string(y_target) + " out of range");
    }
}

// First index of the largest non-target score.
std::size_t runner_up(std::span<const double> scores, int y_target) {
    std::size_t best = scores.size();
    for (std::size_t y = 0; y < scores.size(); ++y) {
        if (static_cast<int>(y) == y_target) continue;
        if (best == scores.size() || scores[y] > scores[best]) best = y;
    }
    return best;
}

}  // namespace

double label_loss(std::span<const double> scores, int y_target, double rho) {
    check_scores(scores, y_target);
    const auto other = runner_up(scores, y_target);
    return std::max(scores[other] - scores[static_cast<std::size_t>(y_target)], rho);
}

std::vector<double> label_loss_gradient(std::span<const double> scores, int y_target, double rho) {
    check_scores(scores, y_target);
    std::vector<double> g(scores.size(), 0.0);
    const auto other = runner_up(scores, y_target);
    const double margin = scores[other] - scores[static_cast<std::size_t>(y_target)];
    if (margin > rho) {
        g[other] = 1.0;
        g[static_cast<std::size_t>(y_target)] = -1.0;
    }
    return g;
}

double dtw_loss(const TimeSeries& x, const TimeSeries& x_cand, const AlignmentPath& p,
                double alpha1, double alpha2, const PointMetric& m) {
    const double along = dist_p(x, x_cand, p, m);
    const double diag = alpha2 != 0.0 ? dist_diagonal(x, x_cand, m) : 0.0;
    return alpha1 * along - alpha2 * diag;
}

TimeSeries dtw_loss_gradient(const TimeSeries& x, const TimeSeries& x_cand,
                             const AlignmentPath& p, double alpha1, double alpha2,
                             const PointMetric& m) {
    TimeSeries g = dist_p_gradient(x, x_cand, p, m);
    for (double& v : g.values()) v *= alpha1;
    if (alpha2 != 0.0) {
        const auto gd = dist_p_gradient(x, x_cand, diagonal_path(static_cast<int>(x.length())), m);
        for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] -= alpha2 * gd.values()[k];
    }
    return g;
}

TimeSeries LossEvaluation::gradient() const {
    TimeSeries g = label_gradient;
    for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] += dtw_gradient.values()[k];
    return g;
}

namespace {

TimeSeries label_term_gradient(const Classifier& model, const TimeSeries& x_cand,
                               std::span<const double> upstream) {
    const bool flat = std::all_of(upstream.begin(), upstream.end(), [](double u) { return u == 0.0; });
    if (flat) return TimeSeries(x_cand.channels(), x_cand.length());
    return model.input_gradient(x_cand, upstream);
}

}  // namespace

LossEvaluation total_loss(const Classifier& model, const TimeSeries& x, const TimeSeries& x_cand,
                          int y_target, const AlignmentPath& p, const AttackConfig& cfg) {
    require_same_shape(x, x_cand, "total_loss");
    const auto scores = model.forward(x_cand);
    LossEvaluation ev;
    ev.record.label_loss = label_loss(scores, y_target, cfg.rho);
    ev.record.dist_p = dist_p(x, x_cand, p, cfg.metric);
    ev.record.dist_diag = dist_diagonal(x, x_cand, cfg.metric);
    ev.record.dtw_loss = cfg.alpha1 * ev.record.dist_p - cfg.alpha2 * ev.record.dist_diag;
    ev.label_gradient =
        label_term_gradient(model, x_cand, label_loss_gradient(scores, y_target, cfg.rho));
    ev.dtw_gradient = dtw_loss_gradient(x, x_cand, p, cfg.alpha1, cfg.alpha2, cfg.metric);
    return ev;
}

// ---------------------------------------------------------------------------
// Gradient-descent driver shared by DTW-AR and CW-SDTW.

namespace {

struct DtwTermValue {
    double dtw_loss = 0.0;
    double dist_p = 0.0;
    double dist_diag = 0.0;
    TimeSeries gradient;
};

// Keeps the best iterate under one ordering; ties keep the earliest.
struct BestIterate {
    std::size_t iteration = 0;
    double score = std::numeric_limits<double>::infinity();
    TimeSeries x;
    bool set = false;

    void offer(std::size_t k, double value, const TimeSeries& candidate) {
        if (!set || value < score) {
            iteration = k;
            score = value;
            x = candidate;
            set = true;
        }
    }
};

template <class Term>
AdversarialResult descend(const Classifier& model, const TimeSeries& x, int y_target,
                          const AttackConfig& cfg, AttackMethod method, Term&& term) {
    cfg.check();
    if (y_target < 0 || static_cast<std::size_t>(y_target) >= model.spec().classes()) {
        throw Error("attack: target label " + std::to_string(y_target) + " out of range");
    }
    AdversarialResult result;
    result.method = method;
    result.y_target = y_target;
    result.y_source = model.predict(x);
    if (cfg.record_trace) result.trace.reserve(cfg.max_iters + 1);

    const double eta_label = cfg.step_label();
    const double eta_dtw = cfg.step_dtw();
    TimeSeries x_adv = x;
    BestIterate on_plateau;  // ordered by DTW loss
    BestIterate overall;     // ordered by total loss

    for (std::size_t k = 0; k <= cfg.max_iters; ++k) {
        const auto scores = model.forward(x_adv);
        IterationRecord rec;
        rec.label_loss = label_loss(scores, y_target, cfg.rho);
        DtwTermValue dt = term(x_adv);
        rec.dtw_loss = dt.dtw_loss;
        rec.dist_p = dt.dist_p;
        rec.dist_diag = dt.dist_diag;
        if (cfg.record_trace) result.trace.push_back(rec);
        if (cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) {
            result.snapshots.push_back({k, x_adv});
        }
        if (rec.label_loss <= cfg.rho) on_plateau.offer(k, rec.dtw_loss, x_adv);
        overall.offer(k, rec.total(), x_adv);
        if (k == cfg.max_iters) break;

        const auto gl = label_term_gradient(model, x_adv, label_loss_gradient(scores, y_target, cfg.rho));
        auto& v = x_adv.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] -= eta_label * gl.values()[i] + eta_dtw * dt.gradient.values()[i];
        }
        if (!x_adv.all_finite()) break;  // diverged; keep the best finite iterate
    }

    const BestIterate& chosen = on_plateau.set ? on_plateau : overall;
    result.reached_plateau = on_plateau.set;
    result.chosen_iteration = chosen.iteration;
    result.x_adv = chosen.x;
    result.final_dtw = dtw_value(x, result.x_adv, cfg.metric);
    result.final_l2sq = dist_diagonal(x, result.x_adv, PointMetric::squared_l2());
    result.final_diag = dist_diagonal(x, result.x_adv, cfg.metric);
    result.fooled = model.predict(result.x_adv) == y_target;
    result.within_delta = result.final_dtw <= cfg.delta;
    return result;
}

}  // namespace

AdversarialResult dtw_ar_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                const AttackConfig& cfg) {
    cfg.check();
    const auto path = random_admissible_path(static_cast<int>(x.length()), cfg.band, cfg.path_seed);
    return dtw_ar_attack(model, x, y_target, cfg, path);
}

AdversarialResult dtw_ar_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                const AttackConfig& cfg, const AlignmentPath& path) {
    if (auto v = validate(path)) throw Error("dtw_ar_attack: invalid path: " + v->message);
    if (static_cast<std::size_t>(path.grid()) != x.length()) {
        throw ShapeError("dtw_ar_attack: path grid does not match series length");
    }
    const auto diag = diagonal_path(path.grid());
    auto term = [&](const TimeSeries& x_adv) {
        DtwTermValue out;
        out.dist_p = dist_p(x, x_adv, path, cfg.metric);
        out.dist_diag = dist_diagonal(x, x_adv, cfg.metric);
        out.dtw_loss = cfg.alpha1 * out.dist_p - cfg.alpha2 * out.dist_diag;
        out.gradient = dtw_loss_gradient(x, x_adv, path, cfg.alpha1, cfg.alpha2, cfg.metric);
        return out;
    };
    auto result = descend(model, x, y_target, cfg, AttackMethod::DtwAr, term);
    result.path = path;
    return result;
}

AdversarialResult cw_sdtw_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                 const AttackConfig& cfg) {
    auto term = [&](const TimeSeries& x_adv) {
        auto sd = soft_dtw(x, x_adv, cfg.gamma, cfg.soft_metric);
        DtwTermValue out;
        out.dtw_loss = sd.value;
        out.dist_p = std::numeric_limits<double>::quiet_NaN();
        out.dist_diag = dist_diagonal(x, x_adv, cfg.metric);
        out.gradient = std::move(sd.gradient);
        return out;
    };
    return descend(model, x, y_target, cfg, AttackMethod::CwSdtw, term);
}

// ---------------------------------------------------------------------------

namespace {

TimeSeries ce_input_gradient(const Classifier& model, const TimeSeries& x, int y_true) {
    TimeSeries g;
    model.cross_entropy_backward(x, y_true, {}, &g);
    return g;
}

inline double sign(double v) { return static_cast<double>((v > 0) - (v < 0)); }

}  // namespace

TimeSeries fgs_attack(const Classifier& model, const TimeSeries& x, int y_true, double eps) {
    if (!(eps >= 0.0)) throw ConfigError("fgs: eps must be non-negative");
    if (eps == 0.0) return x;
    const auto g = ce_input_gradient(model, x, y_true);
    TimeSeries out = x;
    for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] += eps * sign(g.values()[k]);
    return out;
}

TimeSeries pgd_attack(const Classifier& model, const TimeSeries& x, int y_true, double eps,
                      std::size_t steps, double step_size) {
    if (!(eps >= 0.0)) throw ConfigError("pgd: eps must be non-negative");
    if (!(step_size > 0.0)) throw ConfigError("pgd: step size must be positive");
    TimeSeries out = x;
    if (eps == 0.0) return out;
    for (std::size_t s = 0; s < steps; ++s) {
        const auto g = ce_input_gradient(model, out, y_true);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double moved = out.values()[k] + step_size * sign(g.values()[k]);
            out.values()[k] = std::clamp(moved, x.values()[k] - eps, x.values()[k] + eps);
        }
    }
    return out;
}

std::vector<AdversarialResult> batch_attack(const Classifier& model,
                                            std::span<const AttackJob> work, AttackMethod method,
                                            const AttackConfig& cfg,
                                            const GradientSignParams& sign_params,
                                            std::size_t jobs) {
    cfg.check();
    std::vector<AdversarialResult> results(work.size());
    parallel_for(work.size(), jobs, [&](std::size_t k) {
        const auto& job = work[k];
        AttackConfig local = cfg;
        local.path_seed = cfg.path_seed + k;
        switch (method) {
            case AttackMethod::DtwAr:
                results[k] = dtw_ar_attack(model, job.x, job.y_target, local);
                return;
            case AttackMethod::CwSdtw:
                results[k] = cw_sdtw_attack(model, job.x, job.y_target, local);
                return;
            case AttackMethod::Fgs:
            case AttackMethod::Pgd: {
                AdversarialResult r;
                r.method = method;
                r.y_target = job.y_target;
                r.y_source = model.predict(job.x);
                r.x_adv = method == AttackMethod::Fgs
                              ? fgs_attack(model, job.x, job.y_true, sign_params.eps)
                              : pgd_attack(model, job.x, job.y_true, sign_params.eps,
                                           sign_params.steps, sign_params.step_size);
                r.final_dtw = dtw_value(job.x, r.x_adv, cfg.metric);
                r.final_l2sq = dist_diagonal(job.x, r.x_adv, PointMetric::squared_l2());
                r.final_diag = dist_diagonal(job.x, r.x_adv, cfg.metric);
                r.fooled = model.predict(r.x_adv) == job.y_target;
                r.within_delta = r.final_dtw <= cfg.delta;
                results[k] = std::move(r);
                return;
            }
        }
    });
    return results;
}

double calibrate_delta(const LabeledDataset& ds, const PointMetric& m, double quantile) {
    if (!(quantile >= 0.0 && quantile <= 1.0)) throw ConfigError("calibrate_delta: quantile in [0,1]");
    std::vector<double> dists;
    for (std::size_t a = 0; a < ds.size(); ++a) {
        for (std::size_t b = a + 1; b < ds.size(); ++b) {
            if (ds.label(a) != ds.label(b)) dists.push_back(dtw_value(ds.example(a), ds.example(b), m));
        }
    }
    if (dists.empty()) throw Error("calibrate_delta: dataset has no inter-class pairs");
    std::sort(dists.begin(), dists.end());
    const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(dists.size())));
    return dists[rank == 0 ? 0 : rank - 1];
}

}  // namespace dtwar
