#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtwar/dtw.hpp"
#include "dtwar/nn.hpp"
#include "dtwar/paths.hpp"
#include "dtwar/signal.hpp"

namespace dtwar {

struct AttackConfig {
    double rho = -5.0;     // confidence margin, < 0
    double alpha1 = 0.5;   // weight of dist_P along the random path
    double alpha2 = 0.5;   // weight of the (subtracted) diagonal distance
    double eta = 0.01;     // step size
    // Optional separate step sizes for the label and DTW gradients; both
    // default to eta.
    std::optional<double> eta_label;
    std::optional<double> eta_dtw;
    std::size_t max_iters = 5000;
    double delta = 1.0;    // post-hoc acceptance bound on DTW(X, X_adv)
    AdmissibleBand band{};
    std::uint64_t path_seed = 0;
    // Euclidean frame norm; a true metric keeps alpha1 * dist_P - alpha2 * dist_diag
    // bounded below when alpha1 >= alpha2.
    PointMetric metric = PointMetric::lp(2.0);
    double gamma = 1.0;    // soft-DTW smoothing for the CW-SDTW baseline
    // Frame cost inside soft-DTW for CW-SDTW. Its loss has no subtracted term,
    // so the smooth squared cost is safe there and keeps the gradient small near X.
    PointMetric soft_metric = PointMetric::squared_l2();
    std::size_t snapshot_every = 50;  // keep X_adv every S iterations; 0 disables
    bool record_trace = true;

    void check() const;
    double step_label() const { return eta_label.value_or(eta); }
    double step_dtw() const { return eta_dtw.value_or(eta); }
};

/// Losses of one iterate. dist_p is NaN for attacks without a fixed path.
struct IterationRecord {
    double label_loss = 0.0;
    double dtw_loss = 0.0;
    double dist_p = 0.0;
    double dist_diag = 0.0;
    double total() const { return label_loss + dtw_loss; }
};

struct Snapshot {
    std::size_t iteration = 0;
    TimeSeries x_adv;
};

enum class AttackMethod { DtwAr, CwSdtw, Fgs, Pgd };

const char* to_string(AttackMethod m) noexcept;
AttackMethod parse_attack_method(std::string_view text);

struct AdversarialResult {
    AttackMethod method = AttackMethod::DtwAr;
    TimeSeries x_adv;
    int y_target = 0;
    int y_source = 0;  // model prediction on the clean input
    std::optional<AlignmentPath> path;  // the random path (DTW-AR only)
    /// trace[k] holds the losses of the k-th iterate; iterate 0 is X itself.
    std::vector<IterationRecord> trace;
    std::vector<Snapshot> snapshots;
    std::size_t chosen_iteration = 0;
    bool reached_plateau = false;  // some iterate had label loss == rho
    double final_dtw = 0.0;        // exact DTW(X, x_adv)
    double final_l2sq = 0.0;       // ||X - x_adv||^2
    double final_diag = 0.0;       // diagonal-path distance under the attack metric
    bool fooled = false;           // white-box model predicts y_target
    bool within_delta = false;     // final_dtw <= delta

    /// Fooled, within delta under DTW, but outside delta along the diagonal.
    bool blind_spot(double delta) const {
        return fooled && final_dtw <= delta && final_diag > delta;
    }
};

/// max(max_{y != target} s_y - s_target, rho).
double label_loss(std::span<const double> scores, int y_target, double rho);

/// Subgradient of label_loss with respect to the scores: zero on the rho
/// plateau, otherwise e_{y*} - e_target with y* the first maximiser.
std::vector<double> label_loss_gradient(std::span<const double> scores, int y_target, double rho);

/// alpha1 * dist_P(X, X_cand) - alpha2 * dist_diag(X, X_cand).
double dtw_loss(const TimeSeries& x, const TimeSeries& x_cand, const AlignmentPath& p,
                double alpha1, double alpha2, const PointMetric& m = PointMetric::squared_l2());

TimeSeries dtw_loss_gradient(const TimeSeries& x, const TimeSeries& x_cand,
                             const AlignmentPath& p, double alpha1, double alpha2,
                             const PointMetric& m = PointMetric::squared_l2());

struct LossEvaluation {
    IterationRecord record;
    TimeSeries label_gradient;  // d label_loss / d x_cand
    TimeSeries dtw_gradient;    // d dtw_loss / d x_cand
    double value() const { return record.total(); }
    TimeSeries gradient() const;
};

/// Label loss plus DTW loss, and the gradient of each with respect to x_cand.
LossEvaluation total_loss(const Classifier& model, const TimeSeries& x, const TimeSeries& x_cand,
                          int y_target, const AlignmentPath& p, const AttackConfig& cfg);

/// Targeted attack along one random admissible path (drawn from cfg.path_seed).
AdversarialResult dtw_ar_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                const AttackConfig& cfg);

/// Same as dtw_ar_attack but with a caller-supplied path.
AdversarialResult dtw_ar_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                const AttackConfig& cfg, const AlignmentPath& path);

/// Carlini-Wagner loss with soft-DTW as the similarity term.
AdversarialResult cw_sdtw_attack(const Classifier& model, const TimeSeries& x, int y_target,
                                 const AttackConfig& cfg);

/// Untargeted fast gradient sign step on cross-entropy against y_true.
TimeSeries fgs_attack(const Classifier& model, const TimeSeries& x, int y_true, double eps);

/// Iterated signed steps projected onto the l-infinity ball of radius eps.
TimeSeries pgd_attack(const Classifier& model, const TimeSeries& x, int y_true, double eps,
                      std::size_t steps, double step_size);

struct GradientSignParams {
    double eps = 0.1;
    std::size_t steps = 10;
    double step_size = 0.02;
};

struct AttackJob {
    TimeSeries x;
    int y_true = 0;
    int y_target = 0;
};

/// Runs `method` on every job. Job k uses path seed cfg.path_seed + k, so
/// results do not depend on `jobs` (worker thread count).
std::vector<AdversarialResult> batch_attack(const Classifier& model,
                                            std::span<const AttackJob> work, AttackMethod method,
                                            const AttackConfig& cfg,
                                            const GradientSignParams& sign = {},
                                            std::size_t jobs = 1);

/// Given quantile of DTW distances over all inter-class pairs of `ds`.
double calibrate_delta(const LabeledDataset& ds, const PointMetric& m = PointMetric::squared_l2(),
                       double quantile = 0.1);

}  // namespace dtwar
