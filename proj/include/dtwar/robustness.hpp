#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtwar/attack.hpp"
#include "dtwar/nn.hpp"
#include "dtwar/signal.hpp"

namespace dtwar {

/// An exact ratio of recorded counts.
struct Rate {
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    double value() const {
        return denominator == 0 ? 0.0
                                : static_cast<double>(numerator) / static_cast<double>(denominator);
    }
};

/// Fraction of results whose x_adv `target_model` labels as y_target.
Rate alpha_eff(std::span<const AdversarialResult> results, const Classifier& target_model);

/// alpha_eff of a fixed result set against a model that played no part in
/// generating it.
Rate transfer_eval(std::span<const AdversarialResult> results, const Classifier& other);

struct AdversarialSample {
    TimeSeries x_adv;
    int y_true = 0;
};

/// Fraction of adversarial inputs mapped back to their clean input's label.
Rate robust_accuracy(const Classifier& model, std::span<const AdversarialSample> samples);

struct AdvTrainConfig {
    std::size_t rounds = 2;
    double augment_fraction = 0.5;
    double alpha1_min = 0.1;
    double alpha1_max = 1.0;
    double alpha2_min = 0.0;
    double alpha2_max = 1.0;
    // rho, eta, max_iters, band, metric; alphas are sampled. Generation stops at
    // 1000 iterations: with alpha2 > alpha1 the DTW loss has no lower bound and
    // longer runs drift far from the data.
    AttackConfig attack = [] {
        AttackConfig a;
        a.max_iters = 1000;
        return a;
    }();
    std::uint64_t seed = 1;

    void check() const;
};

struct AugmentRecord {
    std::size_t source = 0;  // index into the input dataset
    int label = 0;           // label attached to the adversarial example
    int y_target = 0;        // target the attack aimed for
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    bool fooled = false;     // fooled the model of that round
};

struct AdvTrainResult {
    Classifier model;
    std::vector<EpochStats> trace;   // all training epochs, rounds concatenated
    LabeledDataset augmented;        // final training set (clean + adversarial)
    std::vector<AugmentRecord> added;
};

/// Trains on the clean split, then for each round attacks a sampled fraction
/// of the training inputs with DTW-AR (fresh paths, sampled alphas), adds the
/// results under their source's true label, and continues training on the
/// augmented set. rounds = 0 reduces to train().
AdvTrainResult adversarial_train(const ArchitectureSpec& spec, const LabeledDataset& ds,
                                 const AdvTrainConfig& adv, const TrainConfig& cfg,
                                 std::size_t jobs = 1);

enum class DiversityMeasure { L2, Dtw };
const char* to_string(DiversityMeasure m) noexcept;

struct DiversityRow {
    DiversityMeasure measure = DiversityMeasure::Dtw;
    double eps = 0.0;
    double percent = 0.0;        // 100 * dissimilar / total
    std::size_t dissimilar = 0;
    std::size_t total = 0;
};

struct DiversityReport {
    std::vector<DiversityRow> rows;
    std::size_t excluded_groups = 0;  // groups with fewer than two examples
};

/// For each (measure, eps): share of adversarial examples with no other example
/// from the same source closer than eps (strict <, exact duplicates always
/// count as close). L2 is the squared
/// Euclidean distance; DTW uses `metric`.
DiversityReport diversity_report(std::span<const std::vector<TimeSeries>> groups,
                                 std::span<const double> eps_list,
                                 std::span<const DiversityMeasure> measures,
                                 const PointMetric& metric = PointMetric::lp(2.0));

struct MetricRow {
    std::string metric;
    std::string attack;
    std::string model;
    double value = 0.0;
    std::size_t numerator = 0;
    std::size_t denominator = 0;
};

struct RobustnessReport {
    std::vector<MetricRow> rows;

    void add(std::string metric, std::string attack, std::string model, Rate r);
    void add_value(std::string metric, std::string attack, std::string model, double value);
    const MetricRow* find(std::string_view metric, std::string_view attack,
                          std::string_view model) const;

    static const char* csv_header();  // "metric,attack,model,value,numerator,denominator"
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

struct EvalConfig {
    AttackConfig attack{};             // DTW-AR settings for the white-box grid
    GradientSignParams sign{};         // FGS / PGD settings
    bool run_dtw_ar = true;
    std::size_t max_examples = 0;      // 0 uses the whole test set
    std::size_t jobs = 1;
};

/// Clean accuracy plus robust accuracy and alpha_eff under FGS, PGD and
/// white-box DTW-AR (target = next class) on `test`.
RobustnessReport evaluate_model(const Classifier& model, const LabeledDataset& test,
                                const EvalConfig& cfg, const std::string& model_name);

}  // namespace dtwar
