#include "dtwar/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "dtwar/error.hpp"
#include "dtwar/parallel.hpp"

namespace dtwar {

Rate alpha_eff(std::span<const AdversarialResult> results, const Classifier& target_model) {
    if (results.empty()) throw Error("alpha_eff: no adversarial results");
    Rate r{0, results.size()};
    for (const auto& res : results) r.numerator += target_model.predict(res.x_adv) == res.y_target;
    return r;
}

Rate transfer_eval(std::span<const AdversarialResult> results, const Classifier& other) {
    return alpha_eff(results, other);
}

Rate robust_accuracy(const Classifier& model, std::span<const AdversarialSample> samples) {
    if (samples.empty()) throw Error("robust_accuracy: no adversarial samples");
    Rate r{0, samples.size()};
    for (const auto& s : samples) r.numerator += model.predict(s.x_adv) == s.y_true;
    return r;
}

// ---------------------------------------------------------------------------

void AdvTrainConfig::check() const {
    if (!(augment_fraction > 0.0 && augment_fraction <= 1.0)) {
        throw ConfigError("advtrain: augment fraction must lie in (0, 1]");
    }
    if (!(alpha1_min > 0.0 && alpha1_min <= alpha1_max)) {
        throw ConfigError("advtrain: need 0 < alpha1_min <= alpha1_max");
    }
    if (!(alpha2_min >= 0.0 && alpha2_min <= alpha2_max)) {
        throw ConfigError("advtrain: need 0 <= alpha2_min <= alpha2_max");
    }
    attack.check();
}

AdvTrainResult adversarial_train(const ArchitectureSpec& spec, const LabeledDataset& ds,
                                 const AdvTrainConfig& adv, const TrainConfig& cfg,
                                 std::size_t jobs) {
    adv.check();
    cfg.check();
    const int K = static_cast<int>(spec.classes());
    auto first = train(Classifier(spec, cfg.seed), ds, cfg);
    AdvTrainResult out{std::move(first.model), std::move(first.trace), ds, {}};

    const auto train_idx = ds.indices(Split::Train);
    for (std::size_t round = 1; round <= adv.rounds; ++round) {
        std::mt19937_64 rng(adv.seed + 7919 * round);
        auto picked = train_idx;
        std::shuffle(picked.begin(), picked.end(), rng);
        const auto take = static_cast<std::size_t>(
            std::ceil(adv.augment_fraction * static_cast<double>(picked.size())));
        picked.resize(std::min(take, picked.size()));

        std::uniform_real_distribution<double> a1(adv.alpha1_min, adv.alpha1_max);
        std::uniform_real_distribution<double> a2(adv.alpha2_min, adv.alpha2_max);
        std::uniform_int_distribution<int> shift(1, K - 1);
        std::vector<AugmentRecord> plan;
        for (auto src : picked) {
            AugmentRecord rec;
            rec.source = src;
            rec.label = ds.label(src);
            rec.y_target = (rec.label + shift(rng)) % K;
            rec.alpha1 = a1(rng);
            rec.alpha2 = a2(rng);
            plan.push_back(rec);
        }

        std::vector<AdversarialResult> made(plan.size());
        const Classifier& current = out.model;
        parallel_for(plan.size(), jobs, [&](std::size_t k) {
            AttackConfig local = adv.attack;
            local.alpha1 = plan[k].alpha1;
            local.alpha2 = plan[k].alpha2;
            local.path_seed = adv.seed + 1000003 * round + plan[k].source;
            local.record_trace = false;
            local.snapshot_every = 0;
            made[k] = dtw_ar_attack(current, ds.example(plan[k].source), plan[k].y_target, local);
        });
        for (std::size_t k = 0; k < plan.size(); ++k) {
            plan[k].fooled = made[k].fooled;
            // adversarial copies keep the clean input's true label
            out.augmented.push_back(made[k].x_adv, plan[k].label, Split::Train);
            out.added.push_back(plan[k]);
        }

        TrainConfig round_cfg = cfg;
        round_cfg.seed = cfg.seed + round;
        auto next = train(out.model, out.augmented, round_cfg);
        out.model = std::move(next.model);
        out.trace.insert(out.trace.end(), next.trace.begin(), next.trace.end());
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(DiversityMeasure m) noexcept {
    return m == DiversityMeasure::L2 ? "l2" : "dtw";
}

DiversityReport diversity_report(std::span<const std::vector<TimeSeries>> groups,
                                 std::span<const double> eps_list,
                                 std::span<const DiversityMeasure> measures,
                                 const PointMetric& metric) {
    DiversityReport report;
    for (auto measure : measures) {
        // nearest-neighbour distance of every example within its group
        std::vector<double> nearest;
        std::size_t excluded = 0;
        for (const auto& g : groups) {
            if (g.size() < 2) {
                ++excluded;
                continue;
            }
            std::vector<double> best(g.size(), std::numeric_limits<double>::infinity());
            for (std::size_t a = 0; a < g.size(); ++a) {
                for (std::size_t b = a + 1; b < g.size(); ++b) {
                    const double d = measure == DiversityMeasure::Dtw
                                         ? dtw_value(g[a], g[b], metric)
                                         : dist_diagonal(g[a], g[b], PointMetric::squared_l2());
                    best[a] = std::min(best[a], d);
                    best[b] = std::min(best[b], d);
                }
            }
            nearest.insert(nearest.end(), best.begin(), best.end());
        }
        report.excluded_groups = excluded;
        for (double eps : eps_list) {
            DiversityRow row{measure, eps, 0.0, 0, nearest.size()};
            // exact duplicates count as the same example even at eps = 0
            for (double d : nearest) row.dissimilar += !(d < eps || d == 0.0);
            row.percent = row.total == 0 ? 0.0
                                         : 100.0 * static_cast<double>(row.dissimilar) /
                                               static_cast<double>(row.total);
            report.rows.push_back(row);
        }
    }
    if (report.excluded_groups > 0) {
        std::cerr << "diversity_report: excluded " << report.excluded_groups
                  << " group(s) with fewer than two examples\n";
    }
    return report;
}

// ---------------------------------------------------------------------------

void RobustnessReport::add(std::string metric, std::string attack, std::string model, Rate r) {
    rows.push_back({std::move(metric), std::move(attack), std::move(model), r.value(), r.numerator,
                    r.denominator});
}

void RobustnessReport::add_value(std::string metric, std::string attack, std::string model,
                                 double value) {
    rows.push_back({std::move(metric), std::move(attack), std::move(model), value, 0, 0});
}

const MetricRow* RobustnessReport::find(std::string_view metric, std::string_view attack,
                                        std::string_view model) const {
    for (const auto& r : rows) {
        if (r.metric == metric && r.attack == attack && r.model == model) return &r;
    }
    return nullptr;
}

const char* RobustnessReport::csv_header() {
    return "metric,attack,model,value,numerator,denominator";
}

std::string RobustnessReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << csv_header() << '\n';
    for (const auto& r : rows) {
        os << r.metric << ',' << r.attack << ',' << r.model << ',' << r.value << ',' << r.numerator
           << ',' << r.denominator << '\n';
    }
    return os.str();
}

void RobustnessReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path.string());
    out << to_csv();
}

RobustnessReport evaluate_model(const Classifier& model, const LabeledDataset& test,
                                const EvalConfig& cfg, const std::string& model_name) {
    if (test.empty()) throw Error("evaluate_model: empty test set");
    std::vector<std::size_t> idx(test.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    if (cfg.max_examples > 0 && cfg.max_examples < idx.size()) idx.resize(cfg.max_examples);
    const auto data = test.subset(idx);
    const int K = static_cast<int>(model.spec().classes());

    RobustnessReport report;
    Rate clean{0, data.size()};
    for (std::size_t k = 0; k < data.size(); ++k) {
        clean.numerator += model.predict(data.example(k)) == data.label(k);
    }
    report.add("clean_accuracy", "none", model_name, clean);

    std::vector<AttackJob> jobs;
    for (std::size_t k = 0; k < data.size(); ++k) {
        jobs.push_back({data.example(k), data.label(k), (data.label(k) + 1) % K});
    }
    std::vector<AttackMethod> methods{AttackMethod::Fgs, AttackMethod::Pgd};
    if (cfg.run_dtw_ar) methods.push_back(AttackMethod::DtwAr);
    for (auto method : methods) {
        AttackConfig acfg = cfg.attack;
        acfg.record_trace = false;
        acfg.snapshot_every = 0;
        const auto results = batch_attack(model, jobs, method, acfg, cfg.sign, cfg.jobs);
        std::vector<AdversarialSample> samples;
        for (std::size_t k = 0; k < results.size(); ++k) {
            samples.push_back({results[k].x_adv, jobs[k].y_true});
        }
        report.add("robust_accuracy", to_string(method), model_name, robust_accuracy(model, samples));
        if (method == AttackMethod::DtwAr) {
            report.add("alpha_eff", to_string(method), model_name, alpha_eff(results, model));
            Rate blind{0, results.size()};
            for (const auto& r : results) {
                blind.numerator += r.blind_spot(acfg.delta);
            }
            report.add("blind_spots", to_string(method), model_name, blind);
        }
    }
    return report;
}

}  // namespace dtwar
