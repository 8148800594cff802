#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dtwar/error.hpp"
#include "dtwar/robustness.hpp"
#include "gen.hpp"

using namespace dtwar;

namespace {

struct Small {
    LabeledDataset data;  // tagged
    Classifier model;
};

const Small& small_model() {
    static const Small s = [] {
        auto ds = split(synth_two_class(60, 1, 16, 4), {0.6, 0.2, 0.2}, 4);
        TrainConfig cfg;
        cfg.epochs = 30;
        auto model = train(Classifier(ArchitectureSpec::preset("mlp", 1, 16, 2), 2), ds, cfg).model;
        return Small{std::move(ds), std::move(model)};
    }();
    return s;
}

AdvTrainConfig quick_adv() {
    AdvTrainConfig adv;
    adv.attack.max_iters = 40;
    adv.augment_fraction = 0.25;
    return adv;
}

TrainConfig quick_train() {
    TrainConfig cfg;
    cfg.epochs = 5;
    return cfg;
}

}  // namespace

TEST_CASE("alpha_eff counts target hits") {
    const auto& s = small_model();
    const auto test = s.data.subset(Split::Test);
    std::vector<AdversarialResult> results;
    for (std::size_t k = 0; k < test.size(); ++k) {
        AdversarialResult r;
        r.x_adv = test.example(k);
        r.y_target = s.model.predict(test.example(k));  // "fools" by construction
        results.push_back(r);
    }
    const auto all = alpha_eff(results, s.model);
    CHECK(all.value() == 1.0);
    CHECK(all.denominator == test.size());
    for (auto& r : results) r.y_target = 1 - r.y_target;
    CHECK(alpha_eff(results, s.model).value() == 0.0);
    CHECK_THROWS(alpha_eff(std::span<const AdversarialResult>{}, s.model));
    CHECK_THROWS(robust_accuracy(s.model, std::span<const AdversarialSample>{}));
}

TEST_CASE("transfer_eval against the generating model equals white-box alpha_eff") {
    const auto& s = small_model();
    const auto test = s.data.subset(Split::Test);
    std::vector<AttackJob> jobs;
    for (std::size_t k = 0; k < test.size(); ++k) jobs.push_back({test.example(k), test.label(k), 1 - test.label(k)});
    AttackConfig cfg;
    cfg.max_iters = 100;
    const auto results = batch_attack(s.model, jobs, AttackMethod::DtwAr, cfg);
    const auto white = alpha_eff(results, s.model);
    const auto same = transfer_eval(results, s.model);
    CHECK(white.numerator == same.numerator);
    CHECK(white.denominator == same.denominator);
    std::size_t fooled = 0;
    for (const auto& r : results) fooled += r.fooled;
    CHECK(white.numerator == fooled);
}

TEST_CASE("rates lie in [0, 1]") {
    const auto& s = small_model();
    gen::Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<AdversarialSample> samples;
        const int n = gen::uniform_int(rng, 1, 10);
        for (int k = 0; k < n; ++k) samples.push_back({gen::series(rng, 1, 16, 2.0), gen::uniform_int(rng, 0, 1)});
        const double v = robust_accuracy(s.model, samples).value();
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(Rate{}.value() == 0.0);
}

TEST_CASE("diversity of identical and distinct groups") {
    gen::Rng rng(9);
    const auto base = gen::series(rng, 1, 8);
    const std::vector<std::vector<TimeSeries>> same{{base, base, base}, {base, base}};
    const std::vector<double> eps{0.0, 0.05, 1.0};
    const std::vector<DiversityMeasure> both{DiversityMeasure::Dtw, DiversityMeasure::L2};
    for (const auto& row : diversity_report(same, eps, both).rows) {
        CHECK(row.percent == 0.0);
        CHECK(row.total == 5);
    }

    std::vector<std::vector<TimeSeries>> distinct(3);
    for (auto& g : distinct) {
        for (int k = 0; k < 4; ++k) g.push_back(gen::series(rng, 1, 8));
    }
    const auto rep = diversity_report(distinct, eps, both);
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.rows[0].percent == 100.0);  // eps = 0
    CHECK(rep.rows[3].percent == 100.0);
    CHECK(rep.excluded_groups == 0);
}

TEST_CASE("diversity is non-increasing in eps") {
    gen::Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<TimeSeries>> groups(3);
        for (auto& g : groups) {
            const auto c = gen::series(rng, 2, 6);
            for (int k = 0; k < 5; ++k) {
                auto z = c;
                for (auto& v : z.values()) v += gen::uniform(rng, -0.3, 0.3);
                g.push_back(z);
            }
        }
        std::vector<double> eps;
        for (int k = 0; k <= 20; ++k) eps.push_back(0.1 * k);
        const std::vector<DiversityMeasure> both{DiversityMeasure::Dtw, DiversityMeasure::L2};
        const auto rep = diversity_report(groups, eps, both);
        for (std::size_t k = 1; k < rep.rows.size(); ++k) {
            if (rep.rows[k].measure == rep.rows[k - 1].measure) CHECK(rep.rows[k].percent <= rep.rows[k - 1].percent);
        }
    }
}

TEST_CASE("diversity skips groups with fewer than two examples") {
    gen::Rng rng(11);
    const std::vector<std::vector<TimeSeries>> groups{{gen::series(rng, 1, 5)}, {}, {gen::series(rng, 1, 5), gen::series(rng, 1, 5)}};
    const std::vector<double> eps{0.0};
    const std::vector<DiversityMeasure> dtw_only{DiversityMeasure::Dtw};
    const auto rep = diversity_report(groups, eps, dtw_only);
    CHECK(rep.excluded_groups == 2);
    CHECK(rep.rows.at(0).total == 2);
}

TEST_CASE("adversarial training with zero rounds is plain training") {
    const auto& s = small_model();
    auto adv = quick_adv();
    adv.rounds = 0;
    const auto spec = ArchitectureSpec::preset("mlp", 1, 16, 2);
    const auto cfg = quick_train();
    const auto a = adversarial_train(spec, s.data, adv, cfg);
    const auto b = train(Classifier(spec, cfg.seed), s.data, cfg);
    CHECK(a.model == b.model);
    CHECK(a.added.empty());
    CHECK(a.augmented == s.data);
}

TEST_CASE("adversarial training labels and determinism") {
    const auto& s = small_model();
    const auto adv = quick_adv();
    const auto spec = ArchitectureSpec::preset("mlp", 1, 16, 2);
    const auto a = adversarial_train(spec, s.data, adv, quick_train());
    const auto b = adversarial_train(spec, s.data, adv, quick_train(), 3);
    CHECK(a.model == b.model);
    CHECK(a.augmented == b.augmented);

    const std::size_t per_round = static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(s.data.indices(Split::Train).size())));
    REQUIRE(a.added.size() == 2 * per_round);
    REQUIRE(a.augmented.size() == s.data.size() + a.added.size());
    for (std::size_t k = 0; k < a.added.size(); ++k) {
        const auto& rec = a.added[k];
        CHECK(s.data.tag(rec.source) == Split::Train);
        CHECK(rec.label == s.data.label(rec.source));
        CHECK(rec.y_target != rec.label);
        CHECK(rec.alpha1 >= adv.alpha1_min);
        CHECK(rec.alpha1 <= adv.alpha1_max);
        CHECK(a.augmented.label(s.data.size() + k) == rec.label);
        CHECK(a.augmented.tag(s.data.size() + k) == Split::Train);
    }
    CHECK(a.trace.size() == 3 * quick_train().epochs);

    auto bad = adv;
    bad.augment_fraction = 0.0;
    CHECK_THROWS_AS(adversarial_train(spec, s.data, bad, quick_train()), ConfigError);
}

TEST_CASE("report CSV layout") {
    RobustnessReport rep;
    rep.add("robust_accuracy", "fgs", "clean", Rate{3, 4});
    rep.add_value("silhouette", "none", "clean", -0.5);
    const auto csv = rep.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "metric,attack,model,value,numerator,denominator");
    std::getline(in, line);
    CHECK(line == "robust_accuracy,fgs,clean,0.75,3,4");
    REQUIRE(rep.find("silhouette", "none", "clean") != nullptr);
    CHECK(rep.find("silhouette", "none", "clean")->value == -0.5);
    CHECK(rep.find("missing", "none", "clean") == nullptr);
}

TEST_CASE("evaluate_model rows") {
    const auto& s = small_model();
    EvalConfig cfg;
    cfg.attack.max_iters = 50;
    cfg.attack.delta = calibrate_delta(s.data, cfg.attack.metric);
    const auto rep = evaluate_model(s.model, s.data.subset(Split::Test), cfg, "m");
    for (auto [metric, attack] : std::vector<std::pair<const char*, const char*>>{
             {"clean_accuracy", "none"}, {"robust_accuracy", "fgs"}, {"robust_accuracy", "pgd"},
             {"robust_accuracy", "dtw-ar"}, {"alpha_eff", "dtw-ar"}, {"blind_spots", "dtw-ar"}}) {
        const auto* row = rep.find(metric, attack, "m");
        REQUIRE(row != nullptr);
        CHECK(row->value >= 0.0);
        CHECK(row->value <= 1.0);
        CHECK(row->denominator == s.data.indices(Split::Test).size());
    }
}
