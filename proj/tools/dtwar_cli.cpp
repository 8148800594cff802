// dtwar: train classifiers, run DTW-AR and baseline attacks, adversarial
// training, evaluation grids, runtime benchmarks, MDS embeddings and path
// utilities. Every output goes under --out.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dtwar/analysis.hpp"
#include "dtwar/error.hpp"
#include "dtwar/robustness.hpp"
#include "json_config.hpp"

namespace fs = std::filesystem;
using namespace dtwar;

namespace {

struct Options {
    // global
    std::string out = "dtwar-out";
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    bool plot_data = false;

    // data
    std::string data = "synth";
    std::size_t channels = 1;
    std::size_t length = 32;
    std::size_t synth_count = 200;
    std::vector<double> split{0.6, 0.2, 0.2};
    bool normalize = false;
    std::size_t max_examples = 0;

    // model
    std::string arch = "a0-small";
    std::string checkpoint;
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double lr = 0.01;
    double momentum = 0.9;

    // attack
    std::string attack = "dtw-ar";
    double rho = -5.0;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    double eta = 0.01;
    double eta_label = 0.0;
    double eta_dtw = 0.0;
    std::size_t max_iters = 5000;
    std::string delta = "auto";
    double band = 0.5;
    std::string metric = "lp:2";
    double gamma = 1.0;
    std::string soft_metric = "sql2";
    std::size_t snapshot_every = 50;
    double eps = 0.1;
    std::size_t pgd_steps = 10;
    double pgd_step_size = 0.02;

    // attack subcommand
    std::string targets = "per-class";
    bool trace = false;

    // eval subcommand
    std::string transfer;
    bool skip_dtw_ar = false;

    // advtrain subcommand
    std::size_t rounds = 2;
    double augment_fraction = 0.5;
    std::vector<double> alpha1_range{0.1, 1.0};
    std::vector<double> alpha2_range{0.0, 1.0};
    std::size_t adv_max_iters = 1000;

    // bench subcommand
    std::vector<std::size_t> lengths{64, 128, 256, 512};
    std::size_t bench_channels = 3;
    std::size_t reps = 10;
    double min_window = 0.01;

    // mds subcommand
    std::vector<std::string> measures{"dtw", "l2"};
    std::string mds_metric = "sql2";
    std::size_t dims = 2;

    // paths subcommand
    std::size_t grid = 32;
    std::size_t sample = 0;
    std::vector<std::string> sim;
};

// ---------------------------------------------------------------------------
// helpers

fs::path out_file(const Options& o, const std::string& name) { return fs::path(o.out) / name; }

std::ofstream open_out(const Options& o, const std::string& name) {
    std::ofstream f(out_file(o, name));
    if (!f) throw Error("cannot write " + out_file(o, name).string());
    f.precision(17);
    return f;
}

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

LabeledDataset load_data(const Options& o) {
    LabeledDataset ds;
    if (o.data == "synth") {
        ds = synth_two_class(o.synth_count, o.channels, o.length, o.seed);
    } else {
        require_file(o.data, "dataset");
        ds = load_csv(o.data, o.channels, o.length);
    }
    if (o.normalize) ds = ds.normalized();
    if (o.split.size() != 3) throw ConfigError("--split needs three ratios");
    return split(ds, {o.split[0], o.split[1], o.split[2]}, o.seed);
}

LabeledDataset limited(const LabeledDataset& ds, std::size_t max_examples) {
    if (max_examples == 0 || max_examples >= ds.size()) return ds;
    std::vector<std::size_t> idx(max_examples);
    std::iota(idx.begin(), idx.end(), 0);
    return ds.subset(idx);
}

ArchitectureSpec make_spec(const Options& o, const LabeledDataset& ds) {
    const auto k = static_cast<std::size_t>(ds.num_classes());
    if (o.arch.find(';') != std::string::npos) {
        auto spec = ArchitectureSpec::parse(o.arch);
        if (spec.channels() != ds.channels() || spec.length() != ds.length() || spec.classes() < k) {
            throw ConfigError("--arch shape " + spec.to_string() + " does not fit the dataset");
        }
        return spec;
    }
    return ArchitectureSpec::preset(o.arch, ds.channels(), ds.length(), k);
}

TrainConfig make_train(const Options& o) {
    TrainConfig t;
    t.epochs = o.epochs;
    t.batch_size = o.batch_size;
    t.learning_rate = o.lr;
    t.momentum = o.momentum;
    t.seed = o.seed;
    t.check();
    return t;
}

std::string checkpoint_path(const Options& o, const char* fallback) {
    return o.checkpoint.empty() ? out_file(o, fallback).string() : o.checkpoint;
}

Classifier load_model(const std::string& path, const LabeledDataset& ds) {
    require_file(path, "checkpoint");
    auto model = Classifier::load(path);
    const auto& s = model.spec();
    if (s.channels() != ds.channels() || s.length() != ds.length() ||
        static_cast<int>(s.classes()) < ds.num_classes()) {
        throw ConfigError("checkpoint " + path + " expects shape (" + std::to_string(s.channels()) +
                          ", " + std::to_string(s.length()) + ") with " +
                          std::to_string(s.classes()) + " classes; dataset has (" +
                          std::to_string(ds.channels()) + ", " + std::to_string(ds.length()) +
                          ") with " + std::to_string(ds.num_classes()));
    }
    return model;
}

AttackConfig make_attack(const Options& o, const LabeledDataset& ds) {
    AttackConfig a;
    a.rho = o.rho;
    a.alpha1 = o.alpha1;
    a.alpha2 = o.alpha2;
    a.eta = o.eta;
    if (o.eta_label > 0) a.eta_label = o.eta_label;
    if (o.eta_dtw > 0) a.eta_dtw = o.eta_dtw;
    a.max_iters = o.max_iters;
    a.band.radius = o.band;
    a.metric = parse_metric(o.metric);
    a.soft_metric = parse_metric(o.soft_metric);
    a.gamma = o.gamma;
    a.snapshot_every = o.snapshot_every;
    a.path_seed = o.seed + 1000;
    if (o.delta == "auto") {
        a.delta = calibrate_delta(ds.subset(Split::Train), a.metric);
    } else {
        try {
            std::size_t used = 0;
            a.delta = std::stod(o.delta, &used);
            if (used != o.delta.size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ConfigError("--delta must be a number or 'auto', got '" + o.delta + "'");
        }
    }
    a.check();
    return a;
}

GradientSignParams make_sign(const Options& o) {
    if (!(o.eps >= 0.0)) throw ConfigError("--eps must be non-negative");
    return {o.eps, o.pgd_steps, o.pgd_step_size};
}

std::vector<AttackJob> make_jobs(const LabeledDataset& test, int classes, const std::string& targets) {
    std::vector<int> allowed;
    if (targets != "all" && targets != "per-class") {
        std::stringstream ss(targets);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                const int t = std::stoi(tok, &used);
                if (used != tok.size() || t < 0 || t >= classes) throw std::out_of_range(tok);
                allowed.push_back(t);
            } catch (const std::exception&) {
                throw ConfigError("--targets: '" + tok + "' is not a class in [0, " +
                                  std::to_string(classes) + ")");
            }
        }
        if (allowed.empty()) throw ConfigError("--targets list is empty");
    }
    std::vector<AttackJob> jobs;
    for (std::size_t k = 0; k < test.size(); ++k) {
        const int y = test.label(k);
        if (targets == "per-class") {
            jobs.push_back({test.example(k), y, (y + 1) % classes});
            continue;
        }
        for (int t = 0; t < classes; ++t) {
            if (t == y) continue;
            if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), t) == allowed.end()) continue;
            jobs.push_back({test.example(k), y, t});
        }
    }
    return jobs;
}

// Example index of every job, for the results file.
std::vector<std::size_t> job_sources(const LabeledDataset& test, const std::vector<AttackJob>& jobs) {
    std::vector<std::size_t> src;
    std::size_t k = 0;
    for (const auto& j : jobs) {
        while (k < test.size() && !(test.example(k) == j.x && test.label(k) == j.y_true)) ++k;
        src.push_back(k);
    }
    return src;
}

double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const auto m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// ---------------------------------------------------------------------------
// commands

int cmd_train(const Options& o) {
    const auto ds = load_data(o);
    const auto spec = make_spec(o, ds);
    const auto cfg = make_train(o);
    const auto result = train(Classifier(spec, cfg.seed), ds, cfg);
    result.model.save(out_file(o, "model.ckpt"));

    auto metrics = open_out(o, "train_metrics.csv");
    metrics << "epoch,loss,accuracy\n";
    for (const auto& e : result.trace) metrics << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
    if (o.plot_data) {
        auto dat = open_out(o, "train_metrics.dat");
        dat << "# epoch loss accuracy\n";
        for (const auto& e : result.trace) dat << e.epoch << ' ' << e.loss << ' ' << e.accuracy << '\n';
    }

    auto summary = open_out(o, "train_summary.csv");
    summary << "split,examples,accuracy\n";
    for (auto s : {Split::Train, Split::Validation, Split::Test}) {
        const auto sub = ds.subset(s);
        const double acc = sub.empty() ? NAN : accuracy(result.model, sub);
        summary << to_string(s) << ',' << sub.size() << ',' << acc << '\n';
        std::printf("%-10s %4zu examples  accuracy %.4f\n", to_string(s), sub.size(), acc);
    }
    std::printf("spec %s\ncheckpoint %s\n", spec.to_string().c_str(), out_file(o, "model.ckpt").c_str());
    return 0;
}

int cmd_attack(const Options& o) {
    const auto ds = load_data(o);
    const auto model = load_model(checkpoint_path(o, "model.ckpt"), ds);
    const auto method = parse_attack_method(o.attack);
    auto cfg = make_attack(o, ds);
    cfg.record_trace = o.trace;
    const auto sign = make_sign(o);
    const auto test = limited(ds.subset(Split::Test), o.max_examples);
    if (test.empty()) throw ConfigError("test split is empty");
    const int classes = static_cast<int>(model.spec().classes());
    const auto jobs = make_jobs(test, classes, o.targets);
    if (jobs.empty()) throw ConfigError("no attack jobs for --targets " + o.targets);
    const auto source = job_sources(test, jobs);

    const auto results = batch_attack(model, jobs, method, cfg, sign, o.jobs);

    auto rows = open_out(o, "results.csv");
    rows << "job,example,y_true,y_target,y_source,prediction,fooled,final_dtw,final_l2sq,final_diag,"
            "within_delta,blind_spot,chosen_iteration,reached_plateau,path\n";
    std::size_t blind = 0;
    double dtw_sum = 0.0;
    LabeledDataset adversarial;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        const bool b = r.blind_spot(cfg.delta);
        blind += b;
        dtw_sum += r.final_dtw;
        rows << k << ',' << source[k] << ',' << jobs[k].y_true << ',' << r.y_target << ',' << r.y_source
             << ',' << model.predict(r.x_adv) << ',' << r.fooled << ',' << r.final_dtw << ','
             << r.final_l2sq << ',' << r.final_diag << ',' << r.within_delta << ',' << b << ','
             << r.chosen_iteration << ',' << r.reached_plateau << ",\""
             << (r.path ? to_string(*r.path) : std::string()) << "\"\n";
        adversarial.push_back(r.x_adv, jobs[k].y_true, Split::Test);
    }
    write_csv(adversarial, out_file(o, "adversarial.csv"));

    const auto eff = alpha_eff(results, model);
    auto summary = open_out(o, "summary.csv");
    summary << "metric,value\n"
            << "attack," << to_string(method) << '\n'
            << "jobs," << results.size() << '\n'
            << "alpha_eff," << eff.value() << '\n'
            << "fooled," << eff.numerator << '\n'
            << "mean_final_dtw," << dtw_sum / static_cast<double>(results.size()) << '\n'
            << "delta," << cfg.delta << '\n'
            << "blind_spots," << blind << '\n';

    if (o.trace) {
        auto tr = open_out(o, "trace.csv");
        tr << "job,iteration,label_loss,dtw_loss,dist_p,dist_diag\n";
        for (std::size_t k = 0; k < results.size(); ++k) {
            for (std::size_t i = 0; i < results[k].trace.size(); ++i) {
                const auto& t = results[k].trace[i];
                tr << k << ',' << i << ',' << t.label_loss << ',' << t.dtw_loss << ',' << t.dist_p << ','
                   << t.dist_diag << '\n';
            }
        }
    }
    if (method == AttackMethod::DtwAr && cfg.snapshot_every > 0) {
        auto ps = open_out(o, "pathsim.csv");
        ps << "job,iteration,path_sim\n";
        std::map<std::size_t, std::vector<double>> by_iter;
        for (std::size_t k = 0; k < results.size(); ++k) {
            for (const auto& p : pathsim_trace(results[k], jobs[k].x, cfg.metric)) {
                ps << k << ',' << p.iteration << ',' << p.path_sim << '\n';
                by_iter[p.iteration].push_back(p.path_sim);
            }
        }
        if (o.plot_data) {
            auto dat = open_out(o, "pathsim.dat");
            dat << "# iteration median_path_sim\n";
            for (const auto& [it, v] : by_iter) dat << it << ' ' << median(v) << '\n';
        }
    }

    std::printf("%s: %zu jobs, alpha_eff %.4f (%zu/%zu), mean DTW %.4g, delta %.4g, blind spots %zu\n",
                to_string(method), results.size(), eff.value(), eff.numerator, eff.denominator,
                dtw_sum / static_cast<double>(results.size()), cfg.delta, blind);
    return 0;
}

EvalConfig make_eval(const Options& o, const LabeledDataset& ds) {
    EvalConfig e;
    e.attack = make_attack(o, ds);
    e.sign = make_sign(o);
    e.run_dtw_ar = !o.skip_dtw_ar;
    e.max_examples = o.max_examples;
    e.jobs = o.jobs;
    return e;
}

int cmd_eval(const Options& o) {
    const auto ds = load_data(o);
    const auto model = load_model(checkpoint_path(o, "model.ckpt"), ds);
    const auto cfg = make_eval(o, ds);
    const auto test = ds.subset(Split::Test);
    auto report = evaluate_model(model, test, cfg, "model");

    if (!o.transfer.empty()) {
        const auto other = load_model(o.transfer, ds);
        const auto sub = limited(test, o.max_examples);
        const auto jobs = make_jobs(sub, static_cast<int>(model.spec().classes()), "per-class");
        auto acfg = cfg.attack;
        acfg.record_trace = false;
        acfg.snapshot_every = 0;
        const auto results = batch_attack(model, jobs, AttackMethod::DtwAr, acfg, cfg.sign, o.jobs);
        report.add("alpha_eff", "dtw-ar", "transfer", transfer_eval(results, other));
    }
    report.write_csv(out_file(o, "report.csv"));
    std::fputs(report.to_csv().c_str(), stdout);
    return 0;
}

int cmd_advtrain(const Options& o) {
    const auto ds = load_data(o);
    const auto spec = make_spec(o, ds);
    const auto tcfg = make_train(o);
    if (o.alpha1_range.size() != 2 || o.alpha2_range.size() != 2) {
        throw ConfigError("--alpha1-range and --alpha2-range take two values");
    }
    AdvTrainConfig adv;
    adv.rounds = o.rounds;
    adv.augment_fraction = o.augment_fraction;
    adv.alpha1_min = o.alpha1_range[0];
    adv.alpha1_max = o.alpha1_range[1];
    adv.alpha2_min = o.alpha2_range[0];
    adv.alpha2_max = o.alpha2_range[1];
    adv.attack = make_attack(o, ds);
    adv.attack.max_iters = o.adv_max_iters;
    adv.seed = o.seed;
    adv.check();

    const auto result = adversarial_train(spec, ds, adv, tcfg, o.jobs);
    result.model.save(out_file(o, "model_adv.ckpt"));

    auto metrics = open_out(o, "advtrain_metrics.csv");
    metrics << "step,epoch,loss,accuracy\n";
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
        const auto& e = result.trace[k];
        metrics << k << ',' << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
    }
    auto added = open_out(o, "augment.csv");
    added << "source,label,y_target,alpha1,alpha2,fooled\n";
    for (const auto& a : result.added) {
        added << a.source << ',' << a.label << ',' << a.y_target << ',' << a.alpha1 << ',' << a.alpha2
              << ',' << a.fooled << '\n';
    }

    const auto test = ds.subset(Split::Test);
    const auto cfg = make_eval(o, ds);
    const auto report = evaluate_model(result.model, test, cfg, "model");
    report.write_csv(out_file(o, "report.csv"));

    // held-out DTW-AR attacks on the clean model, replayed against both models
    const auto clean = train(Classifier(spec, tcfg.seed), ds, tcfg).model;
    const auto sub = limited(test, o.max_examples);
    const auto jobs = make_jobs(sub, static_cast<int>(spec.classes()), "per-class");
    auto acfg = adv.attack;
    acfg.path_seed = o.seed + 1000;
    acfg.record_trace = false;
    acfg.snapshot_every = 0;
    const auto results = batch_attack(clean, jobs, AttackMethod::DtwAr, acfg, cfg.sign, o.jobs);
    std::vector<AdversarialSample> fooled;
    for (std::size_t k = 0; k < results.size(); ++k) {
        if (results[k].fooled) fooled.push_back({results[k].x_adv, jobs[k].y_true});
    }
    RobustnessReport held;
    held.add("clean_accuracy", "none", "clean", Rate{static_cast<std::size_t>(std::lround(accuracy(clean, test) * static_cast<double>(test.size()))), test.size()});
    held.add("clean_accuracy", "none", "robust", Rate{static_cast<std::size_t>(std::lround(accuracy(result.model, test) * static_cast<double>(test.size()))), test.size()});
    if (!fooled.empty()) {
        held.add("robust_accuracy", "dtw-ar-heldout", "clean", robust_accuracy(clean, fooled));
        held.add("robust_accuracy", "dtw-ar-heldout", "robust", robust_accuracy(result.model, fooled));
    }
    held.add("alpha_eff", "dtw-ar-heldout", "robust", transfer_eval(results, result.model));
    held.write_csv(out_file(o, "heldout.csv"));

    std::fputs(report.to_csv().c_str(), stdout);
    std::fputs(held.to_csv().c_str(), stdout);
    return 0;
}

int cmd_bench(const Options& o) {
    const auto recs = runtime_bench(o.lengths, o.bench_channels, o.reps, o.seed, o.min_window);
    write_bench_csv(recs, out_file(o, "bench.csv"));
    std::map<std::size_t, std::map<std::string, double>> by_len;
    for (const auto& r : recs) by_len[r.length][r.method] = r.mean_seconds;
    std::printf("%8s %14s %14s %14s %10s\n", "T", "exact-dtw", "soft-dtw", "dist-p", "dtw/dist-p");
    for (auto& [t, m] : by_len) {
        std::printf("%8zu %14.6g %14.6g %14.6g %10.1f\n", t, m["exact-dtw"], m["soft-dtw"], m["dist-p"],
                    m["exact-dtw"] / m["dist-p"]);
    }
    if (o.plot_data) {
        auto dat = open_out(o, "bench.dat");
        dat << "# T exact_dtw soft_dtw dist_p\n";
        for (auto& [t, m] : by_len) dat << t << ' ' << m["exact-dtw"] << ' ' << m["soft-dtw"] << ' ' << m["dist-p"] << '\n';
    }
    return 0;
}

int cmd_mds(const Options& o) {
    const auto ds = limited(load_data(o), o.max_examples);
    const auto metric = parse_metric(o.mds_metric);
    std::vector<std::pair<std::string, double>> scores;
    for (const auto& name : o.measures) {
        const auto measure = parse_measure(name);
        std::optional<AlignmentPath> path;
        if (measure == Measure::DistP) {
            path = random_admissible_path(static_cast<int>(ds.length()), AdmissibleBand{o.band}, o.seed + 1000);
        }
        const auto d = distance_matrix(ds, measure, metric, o.jobs, path);
        const auto e = mds_embed(d, o.dims);
        const std::string stem = std::string("mds_") + to_string(measure);
        write_mds_csv(e, ds.labels(), out_file(o, stem + ".csv"));
        if (o.plot_data) {
            write_mds_gnuplot(out_file(o, stem + ".gp"), stem + ".csv", std::string(to_string(measure)) + " space");
        }
        if (e.negative > 0) {
            std::fprintf(stderr, "%s: %zu negative eigenvalue(s) in the spectrum\n", to_string(measure), e.negative);
        }
        scores.emplace_back(to_string(measure), silhouette(e, ds.labels()));
    }
    auto sil = open_out(o, "silhouette.csv");
    sil << "measure,silhouette\n";
    std::printf("%zu examples, metric %s\n", ds.size(), to_string(metric).c_str());
    for (const auto& [m, s] : scores) {
        sil << m << ',' << s << '\n';
        std::printf("silhouette(%s) = %.6f\n", m.c_str(), s);
    }
    return 0;
}

AlignmentPath read_path(const std::string& arg) {
    std::string text = arg;
    if (fs::is_regular_file(arg)) {
        std::ifstream in(arg);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    }
    try {
        return parse_path(text);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("--sim: ") + e.what());
    }
}

int cmd_paths(const Options& o) {
    if (o.sample == 0 && o.sim.empty()) throw ConfigError("paths: give --sample N or --sim A B");
    const AdmissibleBand band{o.band};
    band.check();
    if (o.sample > 0) {
        auto f = open_out(o, "paths.txt");
        for (std::size_t k = 0; k < o.sample; ++k) {
            const auto p = random_admissible_path(static_cast<int>(o.grid), band, o.seed + 1000 + k);
            f << to_string(p) << '\n';
            std::printf("%s\n", to_string(p).c_str());
        }
    }
    if (!o.sim.empty()) {
        if (o.sim.size() != 2) throw ConfigError("--sim takes exactly two paths");
        const auto a = read_path(o.sim[0]), b = read_path(o.sim[1]);
        for (const auto* p : {&a, &b}) {
            if (auto v = validate(*p)) throw ConfigError("invalid path: " + v->message);
        }
        const double s = path_sim(a, b);
        auto f = open_out(o, "pathsim.csv");
        f << "grid,path_sim\n" << a.grid() << ',' << s << '\n';
        std::printf("path_sim = %.17g\n", s);
    }
    return 0;
}

// ---------------------------------------------------------------------------

void add_options(CLI::App& app, Options& o) {
    app.add_option("-o,--out", o.out, "Output directory; every file is written here")->capture_default_str();
    app.add_option("--seed", o.seed,
                   "Global seed: data and split use seed, training uses seed, attack job k uses path seed seed+1000+k")
        ->capture_default_str();
    app.add_option("-j,--jobs", o.jobs, "Worker threads for batch attacks and distance matrices")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--plot-data", o.plot_data, "Also write whitespace-separated .dat columns / gnuplot scripts");

    const char* data = "Data";
    app.add_option("--data", o.data, "'synth' or a CSV file (label, then channel-major values per row)")
        ->group(data)
        ->capture_default_str();
    app.add_option("--channels", o.channels, "Channels n per example")->group(data)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--length", o.length, "Length T per example")->group(data)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--synth-count", o.synth_count, "Examples generated for --data synth")->group(data)->capture_default_str();
    app.add_option("--split", o.split, "Train, validation and test ratios")->group(data)->expected(3)->capture_default_str();
    app.add_flag("--normalize,!--no-normalize", o.normalize, "Z-normalize every channel of every example (default off)")->group(data);
    app.add_option("--max-examples", o.max_examples, "Use at most this many test examples (0 = all)")->group(data)->capture_default_str();

    const char* model = "Model";
    app.add_option("--arch", o.arch,
                   "Preset (a0, a1, a0-small, a1-small, mlp) or a spec string such as 'n=1;T=32;K=2;conv:8:5;pool:2;linear:2'")
        ->group(model)
        ->capture_default_str();
    app.add_option("--checkpoint", o.checkpoint, "Checkpoint to load (default <out>/model.ckpt)")->group(model);
    app.add_option("--epochs", o.epochs, "Training epochs")->group(model)->capture_default_str();
    app.add_option("--batch-size", o.batch_size, "Mini-batch size")->group(model)->capture_default_str();
    app.add_option("--lr", o.lr, "SGD learning rate")->group(model)->capture_default_str();
    app.add_option("--momentum", o.momentum, "SGD momentum (0 = plain SGD)")->group(model)->capture_default_str();

    const char* atk = "Attack";
    app.add_option("--attack", o.attack, "dtw-ar, cw-sdtw, fgs or pgd")->group(atk)->capture_default_str();
    app.add_option("--rho", o.rho, "Confidence margin (negative)")->group(atk)->capture_default_str();
    app.add_option("--alpha1", o.alpha1, "Weight of dist_P along the random path")->group(atk)->capture_default_str();
    app.add_option("--alpha2", o.alpha2, "Weight of the subtracted diagonal distance")->group(atk)->capture_default_str();
    app.add_option("--eta", o.eta, "Step size")->group(atk)->capture_default_str();
    app.add_option("--eta-label", o.eta_label, "Step size for the label gradient (0 = --eta)")->group(atk)->capture_default_str();
    app.add_option("--eta-dtw", o.eta_dtw, "Step size for the DTW gradient (0 = --eta)")->group(atk)->capture_default_str();
    app.add_option("--max-iters", o.max_iters, "Iteration cap")->group(atk)->capture_default_str();
    app.add_option("--delta", o.delta,
                   "DTW acceptance bound, or 'auto' for the 10% quantile of inter-class DTW on the training split")
        ->group(atk)
        ->capture_default_str();
    app.add_option("--band", o.band, "Admissible band radius r: random paths keep |i-j| <= ceil(r*T)")->group(atk)->capture_default_str();
    app.add_option("--metric", o.metric, "Frame cost for DTW-AR: sql2, l1 or lp:<p>")->group(atk)->capture_default_str();
    app.add_option("--gamma", o.gamma, "Soft-DTW smoothing for cw-sdtw")->group(atk)->capture_default_str();
    app.add_option("--soft-metric", o.soft_metric, "Frame cost inside soft-DTW for cw-sdtw")->group(atk)->capture_default_str();
    app.add_option("--snapshot-every", o.snapshot_every, "Keep the iterate every S iterations for PathSim traces (0 = off)")
        ->group(atk)
        ->capture_default_str();
    app.add_option("--eps", o.eps, "l-infinity radius for fgs and pgd")->group(atk)->capture_default_str();
    app.add_option("--pgd-steps", o.pgd_steps, "PGD iterations")->group(atk)->capture_default_str();
    app.add_option("--pgd-step-size", o.pgd_step_size, "PGD step size")->group(atk)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"dtwar: DTW-based adversarial attacks on time-series classifiers"};
    app.config_formatter(std::make_shared<dtwar::cli::JsonConfig>());
    app.set_config("--config", "", "JSON config; keys are long option names, nested objects hold subcommand options. Flags override it.");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    add_options(app, o);

    auto* train_cmd = app.add_subcommand("train", "Train a classifier; writes model.ckpt, train_metrics.csv, train_summary.csv");

    auto* attack_cmd = app.add_subcommand("attack", "Attack the test split; writes results.csv, adversarial.csv, summary.csv");
    attack_cmd->add_option("--targets", o.targets,
                           "all (every other class), per-class (next class, one job per example) or a list like 0,2")
        ->capture_default_str();
    attack_cmd->add_flag("--trace", o.trace, "Write per-iteration losses to trace.csv");

    auto* eval_cmd = app.add_subcommand("eval", "Clean and robust accuracy under fgs, pgd and dtw-ar; writes report.csv");
    eval_cmd->add_option("--transfer", o.transfer, "Second checkpoint: report alpha_eff of dtw-ar examples transferred to it");
    eval_cmd->add_flag("--skip-dtw-ar", o.skip_dtw_ar, "Only run the gradient-sign attacks");

    auto* adv_cmd = app.add_subcommand("advtrain",
                                       "Adversarial training with DTW-AR; writes model_adv.ckpt, report.csv, heldout.csv, augment.csv");
    adv_cmd->add_option("--rounds", o.rounds, "Augmentation rounds (0 = plain training)")->capture_default_str();
    adv_cmd->add_option("--augment-fraction", o.augment_fraction, "Share of training inputs attacked per round")->capture_default_str();
    adv_cmd->add_option("--alpha1-range", o.alpha1_range, "Sampling range for alpha1")->expected(2)->capture_default_str();
    adv_cmd->add_option("--alpha2-range", o.alpha2_range, "Sampling range for alpha2")->expected(2)->capture_default_str();
    adv_cmd->add_option("--adv-max-iters", o.adv_max_iters, "Iteration cap for generated training examples")->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "Per-call time of exact DTW, soft-DTW and dist_P; writes bench.csv");
    bench_cmd->add_option("--lengths", o.lengths, "Series lengths T")->capture_default_str();
    bench_cmd->add_option("--bench-channels", o.bench_channels, "Channels of the random inputs")->capture_default_str();
    bench_cmd->add_option("--reps", o.reps, "Timed windows per (method, T), at least 10")->capture_default_str();
    bench_cmd->add_option("--min-window", o.min_window, "Seconds each timed window must last")->capture_default_str();

    auto* mds_cmd = app.add_subcommand("mds", "Classical MDS of the dataset; writes mds_<measure>.csv and silhouette.csv");
    mds_cmd->add_option("--measure", o.measures, "Measures to embed: dtw, l2, dist_p")->capture_default_str();
    mds_cmd->add_option("--mds-metric", o.mds_metric, "Frame cost for the distance matrices")->capture_default_str();
    mds_cmd->add_option("--dims", o.dims, "Embedding dimensions")->capture_default_str();

    auto* paths_cmd = app.add_subcommand("paths", "Sample admissible paths or compare two paths with PathSim");
    paths_cmd->add_option("--grid", o.grid, "Grid size T for --sample")->capture_default_str();
    paths_cmd->add_option("--sample", o.sample, "Write this many random admissible paths to paths.txt");
    paths_cmd->add_option("--sim", o.sim, "Two paths (text like (1,1)-(2,2) or files holding one)")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ConfigError& e) {
        // CLI11 words unknown config keys as an INI problem
        const std::string msg = e.what();
        const std::string prefix = "INI was not able to parse ";
        std::fprintf(stderr, "config error: %s\n",
                     msg.rfind(prefix, 0) == 0 ? ("unknown key '" + msg.substr(prefix.size()) + "'").c_str() : msg.c_str());
        return 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::create_directories(o.out);
        if (train_cmd->parsed()) return cmd_train(o);
        if (attack_cmd->parsed()) return cmd_attack(o);
        if (eval_cmd->parsed()) return cmd_eval(o);
        if (adv_cmd->parsed()) return cmd_advtrain(o);
        if (bench_cmd->parsed()) return cmd_bench(o);
        if (mds_cmd->parsed()) return cmd_mds(o);
        if (paths_cmd->parsed()) return cmd_paths(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
