#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dtwar/analysis.hpp"
#include "dtwar/error.hpp"
#include "dtwar/robustness.hpp"

namespace py = pybind11;
using namespace dtwar;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (T,) arrays are univariate; (n, T) arrays are channel-major.
TimeSeries to_series(const Array& a) {
    if (a.ndim() == 1) return TimeSeries(1, a.shape(0), std::vector<double>(a.data(), a.data() + a.size()));
    if (a.ndim() == 2) {
        return TimeSeries(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
    }
    throw py::value_error("expected a 1-D (T,) or 2-D (n, T) array");
}

Array to_array(const TimeSeries& x) {
    Array out({x.channels(), x.length()});
    std::copy(x.values().begin(), x.values().end(), out.mutable_data());
    return out;
}

PointMetric metric_arg(const std::string& m) { return parse_metric(m); }

std::vector<std::pair<int, int>> cells(const AlignmentPath& p) {
    std::vector<std::pair<int, int>> out;
    for (const auto& c : p) out.emplace_back(c.i, c.j);
    return out;
}

AlignmentPath from_cells(const std::vector<std::pair<int, int>>& v) {
    std::vector<Cell> c;
    for (auto [i, j] : v) c.push_back({i, j});
    const int grid = c.empty() ? 0 : c.back().i;
    return AlignmentPath::checked(std::move(c), grid);
}

LabeledDataset to_dataset(const std::vector<Array>& xs, const std::vector<int>& labels) {
    if (xs.size() != labels.size()) throw py::value_error("xs and labels differ in length");
    LabeledDataset ds;
    for (std::size_t k = 0; k < xs.size(); ++k) ds.push_back(to_series(xs[k]), labels[k], Split::Train);
    return ds;
}

py::dict result_dict(const AdversarialResult& r) {
    py::dict d;
    d["x_adv"] = to_array(r.x_adv);
    d["method"] = to_string(r.method);
    d["y_target"] = r.y_target;
    d["y_source"] = r.y_source;
    d["fooled"] = r.fooled;
    d["final_dtw"] = r.final_dtw;
    d["final_l2sq"] = r.final_l2sq;
    d["final_diag"] = r.final_diag;
    d["within_delta"] = r.within_delta;
    d["chosen_iteration"] = r.chosen_iteration;
    d["reached_plateau"] = r.reached_plateau;
    d["path"] = r.path ? py::cast(cells(*r.path)) : py::none();
    py::list trace;
    for (const auto& t : r.trace) trace.append(py::make_tuple(t.label_loss, t.dtw_loss, t.dist_p, t.dist_diag));
    d["trace"] = trace;
    return d;
}

}  // namespace

PYBIND11_MODULE(_dtwar, m) {
    m.doc() = "DTW-AR attacks, DTW utilities and classifiers";

    // later registrations are tried first, so the base class goes first
    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    m.def("dtw", [](const Array& x, const Array& z, const std::string& metric) {
        const auto r = dtw(to_series(x), to_series(z), metric_arg(metric));
        return py::make_tuple(r.value, cells(r.path));
    }, py::arg("x"), py::arg("z"), py::arg("metric") = "sql2", "DTW value and optimal path (1-based cells).");
    m.def("dtw_value", [](const Array& x, const Array& z, const std::string& metric) {
        return dtw_value(to_series(x), to_series(z), metric_arg(metric));
    }, py::arg("x"), py::arg("z"), py::arg("metric") = "sql2");
    m.def("dist_p", [](const Array& x, const Array& z, const std::vector<std::pair<int, int>>& path,
                       const std::string& metric) {
        return dist_p(to_series(x), to_series(z), from_cells(path), metric_arg(metric));
    }, py::arg("x"), py::arg("z"), py::arg("path"), py::arg("metric") = "sql2");
    m.def("soft_dtw", [](const Array& x, const Array& z, double gamma, const std::string& metric) {
        const auto r = soft_dtw(to_series(x), to_series(z), gamma, metric_arg(metric));
        return py::make_tuple(r.value, to_array(r.gradient));
    }, py::arg("x"), py::arg("z"), py::arg("gamma") = 1.0, py::arg("metric") = "sql2",
       "Soft-DTW value and its gradient with respect to z.");

    m.def("random_path", [](int grid, double radius, std::uint64_t seed) {
        return cells(random_admissible_path(grid, AdmissibleBand{radius}, seed));
    }, py::arg("grid"), py::arg("radius") = 0.5, py::arg("seed") = 0);
    m.def("path_sim", [](const std::vector<std::pair<int, int>>& a, const std::vector<std::pair<int, int>>& b) {
        return path_sim(from_cells(a), from_cells(b));
    });
    m.def("diagonal_path", [](int grid) { return cells(diagonal_path(grid)); });

    m.def("synth_two_class", [](std::size_t count, std::size_t channels, std::size_t length, std::uint64_t seed) {
        const auto ds = synth_two_class(count, channels, length, seed);
        std::vector<Array> xs;
        for (const auto& x : ds.examples()) xs.push_back(to_array(x));
        return py::make_tuple(xs, ds.labels());
    }, py::arg("count"), py::arg("channels") = 1, py::arg("length") = 32, py::arg("seed") = 1);

    py::class_<Classifier>(m, "Classifier")
        .def(py::init([](const std::string& arch, std::size_t channels, std::size_t length, std::size_t classes,
                         std::uint64_t seed) {
                 const auto spec = arch.find(';') != std::string::npos
                                       ? ArchitectureSpec::parse(arch)
                                       : ArchitectureSpec::preset(arch, channels, length, classes);
                 return Classifier(spec, seed);
             }),
             py::arg("arch"), py::arg("channels") = 1, py::arg("length") = 32, py::arg("classes") = 2,
             py::arg("seed") = 1)
        .def_static("load", &Classifier::load)
        .def("save", &Classifier::save)
        .def_property_readonly("spec", [](const Classifier& c) { return c.spec().to_string(); })
        .def("forward", [](const Classifier& c, const Array& x) { return c.forward(to_series(x)); })
        .def("predict", [](const Classifier& c, const Array& x) { return c.predict(to_series(x)); })
        .def("fit", [](Classifier& c, const std::vector<Array>& xs, const std::vector<int>& labels,
                       std::size_t epochs, std::size_t batch_size, double lr, double momentum, std::uint64_t seed) {
                 TrainConfig cfg;
                 cfg.epochs = epochs;
                 cfg.batch_size = batch_size;
                 cfg.learning_rate = lr;
                 cfg.momentum = momentum;
                 cfg.seed = seed;
                 auto r = train(c, to_dataset(xs, labels), cfg);
                 c = std::move(r.model);
                 py::list losses;
                 for (const auto& e : r.trace) losses.append(e.loss);
                 return losses;
             },
             py::arg("xs"), py::arg("labels"), py::arg("epochs") = 50, py::arg("batch_size") = 16,
             py::arg("lr") = 0.01, py::arg("momentum") = 0.9, py::arg("seed") = 1,
             "Trains in place; returns per-epoch training loss.");

    m.def("attack", [](const Classifier& model, const Array& x, int y_target, const std::string& method,
                       double rho, double alpha1, double alpha2, double eta, std::size_t max_iters, double delta,
                       double band, const std::string& metric, std::uint64_t path_seed, double eps) {
        AttackConfig cfg;
        cfg.rho = rho;
        cfg.alpha1 = alpha1;
        cfg.alpha2 = alpha2;
        cfg.eta = eta;
        cfg.max_iters = max_iters;
        cfg.delta = delta;
        cfg.band.radius = band;
        cfg.metric = metric_arg(metric);
        cfg.path_seed = path_seed;
        cfg.snapshot_every = 0;
        GradientSignParams sign;
        sign.eps = eps;
        const auto xs = to_series(x);
        const int y = model.predict(xs);
        const std::vector<AttackJob> jobs{{xs, y, y_target}};
        py::gil_scoped_release release;
        auto r = batch_attack(model, jobs, parse_attack_method(method), cfg, sign, 1).front();
        py::gil_scoped_acquire acquire;
        return result_dict(r);
    }, py::arg("model"), py::arg("x"), py::arg("y_target"), py::arg("method") = "dtw-ar", py::arg("rho") = -5.0,
       py::arg("alpha1") = 0.5, py::arg("alpha2") = 0.5, py::arg("eta") = 0.01, py::arg("max_iters") = 5000,
       py::arg("delta") = 1.0, py::arg("band") = 0.5, py::arg("metric") = "lp:2", py::arg("path_seed") = 0,
       py::arg("eps") = 0.1);

    m.def("calibrate_delta", [](const std::vector<Array>& xs, const std::vector<int>& labels,
                                const std::string& metric, double quantile) {
        return calibrate_delta(to_dataset(xs, labels), metric_arg(metric), quantile);
    }, py::arg("xs"), py::arg("labels"), py::arg("metric") = "lp:2", py::arg("quantile") = 0.1);

    m.def("mds", [](const std::vector<Array>& xs, const std::vector<int>& labels, const std::string& measure,
                    const std::string& metric, std::size_t dims) {
        const auto ds = to_dataset(xs, labels);
        const auto e = mds_embed(distance_matrix(ds, parse_measure(measure), metric_arg(metric)), dims);
        Array coords({e.points, e.dims});
        std::copy(e.coords.begin(), e.coords.end(), coords.mutable_data());
        return py::make_tuple(coords, silhouette(e, ds.labels()));
    }, py::arg("xs"), py::arg("labels"), py::arg("measure") = "dtw", py::arg("metric") = "sql2", py::arg("dims") = 2,
       "Classical MDS coordinates and the silhouette of the labels in them.");
}
