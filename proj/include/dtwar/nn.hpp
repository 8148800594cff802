#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtwar/signal.hpp"

namespace dtwar {

enum class LayerKind {
    Conv1d,       // valid padding, stride 1, ReLU
    MaxPool1d,    // non-overlapping windows, floor(L / width) outputs
    DenseRelu,
    DenseLinear,
};

struct LayerSpec {
    LayerKind kind = LayerKind::DenseLinear;
    std::size_t units = 0;   // filters (conv) or units (dense); unused by pooling
    std::size_t window = 0;  // kernel (conv) or width (pool); unused by dense

    static LayerSpec conv(std::size_t filters, std::size_t kernel) {
        return {LayerKind::Conv1d, filters, kernel};
    }
    static LayerSpec pool(std::size_t width) { return {LayerKind::MaxPool1d, 0, width}; }
    static LayerSpec dense(std::size_t units) { return {LayerKind::DenseRelu, units, 0}; }
    static LayerSpec linear(std::size_t units) { return {LayerKind::DenseLinear, units, 0}; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Activation shape: channels x length. Dense outputs are units x 1.
struct Shape {
    std::size_t channels = 0;
    std::size_t length = 0;
    std::size_t size() const noexcept { return channels * length; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Validated layer stack mapping an (n, T) input to K pre-softmax scores.
class ArchitectureSpec {
public:
    ArchitectureSpec() = default;
    /// `layers` must end with a DenseLinear layer of `classes` units.
    ArchitectureSpec(std::size_t channels, std::size_t length, std::size_t classes,
                     std::vector<LayerSpec> layers);

    /// Names: "a0", "a1" (full-width conv nets), "a0-small", "a1-small", "mlp".
    static ArchitectureSpec preset(std::string_view name, std::size_t channels,
                                   std::size_t length, std::size_t classes);
    static std::vector<std::string> preset_names();

    /// Round-trips with to_string(): "n=1;T=32;K=2;conv:16:5;pool:2;dense:64;linear:2".
    static ArchitectureSpec parse(std::string_view text);
    std::string to_string() const;

    std::size_t channels() const noexcept { return input_.channels; }
    std::size_t length() const noexcept { return input_.length; }
    std::size_t classes() const noexcept { return classes_; }
    const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    /// shapes()[l] is the input of layer l; shapes().back() is the score shape.
    const std::vector<Shape>& shapes() const noexcept { return shapes_; }
    /// Offsets into the flat parameter vector; offsets()[l + 1] - offsets()[l]
    /// is the parameter count of layer l.
    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
    std::size_t parameter_count() const noexcept { return offsets_.back(); }
    std::size_t weight_count(std::size_t layer) const;

    friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;

private:
    Shape input_;
    std::size_t classes_ = 0;
    std::vector<LayerSpec> layers_;
    std::vector<Shape> shapes_;
    std::vector<std::size_t> offsets_{0};
};

enum class Precision { Float64, Float32 };

/// Feed-forward classifier with a flat parameter vector. Layer l stores its
/// weights (conv: [filter][channel][tap], dense: [unit][input]) followed by
/// its biases.
class Classifier {
public:
    Classifier() = default;
    /// Glorot-uniform weights, zero biases, seeded.
    Classifier(ArchitectureSpec spec, std::uint64_t seed);

    const ArchitectureSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<double>& parameters() const noexcept { return params_; }
    std::vector<double>& parameters() noexcept { return params_; }

    std::span<double> weights(std::size_t layer);
    std::span<double> biases(std::size_t layer);

    /// Pre-softmax scores.
    std::vector<double> forward(const TimeSeries& x) const;
    std::vector<float> forward_f32(const TimeSeries& x) const;
    /// argmax of the scores; the lowest index wins ties.
    int predict(const TimeSeries& x) const;

    /// d<upstream, scores>/dx. ReLU'(0) = 0; pooling routes to the first max.
    TimeSeries input_gradient(const TimeSeries& x, std::span<const double> upstream) const;
    /// Same computation carried out in single precision.
    TimeSeries input_gradient_f32(const TimeSeries& x, std::span<const double> upstream) const;

    /// Softmax cross-entropy of the scores against `label`, its gradient with
    /// respect to the parameters (accumulated into `param_grad`), and optionally
    /// with respect to the input.
    double cross_entropy_backward(const TimeSeries& x, int label, std::span<double> param_grad,
                                  TimeSeries* input_grad = nullptr) const;

    /// ReLU on/off pattern and pooling routes for `x`; equal patterns mean
    /// both inputs lie in the same linear piece of the network.
    std::vector<std::uint32_t> activation_pattern(const TimeSeries& x) const;

    void save(const std::filesystem::path& path) const;
    static Classifier load(const std::filesystem::path& path);

    friend bool operator==(const Classifier&, const Classifier&) = default;

private:
    void require_input(const TimeSeries& x) const;

    ArchitectureSpec spec_;
    std::vector<double> params_;
    std::uint64_t seed_ = 0;
};

double softmax_cross_entropy(std::span<const double> scores, int label);

/// argmax with lowest-index tie-break.
int argmax(std::span<const double> scores);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double learning_rate = 0.01;
    double momentum = 0.9;  // 0 gives plain SGD
    std::uint64_t seed = 1;

    void check() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;      // mean cross-entropy on the training split after the epoch
    double accuracy = 0.0;  // training accuracy after the epoch
};

struct TrainResult {
    Classifier model;
    std::vector<EpochStats> trace;
};

/// Mini-batch SGD on softmax cross-entropy over the examples tagged Train.
/// `model` is the starting point; it is copied, not modified.
TrainResult train(const Classifier& model, const LabeledDataset& ds, const TrainConfig& cfg);

/// Fraction of `ds` (all examples) predicted correctly.
double accuracy(const Classifier& model, const LabeledDataset& ds);

struct FiniteDiffOptions {
    Precision precision = Precision::Float64;
    double step = 0.0;            // 0 selects 1e-5 (float64) or 1e-2 (float32)
    std::size_t max_coords = 0;   // 0 checks every coordinate
    std::uint64_t seed = 0;       // upstream vector and coordinate subset
    double tolerance = 1e-4;
};

struct FiniteDiffReport {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
    bool passed = true;
};

/// Compares input_gradient with central differences of <upstream, scores>.
/// Coordinates whose +-step perturbation changes the activation pattern are
/// skipped as kinks.
FiniteDiffReport finite_diff_check(const Classifier& model, const TimeSeries& x,
                                   const FiniteDiffOptions& opts = {});

}  // namespace dtwar
