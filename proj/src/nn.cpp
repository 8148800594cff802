#include "dtwar/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "dtwar/error.hpp"

namespace dtwar {

// ---------------------------------------------------------------------------
// ArchitectureSpec

ArchitectureSpec::ArchitectureSpec(std::size_t channels, std::size_t length, std::size_t classes,
                                   std::vector<LayerSpec> layers)
    : input_{channels, length}, classes_(classes), layers_(std::move(layers)) {
    if (channels == 0 || length == 0) throw ShapeError("architecture: input shape must be positive");
    if (classes < 2) throw ConfigError("architecture: need at least 2 classes");
    if (layers_.empty() || layers_.back().kind != LayerKind::DenseLinear ||
        layers_.back().units != classes) {
        throw ConfigError("architecture: final layer must be linear with K = " +
                          std::to_string(classes) + " units");
    }
    shapes_.push_back(input_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        const Shape in = shapes_.back();
        Shape out;
        std::size_t count = 0;
        const std::string where = "architecture layer " + std::to_string(l) + ": ";
        switch (layer.kind) {
            case LayerKind::Conv1d:
                if (layer.units == 0 || layer.window == 0) {
                    throw ConfigError(where + "conv needs filters and kernel > 0");
                }
                if (layer.window > in.length) {
                    throw ShapeError(where + "kernel " + std::to_string(layer.window) +
                                     " longer than input length " + std::to_string(in.length));
                }
                out = {layer.units, in.length - layer.window + 1};
                count = layer.units * in.channels * layer.window + layer.units;
                break;
            case LayerKind::MaxPool1d:
                if (layer.window == 0) throw ConfigError(where + "pool width must be > 0");
                if (layer.window > in.length) {
                    throw ShapeError(where + "pool width " + std::to_string(layer.window) +
                                     " longer than input length " + std::to_string(in.length));
                }
                out = {in.channels, in.length / layer.window};
                break;
            case LayerKind::DenseRelu:
            case LayerKind::DenseLinear:
                if (layer.units == 0) throw ConfigError(where + "dense needs units > 0");
                out = {layer.units, 1};
                count = layer.units * in.size() + layer.units;
                break;
        }
        shapes_.push_back(out);
        offsets_.push_back(offsets_.back() + count);
    }
}

ArchitectureSpec ArchitectureSpec::preset(std::string_view name, std::size_t channels,
                                          std::size_t length, std::size_t classes) {
    std::vector<LayerSpec> layers;
    if (name == "a0") {
        layers = {LayerSpec::conv(66, 12), LayerSpec::pool(12), LayerSpec::dense(1024)};
    } else if (name == "a1") {
        layers = {LayerSpec::conv(100, 5), LayerSpec::conv(50, 5), LayerSpec::pool(4),
                  LayerSpec::dense(200), LayerSpec::dense(100)};
    } else if (name == "a0-small") {
        layers = {LayerSpec::conv(16, 5), LayerSpec::pool(2), LayerSpec::dense(64)};
    } else if (name == "a1-small") {
        layers = {LayerSpec::conv(16, 5), LayerSpec::conv(8, 5), LayerSpec::pool(2),
                  LayerSpec::dense(32), LayerSpec::dense(16)};
    } else if (name == "mlp") {
        layers = {LayerSpec::dense(64)};
    } else {
        throw ConfigError("unknown architecture preset '" + std::string(name) + "'");
    }
    layers.push_back(LayerSpec::linear(classes));
    return ArchitectureSpec(channels, length, classes, std::move(layers));
}

std::vector<std::string> ArchitectureSpec::preset_names() {
    return {"a0", "a1", "a0-small", "a1-small", "mlp"};
}

std::size_t ArchitectureSpec::weight_count(std::size_t layer) const {
    const auto& l = layers_.at(layer);
    const Shape in = shapes_[layer];
    switch (l.kind) {
        case LayerKind::Conv1d: return l.units * in.channels * l.window;
        case LayerKind::DenseRelu:
        case LayerKind::DenseLinear: return l.units * in.size();
        case LayerKind::MaxPool1d: break;
    }
    return 0;
}

std::string ArchitectureSpec::to_string() const {
    std::ostringstream os;
    os << "n=" << input_.channels << ";T=" << input_.length << ";K=" << classes_;
    for (const auto& l : layers_) {
        switch (l.kind) {
            case LayerKind::Conv1d: os << ";conv:" << l.units << ':' << l.window; break;
            case LayerKind::MaxPool1d: os << ";pool:" << l.window; break;
            case LayerKind::DenseRelu: os << ";dense:" << l.units; break;
            case LayerKind::DenseLinear: os << ";linear:" << l.units; break;
        }
    }
    return os.str();
}

ArchitectureSpec ArchitectureSpec::parse(std::string_view text) {
    std::vector<std::string> tokens;
    {
        std::string cur;
        for (char ch : text) {
            if (ch == ';') {
                tokens.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        tokens.push_back(cur);
    }
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            throw ParseError("architecture text: bad number '" + s + "'");
        }
        if (pos != s.size()) throw ParseError("architecture text: bad number '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    if (tokens.size() < 4) throw ParseError("architecture text too short");
    auto header = [&](const std::string& tok, const char* key) {
        const std::string prefix = std::string(key) + "=";
        if (tok.rfind(prefix, 0) != 0) throw ParseError("architecture text: expected " + prefix);
        return number(tok.substr(prefix.size()));
    };
    const auto n = header(tokens[0], "n");
    const auto T = header(tokens[1], "T");
    const auto K = header(tokens[2], "K");
    std::vector<LayerSpec> layers;
    for (std::size_t k = 3; k < tokens.size(); ++k) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : tokens[k]) {
            if (ch == ':') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        parts.push_back(cur);
        const auto& kind = parts[0];
        if (kind == "conv" && parts.size() == 3) {
            layers.push_back(LayerSpec::conv(number(parts[1]), number(parts[2])));
        } else if (kind == "pool" && parts.size() == 2) {
            layers.push_back(LayerSpec::pool(number(parts[1])));
        } else if (kind == "dense" && parts.size() == 2) {
            layers.push_back(LayerSpec::dense(number(parts[1])));
        } else if (kind == "linear" && parts.size() == 2) {
            layers.push_back(LayerSpec::linear(number(parts[1])));
        } else {
            throw ParseError("architecture text: bad layer '" + tokens[k] + "'");
        }
    }
    return ArchitectureSpec(n, T, K, std::move(layers));
}

// ---------------------------------------------------------------------------
// Forward / backward kernels, shared by the float64 and float32 paths.

namespace {

template <class Real>
struct Tape {
    std::vector<std::vector<Real>> acts;                // acts[l] = input of layer l
    std::vector<std::vector<std::uint32_t>> pool_from;  // argmax per pooled output
};

template <class Real>
void run_forward(const ArchitectureSpec& spec, std::span<const Real> params,
                 std::span<const Real> input, Tape<Real>& tape) {
    const auto& layers = spec.layers();
    const auto& shapes = spec.shapes();
    tape.acts.resize(layers.size() + 1);
    tape.pool_from.resize(layers.size());
    tape.acts[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const Shape in = shapes[l];
        const Shape out = shapes[l + 1];
        const auto& x = tape.acts[l];
        auto& y = tape.acts[l + 1];
        y.assign(out.size(), Real(0));
        const Real* w = params.data() + spec.offsets()[l];
        switch (layer.kind) {
            case LayerKind::Conv1d: {
                const std::size_t K = layer.window;
                const Real* b = w + spec.weight_count(l);
                for (std::size_t f = 0; f < out.channels; ++f) {
                    Real* yf = y.data() + f * out.length;
                    for (std::size_t t = 0; t < out.length; ++t) yf[t] = b[f];
                    for (std::size_t c = 0; c < in.channels; ++c) {
                        const Real* wfc = w + (f * in.channels + c) * K;
                        const Real* xc = x.data() + c * in.length;
                        for (std::size_t t = 0; t < out.length; ++t) {
                            Real acc = 0;
                            for (std::size_t k = 0; k < K; ++k) acc += wfc[k] * xc[t + k];
                            yf[t] += acc;
                        }
                    }
                    for (std::size_t t = 0; t < out.length; ++t) yf[t] = std::max(yf[t], Real(0));
                }
                break;
            }
            case LayerKind::MaxPool1d: {
                auto& from = tape.pool_from[l];
                from.assign(out.size(), 0);
                const std::size_t W = layer.window;
                for (std::size_t c = 0; c < out.channels; ++c) {
                    for (std::size_t t = 0; t < out.length; ++t) {
                        std::size_t best = c * in.length + t * W;
                        for (std::size_t k = 1; k < W; ++k) {
                            const std::size_t idx = c * in.length + t * W + k;
                            if (x[idx] > x[best]) best = idx;
                        }
                        y[c * out.length + t] = x[best];
                        from[c * out.length + t] = static_cast<std::uint32_t>(best);
                    }
                }
                break;
            }
            case LayerKind::DenseRelu:
            case LayerKind::DenseLinear: {
                const std::size_t I = in.size();
                const Real* b = w + layer.units * I;
                for (std::size_t u = 0; u < layer.units; ++u) {
                    const Real* wu = w + u * I;
                    Real acc = b[u];
                    for (std::size_t i = 0; i < I; ++i) acc += wu[i] * x[i];
                    y[u] = layer.kind == LayerKind::DenseRelu ? std::max(acc, Real(0)) : acc;
                }
                break;
            }
        }
    }
}

// Back-propagates `upstream` (d/d scores). Parameter gradients are accumulated
// into param_grad when non-empty; the input gradient is returned.
template <class Real>
std::vector<Real> run_backward(const ArchitectureSpec& spec, std::span<const Real> params,
                               const Tape<Real>& tape, std::vector<Real> grad,
                               std::span<Real> param_grad) {
    const auto& layers = spec.layers();
    const auto& shapes = spec.shapes();
    const bool want_params = !param_grad.empty();
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const Shape in = shapes[l];
        const Shape out = shapes[l + 1];
        const auto& x = tape.acts[l];
        const auto& y = tape.acts[l + 1];
        std::vector<Real> gin(in.size(), Real(0));
        const Real* w = params.data() + spec.offsets()[l];
        Real* gw = want_params ? param_grad.data() + spec.offsets()[l] : nullptr;
        switch (layer.kind) {
            case LayerKind::Conv1d: {
                const std::size_t K = layer.window;
                Real* gb = want_params ? gw + spec.weight_count(l) : nullptr;
                for (std::size_t f = 0; f < out.channels; ++f) {
                    for (std::size_t t = 0; t < out.length; ++t) {
                        const std::size_t o = f * out.length + t;
                        if (!(y[o] > Real(0))) continue;  // ReLU'(z) = 0 for z <= 0
                        const Real g = grad[o];
                        if (g == Real(0)) continue;
                        if (gb) gb[f] += g;
                        for (std::size_t c = 0; c < in.channels; ++c) {
                            const Real* wfc = w + (f * in.channels + c) * K;
                            const std::size_t base = c * in.length + t;
                            for (std::size_t k = 0; k < K; ++k) gin[base + k] += wfc[k] * g;
                            if (gw) {
                                Real* gwfc = gw + (f * in.channels + c) * K;
                                for (std::size_t k = 0; k < K; ++k) gwfc[k] += x[base + k] * g;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::MaxPool1d: {
                const auto& from = tape.pool_from[l];
                for (std::size_t o = 0; o < out.size(); ++o) gin[from[o]] += grad[o];
                break;
            }
            case LayerKind::DenseRelu:
            case LayerKind::DenseLinear: {
                const std::size_t I = in.size();
                Real* gb = want_params ? gw + layer.units * I : nullptr;
                for (std::size_t u = 0; u < layer.units; ++u) {
                    if (layer.kind == LayerKind::DenseRelu && !(y[u] > Real(0))) continue;
                    const Real g = grad[u];
                    if (g == Real(0)) continue;
                    const Real* wu = w + u * I;
                    for (std::size_t i = 0; i < I; ++i) gin[i] += wu[i] * g;
                    if (gw) {
                        Real* gwu = gw + u * I;
                        for (std::size_t i = 0; i < I; ++i) gwu[i] += x[i] * g;
                        gb[u] += g;
                    }
                }
                break;
            }
        }
        grad = std::move(gin);
    }
    return grad;
}

template <class Real>
std::vector<Real> cast_vector(std::span<const double> v) {
    return std::vector<Real>(v.begin(), v.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Classifier

Classifier::Classifier(ArchitectureSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), params_(spec_.parameter_count(), 0.0), seed_(seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < spec_.layers().size(); ++l) {
        const auto& layer = spec_.layers()[l];
        if (layer.kind == LayerKind::MaxPool1d) continue;
        const Shape in = spec_.shapes()[l];
        double fan_in = 0;
        double fan_out = 0;
        if (layer.kind == LayerKind::Conv1d) {
            fan_in = static_cast<double>(in.channels * layer.window);
            fan_out = static_cast<double>(layer.units * layer.window);
        } else {
            fan_in = static_cast<double>(in.size());
            fan_out = static_cast<double>(layer.units);
        }
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-s, s);
        for (double& v : weights(l)) v = dist(rng);
    }
}

std::span<double> Classifier::weights(std::size_t layer) {
    return {params_.data() + spec_.offsets().at(layer), spec_.weight_count(layer)};
}

std::span<double> Classifier::biases(std::size_t layer) {
    const auto begin = spec_.offsets().at(layer) + spec_.weight_count(layer);
    return {params_.data() + begin, spec_.offsets().at(layer + 1) - begin};
}

void Classifier::require_input(const TimeSeries& x) const {
    if (x.channels() != spec_.channels() || x.length() != spec_.length()) {
        throw ShapeError("classifier expects " + std::to_string(spec_.channels()) + "x" +
                         std::to_string(spec_.length()) + " input, got " +
                         std::to_string(x.channels()) + "x" + std::to_string(x.length()));
    }
}

std::vector<double> Classifier::forward(const TimeSeries& x) const {
    require_input(x);
    Tape<double> tape;
    run_forward<double>(spec_, params_, x.values(), tape);
    return std::move(tape.acts.back());
}

std::vector<float> Classifier::forward_f32(const TimeSeries& x) const {
    require_input(x);
    const auto p = cast_vector<float>(params_);
    const auto in = cast_vector<float>(x.values());
    Tape<float> tape;
    run_forward<float>(spec_, p, in, tape);
    return std::move(tape.acts.back());
}

int Classifier::predict(const TimeSeries& x) const { return argmax(forward(x)); }

TimeSeries Classifier::input_gradient(const TimeSeries& x, std::span<const double> upstream) const {
    require_input(x);
    if (upstream.size() != spec_.classes()) throw ShapeError("input_gradient: upstream size != K");
    Tape<double> tape;
    run_forward<double>(spec_, params_, x.values(), tape);
    auto g = run_backward<double>(spec_, params_, tape,
                                  std::vector<double>(upstream.begin(), upstream.end()), {});
    return TimeSeries(x.channels(), x.length(), std::move(g));
}

TimeSeries Classifier::input_gradient_f32(const TimeSeries& x,
                                          std::span<const double> upstream) const {
    require_input(x);
    if (upstream.size() != spec_.classes()) throw ShapeError("input_gradient: upstream size != K");
    const auto p = cast_vector<float>(params_);
    const auto in = cast_vector<float>(x.values());
    Tape<float> tape;
    run_forward<float>(spec_, p, in, tape);
    auto g = run_backward<float>(spec_, p, tape, cast_vector<float>(upstream), {});
    return TimeSeries(x.channels(), x.length(), std::vector<double>(g.begin(), g.end()));
}

double Classifier::cross_entropy_backward(const TimeSeries& x, int label,
                                          std::span<double> param_grad,
                                          TimeSeries* input_grad) const {
    require_input(x);
    if (label < 0 || static_cast<std::size_t>(label) >= spec_.classes()) {
        throw Error("cross entropy: label out of range");
    }
    Tape<double> tape;
    run_forward<double>(spec_, params_, x.values(), tape);
    const auto& s = tape.acts.back();
    const double loss = softmax_cross_entropy(s, label);
    // d CE / d s = softmax(s) - onehot(label)
    const double top = *std::max_element(s.begin(), s.end());
    std::vector<double> g(s.size());
    double z = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) z += g[k] = std::exp(s[k] - top);
    for (double& v : g) v /= z;
    g[static_cast<std::size_t>(label)] -= 1.0;
    auto gin = run_backward<double>(spec_, params_, tape, std::move(g), param_grad);
    if (input_grad) *input_grad = TimeSeries(x.channels(), x.length(), std::move(gin));
    return loss;
}

std::vector<std::uint32_t> Classifier::activation_pattern(const TimeSeries& x) const {
    require_input(x);
    Tape<double> tape;
    run_forward<double>(spec_, params_, x.values(), tape);
    std::vector<std::uint32_t> pattern;
    for (std::size_t l = 0; l < spec_.layers().size(); ++l) {
        switch (spec_.layers()[l].kind) {
            case LayerKind::Conv1d:
            case LayerKind::DenseRelu:
                for (double v : tape.acts[l + 1]) pattern.push_back(v > 0.0 ? 1u : 0u);
                break;
            case LayerKind::MaxPool1d:
                pattern.insert(pattern.end(), tape.pool_from[l].begin(), tape.pool_from[l].end());
                break;
            case LayerKind::DenseLinear: break;
        }
    }
    return pattern;
}

// ---------------------------------------------------------------------------
// Checkpoint: "DTWARCKP" | u32 version | u32 spec length | spec text |
//             u64 seed | u64 parameter count | float64[count], little-endian.

namespace {

constexpr char kMagic[8] = {'D', 'T', 'W', 'A', 'R', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) os.put(static_cast<char>((v >> (8 * k)) & 0xffu));
}
void put_u64(std::ostream& os, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) os.put(static_cast<char>((v >> (8 * k)) & 0xffu));
}
std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) {
        const int ch = is.get();
        if (ch == std::char_traits<char>::eof()) throw ParseError("checkpoint truncated");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * k);
    }
    return v;
}

}  // namespace

void Classifier::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path.string());
    const auto text = spec_.to_string();
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    put_u64(out, seed_);
    put_u64(out, params_.size());
    for (double v : params_) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw Error("failed writing checkpoint: " + path.string());
}

Classifier Classifier::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ParseError("not a checkpoint file: " + path.string());
    }
    const auto version = get_le(in, 4);
    if (version != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto len = get_le(in, 4);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw ParseError("checkpoint truncated");
    Classifier model;
    model.spec_ = ArchitectureSpec::parse(text);
    model.seed_ = get_le(in, 8);
    const auto count = get_le(in, 8);
    if (count != model.spec_.parameter_count()) {
        throw ParseError("checkpoint parameter count " + std::to_string(count) +
                         " does not match architecture (" +
                         std::to_string(model.spec_.parameter_count()) + ")");
    }
    model.params_.resize(count);
    for (auto& v : model.params_) v = std::bit_cast<double>(get_le(in, 8));
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint has trailing bytes");
    return model;
}

// ---------------------------------------------------------------------------

double softmax_cross_entropy(std::span<const double> scores, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= scores.size()) {
        throw Error("softmax_cross_entropy: label out of range");
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - top);
    return std::log(z) + top - scores[static_cast<std::size_t>(label)];
}

int argmax(std::span<const double> scores) {
    if (scores.empty()) throw Error("argmax of empty score vector");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;
    }
    return static_cast<int>(best);
}

void TrainConfig::check() const {
    if (epochs == 0 || batch_size == 0) throw ConfigError("train: epochs and batch size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
}

TrainResult train(const Classifier& model, const LabeledDataset& ds, const TrainConfig& cfg) {
    cfg.check();
    auto order = ds.indices(Split::Train);
    if (order.empty()) throw Error("train: the training split is empty");
    for (auto k : order) {
        if (static_cast<std::size_t>(ds.label(k)) >= model.spec().classes()) {
            throw Error("train: label " + std::to_string(ds.label(k)) + " exceeds model classes");
        }
    }

    TrainResult result{model, {}};
    Classifier& net = result.model;
    const std::size_t P = net.parameters().size();
    std::vector<double> grad(P), velocity(P, 0.0);
    std::mt19937_64 rng(cfg.seed);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                net.cross_entropy_backward(ds.example(order[b]), ds.label(order[b]), grad);
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            auto& theta = net.parameters();
            for (std::size_t k = 0; k < P; ++k) {
                velocity[k] = cfg.momentum * velocity[k] + grad[k] * scale;
                theta[k] -= cfg.learning_rate * velocity[k];
            }
        }
        double loss = 0.0;
        std::size_t correct = 0;
        for (auto k : order) {
            const auto s = net.forward(ds.example(k));
            loss += softmax_cross_entropy(s, ds.label(k));
            correct += argmax(s) == ds.label(k);
        }
        const double m = static_cast<double>(order.size());
        result.trace.push_back({epoch, loss / m, static_cast<double>(correct) / m});
    }
    return result;
}

double accuracy(const Classifier& model, const LabeledDataset& ds) {
    if (ds.empty()) throw Error("accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t k = 0; k < ds.size(); ++k) correct += model.predict(ds.example(k)) == ds.label(k);
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------

FiniteDiffReport finite_diff_check(const Classifier& model, const TimeSeries& x,
                                   const FiniteDiffOptions& opts) {
    const bool f32 = opts.precision == Precision::Float32;
    const double h = opts.step > 0 ? opts.step : (f32 ? 1e-2 : 1e-5);
    const std::size_t K = model.spec().classes();

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> upstream(K);
    for (double& u : upstream) u = unit(rng);

    auto objective = [&](const TimeSeries& z) {
        double acc = 0.0;
        if (f32) {
            const auto s = model.forward_f32(z);
            for (std::size_t k = 0; k < K; ++k) acc += upstream[k] * static_cast<double>(s[k]);
        } else {
            const auto s = model.forward(z);
            for (std::size_t k = 0; k < K; ++k) acc += upstream[k] * s[k];
        }
        return acc;
    };
    const TimeSeries analytic =
        f32 ? model.input_gradient_f32(x, upstream) : model.input_gradient(x, upstream);

    std::vector<std::size_t> coords(x.size());
    for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = k;
    if (opts.max_coords > 0 && opts.max_coords < coords.size()) {
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(opts.max_coords);
    }

    const auto base_pattern = model.activation_pattern(x);
    FiniteDiffReport report;
    for (auto k : coords) {
        TimeSeries plus = x;
        TimeSeries minus = x;
        plus.values()[k] += h;
        minus.values()[k] -= h;
        if (model.activation_pattern(plus) != base_pattern ||
            model.activation_pattern(minus) != base_pattern) {
            ++report.skipped_kinks;
            continue;
        }
        const double numeric = (objective(plus) - objective(minus)) / (2.0 * h);
        const double exact = analytic.values()[k];
        // absolute floor keeps roundoff on near-zero entries from dominating
        const double scale = std::max({std::abs(numeric), std::abs(exact), f32 ? 1e-3 : 1e-6});
        const double err = std::abs(numeric - exact) / scale;
        report.max_relative_error = std::max(report.max_relative_error, err);
        ++report.checked;
    }
    report.passed = report.max_relative_error < opts.tolerance;
    return report;
}

}  // namespace dtwar
