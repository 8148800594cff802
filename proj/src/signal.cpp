#include "dtwar/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dtwar/error.hpp"

namespace dtwar {

TimeSeries::TimeSeries(std::size_t channels, std::size_t length)
    : TimeSeries(channels, length, std::vector<double>(channels * length, 0.0)) {}

TimeSeries::TimeSeries(std::size_t channels, std::size_t length, std::vector<double> values)
    : channels_(channels), length_(length), values_(std::move(values)) {
    if (channels_ == 0 || length_ == 0) {
        throw ShapeError("time series needs at least one channel and one sample");
    }
    if (values_.size() != channels_ * length_) {
        throw ShapeError("time series value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(channels_) + "x" +
                         std::to_string(length_));
    }
    if (!all_finite()) throw Error("time series contains non-finite values");
}

TimeSeries TimeSeries::univariate(std::vector<double> values) {
    const auto n = values.size();
    return TimeSeries(1, n, std::move(values));
}

bool TimeSeries::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const TimeSeries& a, const TimeSeries& b, const char* what) {
    if (!a.same_shape(b)) {
        std::ostringstream os;
        os << what << ": shape mismatch " << a.channels() << "x" << a.length() << " vs "
           << b.channels() << "x" << b.length();
        throw ShapeError(os.str());
    }
}

const char* to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
        case Split::Unassigned: break;
    }
    return "unassigned";
}

// ---------------------------------------------------------------------------

LabeledDataset::LabeledDataset(std::vector<TimeSeries> examples, std::vector<int> labels)
    : LabeledDataset(std::move(examples), std::move(labels), {}) {}

LabeledDataset::LabeledDataset(std::vector<TimeSeries> examples, std::vector<int> labels,
                               std::vector<Split> tags) {
    if (examples.size() != labels.size()) {
        throw ShapeError("dataset has " + std::to_string(examples.size()) + " examples but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (tags.empty()) tags.assign(examples.size(), Split::Unassigned);
    if (tags.size() != examples.size()) throw ShapeError("dataset tag count mismatch");
    examples_.reserve(examples.size());
    labels_.reserve(labels.size());
    tags_.reserve(tags.size());
    for (std::size_t k = 0; k < examples.size(); ++k) {
        push_back(std::move(examples[k]), labels[k], tags[k]);
    }
}

std::size_t LabeledDataset::channels() const noexcept {
    return examples_.empty() ? 0 : examples_.front().channels();
}

std::size_t LabeledDataset::length() const noexcept {
    return examples_.empty() ? 0 : examples_.front().length();
}

std::vector<std::size_t> LabeledDataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < tags_.size(); ++k) {
        if (tags_[k] == s) out.push_back(k);
    }
    return out;
}

LabeledDataset LabeledDataset::subset(Split s) const {
    const auto idx = indices(s);
    return subset(idx);
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> idx) const {
    LabeledDataset out;
    for (auto k : idx) out.push_back(examples_.at(k), labels_.at(k), tags_.at(k));
    // keep K of the parent so class-indexed reports line up
    out.num_classes_ = std::max(out.num_classes_, num_classes_);
    return out;
}

void LabeledDataset::push_back(TimeSeries x, int label, Split tag) {
    if (x.empty()) throw ShapeError("dataset example is empty");
    if (!examples_.empty() && !x.same_shape(examples_.front())) {
        require_same_shape(examples_.front(), x, "dataset example");
    }
    if (label < 0) throw Error("negative class label " + std::to_string(label));
    examples_.push_back(std::move(x));
    labels_.push_back(label);
    tags_.push_back(tag);
    num_classes_ = std::max(num_classes_, label + 1);
}

LabeledDataset LabeledDataset::normalized() const {
    LabeledDataset out = *this;
    for (auto& x : out.examples_) x = znormalize(x);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_double(std::string_view field, std::size_t row, std::size_t col) {
    field = trim(field);
    double v = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ", field " + std::to_string(col) +
                         ": not a finite number: '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, std::size_t channels,
                        std::size_t length) {
    if (channels == 0 || length == 0) throw ShapeError("load_csv: n and T must be positive");
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path.string());

    const std::size_t expected = 1 + channels * length;
    LabeledDataset ds;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(expected) + " fields, found " +
                             std::to_string(fields.size()));
        }
        const double label_value = parse_double(fields[0], row, 0);
        if (label_value < 0 || label_value != std::floor(label_value)) {
            throw ParseError("row " + std::to_string(row) + ": label must be a non-negative integer");
        }
        std::vector<double> values(channels * length);
        for (std::size_t k = 0; k < values.size(); ++k) {
            values[k] = parse_double(fields[k + 1], row, k + 1);
        }
        ds.push_back(TimeSeries(channels, length, std::move(values)),
                     static_cast<int>(label_value));
        ++row;
    }
    if (ds.empty()) throw ParseError("dataset file is empty: " + path.string());
    return ds;
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset file: " + path.string());
    out.precision(17);
    for (std::size_t k = 0; k < ds.size(); ++k) {
        out << ds.label(k);
        for (double v : ds.example(k).values()) out << ',' << v;
        out << '\n';
    }
}

LabeledDataset synth_two_class(std::size_t count, std::size_t channels, std::size_t length,
                               std::uint64_t seed) {
    if (count < 2) throw Error("synth_two_class: count must be at least 2");
    if (count % 2 != 0) throw Error("synth_two_class: count must be even");
    if (channels == 0 || length == 0) throw ShapeError("synth_two_class: n and T must be positive");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double noise_sigma = 0.1;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase_dist(0.0, two_pi);
    std::uniform_real_distribution<double> warp_dist(-0.5, 0.5);
    std::normal_distribution<double> noise(0.0, noise_sigma);

    LabeledDataset ds;
    for (std::size_t k = 0; k < count; ++k) {
        const int label = static_cast<int>(k % 2);
        TimeSeries x(channels, length);
        for (std::size_t c = 0; c < channels; ++c) {
            const double phase = phase_dist(rng);
            const double warp = warp_dist(rng);
            for (std::size_t t = 0; t < length; ++t) {
                const double u = static_cast<double>(t) / static_cast<double>(length);
                double clean = 0.0;
                if (label == 0) {
                    clean = std::sin(two_pi * 2.0 * u + phase);
                } else {
                    // monotone warp u + w sin(2 pi u) / (2 pi), |w| < 1
                    const double warped = u + warp * std::sin(two_pi * u) / two_pi;
                    clean = std::sin(two_pi * 4.0 * warped + phase);
                }
                x(c, t) = clean + noise(rng);
            }
        }
        ds.push_back(std::move(x), label);
    }
    return ds;
}

TimeSeries znormalize(const TimeSeries& x) {
    TimeSeries out = x;
    const double T = static_cast<double>(x.length());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto ch = out.channel(c);
        double mean = 0.0;
        for (double v : ch) mean += v;
        mean /= T;
        double var = 0.0;
        for (double v : ch) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / T);
        // relative threshold: a channel whose spread is rounding noise is constant
        const double scale = std::max(1.0, std::abs(mean));
        if (!(sd > 1e-12 * scale)) {
            std::fill(ch.begin(), ch.end(), 0.0);
            continue;
        }
        for (double& v : ch) v = (v - mean) / sd;
    }
    return out;
}

LabeledDataset split(const LabeledDataset& ds, SplitRatios ratios, std::uint64_t seed) {
    const double parts[3] = {ratios.train, ratios.validation, ratios.test};
    for (double p : parts) {
        if (!(p > 0.0)) throw ConfigError("split: every ratio must be positive");
    }
    if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
        throw ConfigError("split: ratios must sum to 1");
    }

    std::vector<Split> tags(ds.size(), Split::Unassigned);
    std::mt19937_64 rng(seed);
    for (int cls = 0; cls < ds.num_classes(); ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            if (ds.label(k) == cls) members.push_back(k);
        }
        if (members.empty()) continue;
        if (members.size() < 3) {
            throw Error("split: class " + std::to_string(cls) + " has " +
                        std::to_string(members.size()) + " examples, fewer than 3 splits");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const double m = static_cast<double>(members.size());
        auto n_val = static_cast<std::size_t>(std::llround(parts[1] * m));
        auto n_test = static_cast<std::size_t>(std::llround(parts[2] * m));
        n_val = std::max<std::size_t>(n_val, 1);
        n_test = std::max<std::size_t>(n_test, 1);
        while (n_val + n_test > members.size() - 1) {
            if (n_val >= n_test && n_val > 1) --n_val;
            else --n_test;
        }
        const std::size_t n_train = members.size() - n_val - n_test;
        for (std::size_t k = 0; k < members.size(); ++k) {
            tags[members[k]] = k < n_train           ? Split::Train
                               : k < n_train + n_val ? Split::Validation
                                                     : Split::Test;
        }
    }
    return LabeledDataset(ds.examples(), ds.labels(), std::move(tags));
}

}  // namespace dtwar
