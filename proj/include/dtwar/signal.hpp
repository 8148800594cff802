#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dtwar {

/// An n-channel, length-T real signal stored channel-major (row c holds channel c).
class TimeSeries {
public:
    TimeSeries() = default;

    /// Zero-filled series. Throws ShapeError unless channels >= 1 and length >= 1.
    TimeSeries(std::size_t channels, std::size_t length);

    /// Takes ownership of channel-major values; validates size and finiteness.
    TimeSeries(std::size_t channels, std::size_t length, std::vector<double> values);

    static TimeSeries univariate(std::vector<double> values);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t length() const noexcept { return length_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double operator()(std::size_t channel, std::size_t t) const noexcept {
        return values_[channel * length_ + t];
    }
    double& operator()(std::size_t channel, std::size_t t) noexcept {
        return values_[channel * length_ + t];
    }

    std::span<const double> channel(std::size_t c) const noexcept {
        return {values_.data() + c * length_, length_};
    }
    std::span<double> channel(std::size_t c) noexcept {
        return {values_.data() + c * length_, length_};
    }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    bool same_shape(const TimeSeries& other) const noexcept {
        return channels_ == other.channels_ && length_ == other.length_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t length_ = 0;
    std::vector<double> values_;
};

/// Throws ShapeError when the two series differ in channels or length.
void require_same_shape(const TimeSeries& a, const TimeSeries& b, const char* what);

enum class Split : std::uint8_t { Unassigned, Train, Validation, Test };

const char* to_string(Split s) noexcept;

/// Examples sharing one (n, T) shape, with integer labels in [0, K).
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<TimeSeries> examples, std::vector<int> labels);
    LabeledDataset(std::vector<TimeSeries> examples, std::vector<int> labels,
                   std::vector<Split> tags);

    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }
    std::size_t channels() const noexcept;
    std::size_t length() const noexcept;
    /// K = 1 + max label (0 for an empty dataset).
    int num_classes() const noexcept { return num_classes_; }

    const TimeSeries& example(std::size_t k) const { return examples_.at(k); }
    int label(std::size_t k) const { return labels_.at(k); }
    Split tag(std::size_t k) const { return tags_.at(k); }

    const std::vector<TimeSeries>& examples() const noexcept { return examples_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<Split>& tags() const noexcept { return tags_; }

    /// Indices tagged with the given split, in dataset order.
    std::vector<std::size_t> indices(Split s) const;
    /// New dataset holding only the examples tagged `s` (tags preserved).
    LabeledDataset subset(Split s) const;
    LabeledDataset subset(std::span<const std::size_t> idx) const;

    /// Appends an example; shape must match and label must be non-negative.
    void push_back(TimeSeries x, int label, Split tag = Split::Unassigned);

    /// Copy with every example z-normalized per channel.
    LabeledDataset normalized() const;

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::vector<TimeSeries> examples_;
    std::vector<int> labels_;
    std::vector<Split> tags_;
    int num_classes_ = 0;
};

/// Reads one example per row: `label,v[ch0,t0..T-1],v[ch1,...],...`.
LabeledDataset load_csv(const std::filesystem::path& path, std::size_t channels,
                        std::size_t length);

/// Writes in the same layout as load_csv with 17 significant digits.
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);

/// Balanced two-class synthetic set. Class 0 is a two-cycle sinusoid with random
/// phase; class 1 is a time-warped four-cycle sinusoid. Pure in its arguments.
LabeledDataset synth_two_class(std::size_t count, std::size_t channels, std::size_t length,
                               std::uint64_t seed);

/// Per-channel zero mean, unit population standard deviation; constant
/// channels become zero.
TimeSeries znormalize(const TimeSeries& x);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

/// Stratified, seeded assignment of train/validation/test tags.
LabeledDataset split(const LabeledDataset& ds, SplitRatios ratios, std::uint64_t seed);

}  // namespace dtwar
