#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "opmode/errors.hpp"
#include "opmode/time_series.hpp"

namespace opmode {

// Embedding dimensions the pattern machinery accepts. The pipeline and
// CLI restrict themselves to [3, 7]; dimension 2 is admitted here so the
// two-pattern (up/down) alphabet stays expressible in library code and
// tests.
inline constexpr int kMinDimension = 2;
inline constexpr int kMaxDimension = 7;

// factorials[d] = d!
inline constexpr std::array<std::uint16_t, 8> kFactorial = {1, 1, 2, 6, 24, 120, 720, 5040};

// Embedding dimension D and delay tau of the ordinal transformation.
class EmbeddingParams {
public:
    EmbeddingParams(int dimension, int delay) : dimension_(dimension), delay_(delay) {
        if (dimension < kMinDimension || dimension > kMaxDimension) {
            throw InvalidInput("embedding dimension " + std::to_string(dimension) +
                               " outside supported range [" + std::to_string(kMinDimension) +
                               ", " + std::to_string(kMaxDimension) + "]");
        }
        if (delay < 1) {
            throw InvalidInput("embedding delay must be at least 1, got " +
                               std::to_string(delay));
        }
    }

    int dimension() const noexcept { return dimension_; }
    int delay() const noexcept { return delay_; }

    // Number of distinct patterns, D!.
    int pattern_count() const noexcept { return kFactorial[dimension_]; }

    bool operator==(const EmbeddingParams&) const = default;

private:
    int dimension_;
    int delay_;
};

// One ordinal pattern: the permutation of window positions in ascending
// value order. word()[k] is the window position holding the k-th
// smallest value; ties rank the earlier position first. The pattern is
// also addressable as a dense index in [0, D!-1] via the Lehmer code of
// the rank word, so the identity permutation has index 0.
class Pattern {
public:
    explicit Pattern(std::span<const std::uint8_t> rank_word);

    static Pattern from_index(std::uint16_t index, int dimension);

    int dimension() const noexcept { return dimension_; }
    std::span<const std::uint8_t> word() const noexcept {
        return {word_.data(), static_cast<std::size_t>(dimension_)};
    }
    std::uint16_t index() const noexcept { return index_; }

    bool operator==(const Pattern& other) const noexcept {
        return dimension_ == other.dimension_ && index_ == other.index_;
    }

private:
    Pattern() = default;

    std::array<std::uint8_t, kMaxDimension> word_{};
    std::uint16_t index_ = 0;
    std::uint8_t dimension_ = 0;
};

// The pattern sequence extracted from one time series. Patterns are
// stored as dense indices; pattern_at() rebuilds the rank word.
class OrdinalSequence {
public:
    OrdinalSequence(std::vector<std::uint16_t> indices, EmbeddingParams params,
                    std::size_t source_length);

    std::size_t size() const noexcept { return indices_.size(); }
    std::uint16_t index_at(std::size_t i) const noexcept { return indices_[i]; }
    Pattern pattern_at(std::size_t i) const { return Pattern::from_index(indices_[i], params_.dimension()); }
    std::span<const std::uint16_t> indices() const noexcept { return indices_; }
    const EmbeddingParams& params() const noexcept { return params_; }
    std::size_t source_length() const noexcept { return source_length_; }

private:
    std::vector<std::uint16_t> indices_;
    EmbeddingParams params_;
    std::size_t source_length_;
};

// Histogram p(pi) over all D! patterns, dense; unobserved patterns
// carry probability zero.
class PatternDistribution {
public:
    PatternDistribution(std::vector<double> probabilities, EmbeddingParams params);

    double operator[](std::size_t pattern_index) const noexcept {
        return probabilities_[pattern_index];
    }
    std::span<const double> probabilities() const noexcept { return probabilities_; }
    std::size_t size() const noexcept { return probabilities_.size(); }
    const EmbeddingParams& params() const noexcept { return params_; }

private:
    std::vector<double> probabilities_;
    EmbeddingParams params_;
};

// Largest delay tau satisfying tau * (D - 1) < n, i.e. the largest tau
// leaving at least one full window. Throws InvalidInput when n < D.
int max_delay(std::size_t series_length, int dimension);

// Rank the values of one window. The window length is the embedding
// dimension and must lie in [kMinDimension, kMaxDimension]; values must
// be finite. Equal values rank the earlier position lower.
Pattern extract_pattern(std::span<const double> window);

// Slide over the series with unit stride; elements inside a window are
// tau apart. Yields m = n - (D-1)*tau patterns. Throws SeriesTooShort
// when no window fits.
OrdinalSequence extract_sequence(const TimeSeries& series, const EmbeddingParams& params);

// Relative frequency of each pattern: count / m, dense over all D!.
PatternDistribution pattern_distribution(const OrdinalSequence& sequence);

}  // namespace opmode
