#include "opmode/ordinal.hpp"

#include <cmath>
#include <string>

namespace opmode {

namespace {

// Lehmer code of the rank word: number of later entries smaller than
// each entry, weighted by falling factorials.
std::uint16_t lehmer_index(std::span<const std::uint8_t> word) {
    const int d = static_cast<int>(word.size());
    std::uint32_t index = 0;
    for (int i = 0; i < d - 1; ++i) {
        std::uint32_t smaller_after = 0;
        for (int j = i + 1; j < d; ++j) {
            if (word[j] < word[i]) ++smaller_after;
        }
        index += smaller_after * kFactorial[d - 1 - i];
    }
    return static_cast<std::uint16_t>(index);
}

}  // namespace

Pattern::Pattern(std::span<const std::uint8_t> rank_word) {
    const std::size_t d = rank_word.size();
    if (d < static_cast<std::size_t>(kMinDimension) || d > static_cast<std::size_t>(kMaxDimension)) {
        throw InvalidInput("rank word length " + std::to_string(d) +
                           " outside supported dimension range");
    }
    std::array<bool, kMaxDimension> seen{};
    for (std::size_t i = 0; i < d; ++i) {
        if (rank_word[i] >= d || seen[rank_word[i]]) {
            throw InvalidInput("rank word is not a permutation of 0.." +
                               std::to_string(d - 1));
        }
        seen[rank_word[i]] = true;
        word_[i] = rank_word[i];
    }
    dimension_ = static_cast<std::uint8_t>(d);
    index_ = lehmer_index(word());
}

Pattern Pattern::from_index(std::uint16_t index, int dimension) {
    if (dimension < kMinDimension || dimension > kMaxDimension) {
        throw InvalidInput("dimension " + std::to_string(dimension) +
                           " outside supported range");
    }
    if (index >= kFactorial[dimension]) {
        throw InvalidInput("pattern index " + std::to_string(index) +
                           " out of range for dimension " + std::to_string(dimension));
    }
    // Factorial-number-system decode: digit i selects among the values
    // not used yet.
    Pattern p;
    p.dimension_ = static_cast<std::uint8_t>(dimension);
    p.index_ = index;
    std::array<std::uint8_t, kMaxDimension> remaining{};
    for (int i = 0; i < dimension; ++i) remaining[i] = static_cast<std::uint8_t>(i);
    int left = dimension;
    std::uint32_t rest = index;
    for (int i = 0; i < dimension; ++i) {
        const std::uint32_t digit = rest / kFactorial[dimension - 1 - i];
        rest %= kFactorial[dimension - 1 - i];
        p.word_[i] = remaining[digit];
        for (int j = static_cast<int>(digit); j < left - 1; ++j) {
            remaining[j] = remaining[j + 1];
        }
        --left;
    }
    return p;
}

OrdinalSequence::OrdinalSequence(std::vector<std::uint16_t> indices, EmbeddingParams params,
                                 std::size_t source_length)
    : indices_(std::move(indices)), params_(params), source_length_(source_length) {
    if (indices_.empty()) {
        throw InvalidInput("ordinal sequence must contain at least one pattern");
    }
    const std::size_t span = static_cast<std::size_t>(params_.dimension() - 1) *
                             static_cast<std::size_t>(params_.delay());
    if (source_length_ < span + indices_.size()) {
        throw InvalidInput("ordinal sequence length inconsistent with source length");
    }
    for (std::uint16_t idx : indices_) {
        if (idx >= params_.pattern_count()) {
            throw InvalidInput("pattern index " + std::to_string(idx) +
                               " out of range for dimension " +
                               std::to_string(params_.dimension()));
        }
    }
}

PatternDistribution::PatternDistribution(std::vector<double> probabilities,
                                         EmbeddingParams params)
    : probabilities_(std::move(probabilities)), params_(params) {
    if (probabilities_.size() != static_cast<std::size_t>(params_.pattern_count())) {
        throw InvalidInput("distribution must cover all " +
                           std::to_string(params_.pattern_count()) + " patterns");
    }
    double sum = 0.0;
    for (double p : probabilities_) {
        if (!(p >= 0.0)) {
            throw InvalidInput("pattern probabilities must be nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInput("pattern probabilities sum to " + std::to_string(sum) +
                           ", expected 1");
    }
}

int max_delay(std::size_t series_length, int dimension) {
    if (dimension < kMinDimension || dimension > kMaxDimension) {
        throw InvalidInput("embedding dimension " + std::to_string(dimension) +
                           " outside supported range");
    }
    if (series_length < static_cast<std::size_t>(dimension)) {
        throw InvalidInput("series of length " + std::to_string(series_length) +
                           " admits no window at dimension " + std::to_string(dimension));
    }
    // Largest tau with tau * (D - 1) <= n - 1.
    return static_cast<int>((series_length - 1) / static_cast<std::size_t>(dimension - 1));
}

namespace {

// Rank by pairwise counting: an element's rank is the number of values
// strictly below it plus the equal values at earlier positions.
inline void rank_window(const double* window, int d, std::uint8_t* word) {
    for (int i = 0; i < d; ++i) {
        int rank = 0;
        for (int j = 0; j < d; ++j) {
            if (window[j] < window[i] || (window[j] == window[i] && j < i)) ++rank;
        }
        word[rank] = static_cast<std::uint8_t>(i);
    }
}

}  // namespace

Pattern extract_pattern(std::span<const double> window) {
    const int d = static_cast<int>(window.size());
    if (d < kMinDimension || d > kMaxDimension) {
        throw InvalidInput("window length " + std::to_string(window.size()) +
                           " outside supported dimension range");
    }
    for (double v : window) {
        if (!std::isfinite(v)) {
            throw InvalidInput("window contains a non-finite value");
        }
    }
    std::array<std::uint8_t, kMaxDimension> word{};
    rank_window(window.data(), d, word.data());
    return Pattern(std::span<const std::uint8_t>{word.data(), static_cast<std::size_t>(d)});
}

OrdinalSequence extract_sequence(const TimeSeries& series, const EmbeddingParams& params) {
    const std::size_t n = series.size();
    const int d = params.dimension();
    const int tau = params.delay();
    const std::size_t span = static_cast<std::size_t>(d - 1) * static_cast<std::size_t>(tau);
    if (n < span + 1) {
        throw SeriesTooShort(n, d, tau);
    }
    const std::size_t m = n - span;

    std::vector<std::uint16_t> indices(m);
    std::array<double, kMaxDimension> window{};
    std::array<std::uint8_t, kMaxDimension> word{};
    const double* x = series.samples().data();
    for (std::size_t t = 0; t < m; ++t) {
        for (int k = 0; k < d; ++k) {
            window[k] = x[t + static_cast<std::size_t>(k) * tau];
        }
        rank_window(window.data(), d, word.data());
        // Inline Lehmer code; same scheme as Pattern::index().
        std::uint32_t index = 0;
        for (int i = 0; i < d - 1; ++i) {
            std::uint32_t smaller_after = 0;
            for (int j = i + 1; j < d; ++j) {
                if (word[j] < word[i]) ++smaller_after;
            }
            index += smaller_after * kFactorial[d - 1 - i];
        }
        indices[t] = static_cast<std::uint16_t>(index);
    }
    return OrdinalSequence(std::move(indices), params, n);
}

PatternDistribution pattern_distribution(const OrdinalSequence& sequence) {
    const std::size_t m = sequence.size();
    std::vector<std::size_t> counts(sequence.params().pattern_count(), 0);
    for (std::uint16_t idx : sequence.indices()) {
        ++counts[idx];
    }
    std::vector<double> probabilities(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        probabilities[i] = static_cast<double>(counts[i]) / static_cast<double>(m);
    }
    return PatternDistribution(std::move(probabilities), sequence.params());
}

}  // namespace opmode
