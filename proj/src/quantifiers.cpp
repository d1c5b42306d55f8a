#include "opmode/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace opmode {

namespace {

inline double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double shannon_entropy(const PatternDistribution& p) {
    double h = 0.0;
    for (double v : p.probabilities()) {
        h -= plogp(v);
    }
    return std::max(h, 0.0);
}

double permutation_entropy(const PatternDistribution& p) {
    const double h_max = std::log(static_cast<double>(p.params().pattern_count()));
    return clamp01(shannon_entropy(p) / h_max);
}

double jensen_shannon_to_uniform(const PatternDistribution& p) {
    const int count = p.params().pattern_count();
    const double u = 1.0 / static_cast<double>(count);
    double mid_entropy = 0.0;
    for (double v : p.probabilities()) {
        mid_entropy -= plogp(0.5 * (v + u));
    }
    const double uniform_entropy = std::log(static_cast<double>(count));
    const double js = mid_entropy - 0.5 * (shannon_entropy(p) + uniform_entropy);
    return std::max(js, 0.0);
}

double q_zero(int dimension) {
    if (dimension < kMinDimension || dimension > kMaxDimension) {
        throw InvalidInput("dimension " + std::to_string(dimension) +
                           " outside supported range");
    }
    const double f = static_cast<double>(kFactorial[dimension]);
    const double denom = ((f + 1.0) / f) * std::log(f + 1.0) - 2.0 * std::log(2.0 * f) +
                         std::log(f);
    return -2.0 / denom;
}

double statistical_complexity(const PatternDistribution& p) {
    const double disequilibrium = q_zero(p.params().dimension()) * jensen_shannon_to_uniform(p);
    return clamp01(disequilibrium * permutation_entropy(p));
}

QuantifierPair quantifiers_of(const PatternDistribution& p) {
    return {permutation_entropy(p), statistical_complexity(p)};
}

}  // namespace opmode
