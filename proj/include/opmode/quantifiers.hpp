#pragma once

#include "opmode/ordinal.hpp"

namespace opmode {

// Normalized permutation entropy and statistical complexity of one
// pattern distribution. All entropies here use natural logarithms: the
// entropy ratio is base-independent, and the Jensen-Shannon term must
// share the base of the q_zero constant for the normalization to hold.
struct QuantifierPair {
    double entropy;     // H_S in [0, 1]
    double complexity;  // C_JS in [0, 1]
};

// Shannon entropy -sum p ln p in nats, with 0 ln 0 = 0.
double shannon_entropy(const PatternDistribution& p);

// H_S = H / ln(D!), in [0, 1].
double permutation_entropy(const PatternDistribution& p);

// Jensen-Shannon divergence between p and the uniform distribution over
// all D! patterns: S[(p+u)/2] - (S[p] + S[u]) / 2, in nats.
double jensen_shannon_to_uniform(const PatternDistribution& p);

// Normalization constant: the inverse of the maximum Jensen-Shannon
// divergence from uniform, attained by a degenerate distribution.
//   Q0 = -2 [ ((D!+1)/D!) ln(D!+1) - 2 ln(2 D!) + ln(D!) ]^-1
double q_zero(int dimension);

// C_JS = Q0 * JS(p, uniform) * H_S(p), in [0, 1]. Zero for both the
// uniform (JS = 0) and the degenerate (H_S = 0) distribution.
double statistical_complexity(const PatternDistribution& p);

QuantifierPair quantifiers_of(const PatternDistribution& p);

}  // namespace opmode
