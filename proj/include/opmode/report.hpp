#pragma once

#include <string>
#include <vector>

#include "opmode/eval.hpp"

namespace opmode {

// Overall accuracy against D at the smallest delay present, one row per
// (features, signals, classifier, classes, D). Header-only when rows is empty.
std::string accuracy_by_d_csv(const std::vector<ResultRow>& rows);

// Overall accuracy against tau at the best-accuracy dimension (ties go to
// the smaller D).
std::string accuracy_by_tau_csv(const std::vector<ResultRow>& rows);

// (H, C) pairs per trajectory and signal for the signals whose H and C
// columns are both present in the matrix.
std::string ce_plane_csv(const FeatureMatrix& matrix);

}  // namespace opmode
