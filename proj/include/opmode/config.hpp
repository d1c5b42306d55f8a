#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "opmode/eval.hpp"

namespace opmode {

// One run's inputs: paths, seed, grid axes, classifier hyperparameters.
// Loads from JSON; load-time validation enforces D in [3,7], tau >= 1,
// nonempty axes, and known names. Serialization round-trips semantically.
struct RunConfig {
    std::filesystem::path data_root;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
    int jobs = 0;
    DistanceMetric distance = DistanceMetric::euclidean_degrees;

    std::vector<int> dimensions = {3, 4, 5, 6, 7};
    std::vector<int> delays = {1};
    std::vector<std::vector<Quantifier>> quantifier_sets = {
        {Quantifier::entropy, Quantifier::complexity, Quantifier::self_transition}};
    std::vector<std::vector<Signal>> signal_sets = {
        {Signal::latitude, Signal::longitude, Signal::distance}};
    std::vector<ClassifierKind> classifiers = {
        ClassifierKind::knn, ClassifierKind::svm_linear, ClassifierKind::svm_rbf,
        ClassifierKind::decision_tree};
    std::vector<std::vector<Mode>> class_subsets = {{}};  // {} = all modes

    ClassifierConfig classifier_params;  // kind and seed are per-cell concerns

    SweepGrid grid() const;

    static RunConfig from_json(std::string_view text);
    static RunConfig load(const std::filesystem::path& path);
    std::string to_json() const;
};

}  // namespace opmode
