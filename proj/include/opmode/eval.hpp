#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opmode/classify.hpp"
#include "opmode/features.hpp"

namespace opmode {

inline constexpr std::size_t kFoldCount = 5;

// Student-t 0.975 quantile at 4 degrees of freedom.
inline constexpr double kTQuantile = 2.7764451051977987;

// Partition of trajectory ids into 5 stratified folds.
struct FoldPlan {
    std::uint64_t seed = 0;
    std::array<std::vector<std::string>, kFoldCount> folds;
};

// Deterministic under seed. Per-class fold counts differ by at most one and
// fold totals stay as even as the class sizes allow. Errors when any class
// has fewer than kFoldCount members.
FoldPlan make_folds(const LabeledDataset& dataset, std::uint64_t seed);

// Row-major confusion counts over a fixed class list: counts[actual][predicted].
struct Confusion {
    std::vector<Mode> classes;
    std::vector<std::size_t> counts;

    explicit Confusion(std::vector<Mode> cls)
        : classes(std::move(cls)), counts(classes.size() * classes.size(), 0) {}
    std::size_t& at(std::size_t actual, std::size_t predicted) {
        return counts[actual * classes.size() + predicted];
    }
    std::size_t at(std::size_t actual, std::size_t predicted) const {
        return counts[actual * classes.size() + predicted];
    }
    std::size_t total() const;
};

// One fold's metrics. Empty denominators yield 0.
struct FoldMetrics {
    std::vector<double> precision;
    std::vector<double> sensitivity;
    std::vector<double> f1;
    double accuracy = 0.0;
};

FoldMetrics fold_metrics(const Confusion& confusion);

struct MetricStats {
    double mean = 0.0;
    double half_width = 0.0;  // t * s / sqrt(n), sample std
};

MetricStats t_interval(std::span<const double> values);

struct ClassMetrics {
    Mode mode;
    MetricStats precision;
    MetricStats sensitivity;
    MetricStats f1;
};

struct MetricReport {
    ClassifierKind classifier;
    int dimension = 0;
    int delay = 0;
    std::string quantifier_label;
    std::string signal_label;
    std::vector<Mode> classes;
    std::vector<ClassMetrics> per_class;
    MetricStats accuracy;
    std::uint64_t seed = 0;
};

// 5-fold cross-validation of one classifier config on one dataset.
// Errors when the plan does not partition the dataset's ids or a training
// split lacks one of the dataset's classes.
MetricReport evaluate(const LabeledDataset& dataset, const ClassifierConfig& config,
                      const FoldPlan& plan);

// One grid axis combination.
struct SweepCell {
    int dimension = 0;
    int delay = 0;
    std::vector<Quantifier> quantifiers;
    std::vector<Signal> signals;
    ClassifierKind classifier = ClassifierKind::knn;
    std::vector<Mode> class_subset;  // empty = every mode present
};

struct SweepGrid {
    std::vector<int> dimensions;
    std::vector<int> delays;
    std::vector<std::vector<Quantifier>> quantifier_sets;
    std::vector<std::vector<Signal>> signal_sets;
    std::vector<ClassifierKind> classifiers;
    std::vector<std::vector<Mode>> class_subsets;  // {} entry = all modes
    ClassifierConfig defaults;  // kind and seed overridden per cell
    std::uint64_t seed = 0;
};

// Canonical cell order: dimensions, delays, quantifier sets, signal sets,
// classifiers, class subsets, nested in that order.
std::vector<SweepCell> expand_grid(const SweepGrid& grid);

struct SweepResult {
    SweepCell cell;
    MetricReport report;
    std::size_t dataset_size = 0;
};

// Feature matrices keyed by (dimension, delay); each must cover the columns
// the grid's specs select. Cells run in parallel; results come back in
// canonical cell order regardless of jobs. progress, when set, is called in
// completion order under a lock.
std::vector<SweepResult> sweep(
    const SweepGrid& grid,
    const std::map<std::pair<int, int>, FeatureMatrix>& matrices, int jobs = 0,
    const std::function<void(const SweepResult&)>& progress = {});

// CSV schema:
//   D,tau,features,signals,classifier,classes,class,precision,sensitivity,f1,accuracy,ci_half_width,seed
// Per-class rows carry the F1 half-width and leave accuracy empty; the
// __overall__ row carries accuracy and its half-width.
void write_results_csv(const std::vector<SweepResult>& results, std::ostream& out);

// JSON mirror with full mean/half-width pairs for every metric.
std::string results_json(const std::vector<SweepResult>& results);

struct ResultRow {
    int dimension = 0;
    int delay = 0;
    std::string features;
    std::string signals;
    std::string classifier;
    std::string classes;
    std::string label;  // class column: mode name or __overall__
    std::optional<double> precision;
    std::optional<double> sensitivity;
    std::optional<double> f1;
    std::optional<double> accuracy;
    std::optional<double> ci_half_width;
    std::uint64_t seed = 0;
};

std::vector<ResultRow> read_results_csv(std::istream& in);

}  // namespace opmode
