#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opmode/geolife.hpp"
#include "opmode/ordinal.hpp"

namespace opmode {

// The three per-trajectory signals fed into the ordinal pipeline.
enum class Signal { latitude, longitude, distance };
inline constexpr Signal kAllSignals[] = {Signal::latitude, Signal::longitude,
                                         Signal::distance};

// The per-signal quantifiers. pst comes from the transition graph, H and C
// from the pattern distribution.
enum class Quantifier { entropy, complexity, self_transition };
inline constexpr Quantifier kAllQuantifiers[] = {
    Quantifier::entropy, Quantifier::complexity, Quantifier::self_transition};

const char* to_string(Signal signal);            // "lat" | "lon" | "dist"
const char* to_string(Quantifier quantifier);    // "H" | "C" | "pst"
std::optional<Signal> signal_from_string(std::string_view name);
std::optional<Quantifier> quantifier_from_string(std::string_view name);

// Which (signal, quantifier) pairs make up a feature vector at one (D, tau).
// Both axes are kept in canonical enum order regardless of input order, so
// two specs selecting the same sets produce identical column layouts.
class FeatureSpec {
public:
    FeatureSpec(EmbeddingParams params, std::vector<Quantifier> quantifiers,
                std::vector<Signal> signals);

    const EmbeddingParams& params() const { return params_; }
    const std::vector<Quantifier>& quantifiers() const { return quantifiers_; }
    const std::vector<Signal>& signals() const { return signals_; }

    std::size_t vector_length() const { return signals_.size() * quantifiers_.size(); }

    // Signal-major column names: lat_H, lat_C, lat_pst, lon_H, ...
    std::vector<std::string> column_names() const;
    std::string quantifier_label() const;  // e.g. "H+C+pst"
    std::string signal_label() const;      // e.g. "lat+lon+dist"

private:
    EmbeddingParams params_;
    std::vector<Quantifier> quantifiers_;
    std::vector<Signal> signals_;
};

// Shortest series length a signal needs so the window sequence has at least
// two patterns (one graph transition): (D-1)*tau + 2.
std::size_t min_signal_length(const EmbeddingParams& params);

struct FeatureVector {
    std::string trajectory_id;
    Mode label;
    std::vector<double> values;  // spec order
};

struct SkipReport {
    std::map<Mode, std::size_t> too_short;  // per-mode skip counts
    std::size_t total() const;
};

// Rows sorted by trajectory id; every vector has spec.vector_length() values.
struct LabeledDataset {
    FeatureSpec spec;
    std::vector<FeatureVector> vectors;

    std::vector<Mode> classes() const;  // modes present, enum order
};

// Returns nullopt when any selected signal is shorter than
// min_signal_length(spec.params()).
std::optional<FeatureVector> extract_features(
    const Trajectory& trajectory, const FeatureSpec& spec,
    DistanceMetric metric = DistanceMetric::euclidean_degrees);

struct BuildResult {
    LabeledDataset dataset;
    SkipReport skips;
};

// Parallel across trajectories; output sorted by trajectory id.
// Errors when trajectories is empty or every trajectory is skipped.
BuildResult build_dataset(const std::vector<Trajectory>& trajectories,
                          const FeatureSpec& spec,
                          DistanceMetric metric = DistanceMetric::euclidean_degrees,
                          int jobs = 0);

// CSV: header "traj_id,mode,<columns>", doubles in shortest round-trip form.
void write_feature_csv(const LabeledDataset& dataset, std::ostream& out);

// A parsed feature CSV; columns beyond traj_id and mode in file order.
struct FeatureMatrix {
    std::vector<std::string> columns;
    std::vector<FeatureVector> rows;
};

FeatureMatrix read_feature_csv(std::istream& in);

// Picks spec's columns out of a wider matrix. Errors when a column is absent.
LabeledDataset select_features(const FeatureMatrix& matrix, const FeatureSpec& spec);

std::string skip_report_json(const SkipReport& report, const FeatureSpec& spec);

}  // namespace opmode
