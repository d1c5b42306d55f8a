#include "opmode/features.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include <json.hpp>

#include "opmode/parallel.hpp"
#include "opmode/quantifiers.hpp"
#include "opmode/time_series.hpp"
#include "opmode/transition_graph.hpp"
#include "opmode/util.hpp"

namespace opmode {

const char* to_string(Signal signal) {
    switch (signal) {
        case Signal::latitude: return "lat";
        case Signal::longitude: return "lon";
        case Signal::distance: return "dist";
    }
    return "?";
}

const char* to_string(Quantifier quantifier) {
    switch (quantifier) {
        case Quantifier::entropy: return "H";
        case Quantifier::complexity: return "C";
        case Quantifier::self_transition: return "pst";
    }
    return "?";
}

std::optional<Signal> signal_from_string(std::string_view name) {
    if (name == "lat" || name == "latitude") return Signal::latitude;
    if (name == "lon" || name == "longitude") return Signal::longitude;
    if (name == "dist" || name == "distance") return Signal::distance;
    return std::nullopt;
}

std::optional<Quantifier> quantifier_from_string(std::string_view name) {
    if (name == "H") return Quantifier::entropy;
    if (name == "C") return Quantifier::complexity;
    if (name == "pst" || name == "p_st") return Quantifier::self_transition;
    return std::nullopt;
}

namespace {

template <typename T>
std::vector<T> canonicalize(std::vector<T> items, const char* what) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (items.empty()) {
        throw InvalidInput(std::string(what) + " selection is empty");
    }
    return items;
}

template <typename T>
std::string join_labels(const std::vector<T>& items) {
    std::string out;
    for (const T& item : items) {
        if (!out.empty()) out += '+';
        out += to_string(item);
    }
    return out;
}

}  // namespace

FeatureSpec::FeatureSpec(EmbeddingParams params, std::vector<Quantifier> quantifiers,
                         std::vector<Signal> signals)
    : params_(params),
      quantifiers_(canonicalize(std::move(quantifiers), "quantifier")),
      signals_(canonicalize(std::move(signals), "signal")) {}

std::vector<std::string> FeatureSpec::column_names() const {
    std::vector<std::string> names;
    names.reserve(vector_length());
    for (Signal signal : signals_) {
        for (Quantifier quantifier : quantifiers_) {
            names.push_back(std::string(to_string(signal)) + "_" + to_string(quantifier));
        }
    }
    return names;
}

std::string FeatureSpec::quantifier_label() const { return join_labels(quantifiers_); }

std::string FeatureSpec::signal_label() const { return join_labels(signals_); }

std::size_t min_signal_length(const EmbeddingParams& params) {
    return static_cast<std::size_t>(params.dimension() - 1) * params.delay() + 2;
}

std::size_t SkipReport::total() const {
    std::size_t total = 0;
    for (const auto& [mode, count] : too_short) total += count;
    return total;
}

std::vector<Mode> LabeledDataset::classes() const {
    std::set<Mode> present;
    for (const FeatureVector& v : vectors) present.insert(v.label);
    return {present.begin(), present.end()};
}

namespace {

const std::vector<double>& signal_series(const SignalBundle& bundle, Signal signal) {
    switch (signal) {
        case Signal::latitude: return bundle.latitude;
        case Signal::longitude: return bundle.longitude;
        case Signal::distance: break;
    }
    return bundle.distance;
}

}  // namespace

std::optional<FeatureVector> extract_features(const Trajectory& trajectory,
                                              const FeatureSpec& spec,
                                              DistanceMetric metric) {
    const SignalBundle bundle = derive_signals(trajectory, metric);
    const std::size_t need = min_signal_length(spec.params());
    for (Signal signal : spec.signals()) {
        if (signal_series(bundle, signal).size() < need) {
            return std::nullopt;
        }
    }

    FeatureVector vec;
    vec.trajectory_id = trajectory.id;
    vec.label = trajectory.mode;
    vec.values.reserve(spec.vector_length());

    const bool want_distribution =
        std::any_of(spec.quantifiers().begin(), spec.quantifiers().end(),
                    [](Quantifier q) { return q != Quantifier::self_transition; });
    const bool want_graph =
        std::any_of(spec.quantifiers().begin(), spec.quantifiers().end(),
                    [](Quantifier q) { return q == Quantifier::self_transition; });

    for (Signal signal : spec.signals()) {
        const TimeSeries series(signal_series(bundle, signal));
        const OrdinalSequence sequence = extract_sequence(series, spec.params());
        QuantifierPair pair{0.0, 0.0};
        if (want_distribution) {
            pair = quantifiers_of(pattern_distribution(sequence));
        }
        double pst = 0.0;
        if (want_graph) {
            pst = self_transition_probability(build_graph(sequence));
        }
        for (Quantifier quantifier : spec.quantifiers()) {
            switch (quantifier) {
                case Quantifier::entropy: vec.values.push_back(pair.entropy); break;
                case Quantifier::complexity: vec.values.push_back(pair.complexity); break;
                case Quantifier::self_transition: vec.values.push_back(pst); break;
            }
        }
    }
    return vec;
}

BuildResult build_dataset(const std::vector<Trajectory>& trajectories,
                          const FeatureSpec& spec, DistanceMetric metric, int jobs) {
    if (trajectories.empty()) {
        throw InvalidInput("no trajectories to extract features from");
    }

    std::vector<std::optional<FeatureVector>> slots(trajectories.size());
    parallel_for(trajectories.size(), jobs, [&](std::size_t i) {
        slots[i] = extract_features(trajectories[i], spec, metric);
    });

    BuildResult result{LabeledDataset{spec, {}}, SkipReport{}};
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) {
            result.dataset.vectors.push_back(std::move(*slots[i]));
        } else {
            ++result.skips.too_short[trajectories[i].mode];
        }
    }
    if (result.dataset.vectors.empty()) {
        throw EmptyDatasetError("every trajectory was skipped at D=" +
                                std::to_string(spec.params().dimension()) +
                                " tau=" + std::to_string(spec.params().delay()));
    }
    std::sort(result.dataset.vectors.begin(), result.dataset.vectors.end(),
              [](const FeatureVector& a, const FeatureVector& b) {
                  return a.trajectory_id < b.trajectory_id;
              });
    return result;
}

void write_feature_csv(const LabeledDataset& dataset, std::ostream& out) {
    out << "traj_id,mode";
    for (const std::string& column : dataset.spec.column_names()) {
        out << ',' << column;
    }
    out << '\n';
    for (const FeatureVector& vec : dataset.vectors) {
        out << vec.trajectory_id << ',' << to_string(vec.label);
        for (double value : vec.values) {
            out << ',' << shortest_double(value);
        }
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(std::istream& in) {
    std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    LineCursor cursor{content};
    std::string_view line;

    if (!cursor.next(line)) {
        throw ParseError("empty feature file", 1);
    }
    const auto header = split_view(line, ',');
    if (header.size() < 2 || header[0] != "traj_id" || header[1] != "mode") {
        throw ParseError("bad feature header", cursor.line_number);
    }

    FeatureMatrix matrix;
    for (std::size_t i = 2; i < header.size(); ++i) {
        matrix.columns.emplace_back(header[i]);
    }

    while (cursor.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_view(line, ',');
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()),
                             cursor.line_number);
        }
        FeatureVector vec;
        vec.trajectory_id = std::string(fields[0]);
        const auto mode = mode_from_string(fields[1]);
        if (!mode) {
            throw ParseError("unknown mode " + std::string(fields[1]), cursor.line_number);
        }
        vec.label = *mode;
        vec.values.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            double value;
            if (!parse_double_token(fields[i], value)) {
                throw ParseError("malformed value " + std::string(fields[i]),
                                 cursor.line_number);
            }
            vec.values.push_back(value);
        }
        matrix.rows.push_back(std::move(vec));
    }
    return matrix;
}

LabeledDataset select_features(const FeatureMatrix& matrix, const FeatureSpec& spec) {
    std::vector<std::size_t> pick;
    for (const std::string& wanted : spec.column_names()) {
        const auto it = std::find(matrix.columns.begin(), matrix.columns.end(), wanted);
        if (it == matrix.columns.end()) {
            throw InvalidInput("feature matrix lacks column " + wanted);
        }
        pick.push_back(static_cast<std::size_t>(it - matrix.columns.begin()));
    }

    LabeledDataset dataset{spec, {}};
    dataset.vectors.reserve(matrix.rows.size());
    for (const FeatureVector& row : matrix.rows) {
        FeatureVector vec;
        vec.trajectory_id = row.trajectory_id;
        vec.label = row.label;
        vec.values.reserve(pick.size());
        for (std::size_t index : pick) {
            vec.values.push_back(row.values.at(index));
        }
        dataset.vectors.push_back(std::move(vec));
    }
    return dataset;
}

std::string skip_report_json(const SkipReport& report, const FeatureSpec& spec) {
    nlohmann::json j;
    j["dimension"] = spec.params().dimension();
    j["delay"] = spec.params().delay();
    j["min_signal_length"] = min_signal_length(spec.params());
    nlohmann::json per_mode;
    for (Mode mode : kAllModes) {
        const auto it = report.too_short.find(mode);
        per_mode[to_string(mode)] = it == report.too_short.end() ? 0 : it->second;
    }
    j["skipped_too_short"] = std::move(per_mode);
    j["total_skipped"] = report.total();
    return j.dump(2) + "\n";
}

}  // namespace opmode
