#include "opmode/config.hpp"

#include <json.hpp>

#include "opmode/util.hpp"

namespace opmode {

SweepGrid RunConfig::grid() const {
    SweepGrid grid;
    grid.dimensions = dimensions;
    grid.delays = delays;
    grid.quantifier_sets = quantifier_sets;
    grid.signal_sets = signal_sets;
    grid.classifiers = classifiers;
    grid.class_subsets = class_subsets;
    grid.defaults = classifier_params;
    grid.seed = seed;
    return grid;
}

namespace {

template <typename T>
std::vector<T> parse_name_list(const nlohmann::json& j, const char* what,
                               std::optional<T> (*lookup)(std::string_view)) {
    std::vector<T> out;
    for (const auto& item : j) {
        const auto name = item.get<std::string>();
        const auto value = lookup(name);
        if (!value) {
            throw InvalidInput(std::string("unknown ") + what + " \"" + name + "\"");
        }
        out.push_back(*value);
    }
    return out;
}

template <typename T>
nlohmann::json name_list_json(const std::vector<T>& items) {
    nlohmann::json out = nlohmann::json::array();
    for (const T& item : items) out.push_back(to_string(item));
    return out;
}

}  // namespace

RunConfig RunConfig::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad config JSON: ") + e.what(), 1);
    }

    RunConfig config;
    try {
        if (j.contains("data_root")) config.data_root = j["data_root"].get<std::string>();
        if (j.contains("out_dir")) config.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("jobs")) config.jobs = j["jobs"].get<int>();
        if (j.contains("distance")) {
            const auto name = j["distance"].get<std::string>();
            const auto metric = distance_metric_from_string(name);
            if (!metric) throw InvalidInput("unknown distance metric \"" + name + "\"");
            config.distance = *metric;
        }

        if (j.contains("grid")) {
            const auto& grid = j["grid"];
            if (grid.contains("dimensions")) {
                config.dimensions = grid["dimensions"].get<std::vector<int>>();
            }
            if (grid.contains("delays")) {
                config.delays = grid["delays"].get<std::vector<int>>();
            }
            if (grid.contains("feature_sets")) {
                config.quantifier_sets.clear();
                for (const auto& set : grid["feature_sets"]) {
                    config.quantifier_sets.push_back(
                        parse_name_list<Quantifier>(set, "feature", quantifier_from_string));
                }
            }
            if (grid.contains("signal_sets")) {
                config.signal_sets.clear();
                for (const auto& set : grid["signal_sets"]) {
                    config.signal_sets.push_back(
                        parse_name_list<Signal>(set, "signal", signal_from_string));
                }
            }
            if (grid.contains("classifiers")) {
                config.classifiers = parse_name_list<ClassifierKind>(
                    grid["classifiers"], "classifier", classifier_from_string);
            }
            if (grid.contains("class_subsets")) {
                config.class_subsets.clear();
                for (const auto& set : grid["class_subsets"]) {
                    config.class_subsets.push_back(
                        parse_name_list<Mode>(set, "mode", mode_from_string));
                }
            }
        }

        if (j.contains("classifier_params")) {
            const auto& params = j["classifier_params"];
            auto& cc = config.classifier_params;
            if (params.contains("knn_k")) cc.knn_k = params["knn_k"].get<int>();
            if (params.contains("svm_c")) cc.svm_c = params["svm_c"].get<double>();
            if (params.contains("svm_gamma")) cc.svm_gamma = params["svm_gamma"].get<double>();
            if (params.contains("svm_tolerance")) {
                cc.svm_tolerance = params["svm_tolerance"].get<double>();
            }
            if (params.contains("tree_min_split")) {
                cc.tree_min_split = params["tree_min_split"].get<int>();
            }
            if (params.contains("tree_min_leaf")) {
                cc.tree_min_leaf = params["tree_min_leaf"].get<int>();
            }
            if (params.contains("tree_max_depth")) {
                cc.tree_max_depth = params["tree_max_depth"].get<int>();
            }
            if (params.contains("standardize")) {
                cc.standardize = params["standardize"].get<bool>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad config value: ") + e.what());
    }

    // validation
    if (config.dimensions.empty() || config.delays.empty() ||
        config.quantifier_sets.empty() || config.signal_sets.empty() ||
        config.classifiers.empty() || config.class_subsets.empty()) {
        throw InvalidInput("config grid has an empty axis");
    }
    for (int d : config.dimensions) {
        if (d < 3 || d > 7) {
            throw InvalidInput("dimension " + std::to_string(d) + " outside [3, 7]");
        }
    }
    for (int delay : config.delays) {
        if (delay < 1) {
            throw InvalidInput("delay " + std::to_string(delay) + " must be >= 1");
        }
    }
    for (const auto& set : config.quantifier_sets) {
        if (set.empty()) throw InvalidInput("empty feature set in grid");
    }
    for (const auto& set : config.signal_sets) {
        if (set.empty()) throw InvalidInput("empty signal set in grid");
    }
    if (config.jobs < 0) throw InvalidInput("jobs must be >= 0");
    if (config.classifier_params.knn_k < 1) throw InvalidInput("knn_k must be >= 1");
    if (config.classifier_params.svm_c <= 0) throw InvalidInput("svm_c must be positive");
    if (config.classifier_params.svm_tolerance <= 0) {
        throw InvalidInput("svm_tolerance must be positive");
    }
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["data_root"] = data_root.string();
    j["out_dir"] = out_dir.string();
    j["seed"] = seed;
    j["jobs"] = jobs;
    j["distance"] = to_string(distance);

    nlohmann::json grid;
    grid["dimensions"] = dimensions;
    grid["delays"] = delays;
    nlohmann::json feature_sets = nlohmann::json::array();
    for (const auto& set : quantifier_sets) feature_sets.push_back(name_list_json(set));
    grid["feature_sets"] = std::move(feature_sets);
    nlohmann::json signal_sets_json = nlohmann::json::array();
    for (const auto& set : signal_sets) signal_sets_json.push_back(name_list_json(set));
    grid["signal_sets"] = std::move(signal_sets_json);
    grid["classifiers"] = name_list_json(classifiers);
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& set : class_subsets) subsets.push_back(name_list_json(set));
    grid["class_subsets"] = std::move(subsets);
    j["grid"] = std::move(grid);

    nlohmann::json params;
    params["knn_k"] = classifier_params.knn_k;
    params["svm_c"] = classifier_params.svm_c;
    params["svm_gamma"] = classifier_params.svm_gamma;
    params["svm_tolerance"] = classifier_params.svm_tolerance;
    params["tree_min_split"] = classifier_params.tree_min_split;
    params["tree_min_leaf"] = classifier_params.tree_min_leaf;
    params["tree_max_depth"] = classifier_params.tree_max_depth;
    if (classifier_params.standardize) {
        params["standardize"] = *classifier_params.standardize;
    }
    j["classifier_params"] = std::move(params);
    return j.dump(2) + "\n";
}

}  // namespace opmode
