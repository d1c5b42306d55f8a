#include <string>
#include <vector>

#include <doctest.h>

#include "opmode/config.hpp"
#include "opmode/errors.hpp"

using namespace opmode;

TEST_CASE("config defaults") {
    const RunConfig config;
    CHECK(config.out_dir == "out");
    CHECK(config.seed == 1);
    CHECK(config.jobs == 0);
    CHECK(config.distance == DistanceMetric::euclidean_degrees);
    CHECK(config.dimensions == std::vector<int>{3, 4, 5, 6, 7});
    CHECK(config.delays == std::vector<int>{1});
    REQUIRE(config.quantifier_sets.size() == 1);
    CHECK(config.quantifier_sets[0].size() == 3);
    REQUIRE(config.signal_sets.size() == 1);
    CHECK(config.signal_sets[0].size() == 3);
    CHECK(config.classifiers.size() == 4);
    REQUIRE(config.class_subsets.size() == 1);
    CHECK(config.class_subsets[0].empty());
    CHECK(config.classifier_params.knn_k == 2);
    CHECK(config.classifier_params.svm_c == 1.0);
    CHECK(!config.classifier_params.standardize.has_value());

    const auto grid = config.grid();
    CHECK(expand_grid(grid).size() == 5 * 1 * 1 * 1 * 4 * 1);
    CHECK(grid.seed == config.seed);
}

TEST_CASE("config parses a full document") {
    const std::string text = R"({
        "data_root": "/data/geolife",
        "out_dir": "results",
        "seed": 99,
        "jobs": 3,
        "distance": "haversine",
        "grid": {
            "dimensions": [4, 6],
            "delays": [1, 2, 3],
            "feature_sets": [["H", "C", "pst"], ["pst"], ["H", "C"]],
            "signal_sets": [["lat", "lon", "dist"], ["dist"]],
            "classifiers": ["knn", "svm_rbf"],
            "class_subsets": [[], ["walk", "bus"]]
        },
        "classifier_params": {
            "knn_k": 3,
            "svm_c": 10.0,
            "svm_gamma": 0.5,
            "svm_tolerance": 1e-4,
            "tree_min_split": 8,
            "tree_min_leaf": 4,
            "tree_max_depth": 6,
            "standardize": false
        }
    })";
    const auto config = RunConfig::from_json(text);
    CHECK(config.data_root == "/data/geolife");
    CHECK(config.out_dir == "results");
    CHECK(config.seed == 99);
    CHECK(config.jobs == 3);
    CHECK(config.distance == DistanceMetric::haversine_meters);
    CHECK(config.dimensions == std::vector<int>{4, 6});
    CHECK(config.delays == std::vector<int>{1, 2, 3});
    REQUIRE(config.quantifier_sets.size() == 3);
    CHECK(config.quantifier_sets[1] ==
          std::vector<Quantifier>{Quantifier::self_transition});
    REQUIRE(config.signal_sets.size() == 2);
    CHECK(config.signal_sets[1] == std::vector<Signal>{Signal::distance});
    CHECK(config.classifiers ==
          std::vector<ClassifierKind>{ClassifierKind::knn, ClassifierKind::svm_rbf});
    REQUIRE(config.class_subsets.size() == 2);
    CHECK(config.class_subsets[0].empty());
    CHECK(config.class_subsets[1] == std::vector<Mode>{Mode::walk, Mode::bus});
    CHECK(config.classifier_params.knn_k == 3);
    CHECK(config.classifier_params.svm_c == 10.0);
    CHECK(config.classifier_params.svm_gamma == 0.5);
    CHECK(config.classifier_params.svm_tolerance == 1e-4);
    CHECK(config.classifier_params.tree_min_split == 8);
    CHECK(config.classifier_params.tree_min_leaf == 4);
    CHECK(config.classifier_params.tree_max_depth == 6);
    CHECK(config.classifier_params.standardize == false);

    CHECK(expand_grid(config.grid()).size() == 2 * 3 * 3 * 2 * 2 * 2);
}

TEST_CASE("config json round-trips semantically") {
    const std::string text = R"({
        "data_root": "/somewhere",
        "seed": 4,
        "grid": {"dimensions": [5], "delays": [2], "classifiers": ["tree"]},
        "classifier_params": {"tree_max_depth": 3, "standardize": true}
    })";
    const auto config = RunConfig::from_json(text);
    const auto again = RunConfig::from_json(config.to_json());
    CHECK(again.data_root == config.data_root);
    CHECK(again.out_dir == config.out_dir);
    CHECK(again.seed == config.seed);
    CHECK(again.jobs == config.jobs);
    CHECK(again.distance == config.distance);
    CHECK(again.dimensions == config.dimensions);
    CHECK(again.delays == config.delays);
    CHECK(again.quantifier_sets == config.quantifier_sets);
    CHECK(again.signal_sets == config.signal_sets);
    CHECK(again.classifiers == config.classifiers);
    CHECK(again.class_subsets == config.class_subsets);
    CHECK(again.classifier_params.tree_max_depth == 3);
    CHECK(again.classifier_params.standardize == true);
    CHECK(again.to_json() == config.to_json());
}

TEST_CASE("config validation") {
    const auto reject = [](const std::string& text) {
        CHECK_THROWS_AS(RunConfig::from_json(text), Error);
    };
    reject("not json at all");
    reject(R"({"grid": {"dimensions": [2]}})");
    reject(R"({"grid": {"dimensions": [8]}})");
    reject(R"({"grid": {"dimensions": []}})");
    reject(R"({"grid": {"delays": [0]}})");
    reject(R"({"grid": {"delays": []}})");
    reject(R"({"grid": {"feature_sets": []}})");
    reject(R"({"grid": {"feature_sets": [[]]}})");
    reject(R"({"grid": {"feature_sets": [["entropy_rate"]]}})");
    reject(R"({"grid": {"signal_sets": [[]]}})");
    reject(R"({"grid": {"signal_sets": [["altitude"]]}})");
    reject(R"({"grid": {"classifiers": []}})");
    reject(R"({"grid": {"classifiers": ["forest"]}})");
    reject(R"({"grid": {"class_subsets": [["train"]]}})");
    reject(R"({"distance": "chebyshev"})");
    reject(R"({"jobs": -1})");
    reject(R"({"classifier_params": {"knn_k": 0}})");
    reject(R"({"classifier_params": {"svm_c": 0}})");
    reject(R"({"classifier_params": {"svm_tolerance": 0}})");
    reject(R"({"seed": "abc"})");

    // unknown-name errors carry the offending name
    try {
        RunConfig::from_json(R"({"grid": {"classifiers": ["forest"]}})");
        CHECK(false);
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("forest") != std::string::npos);
    }
}
