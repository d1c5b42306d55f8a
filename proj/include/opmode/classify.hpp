#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace opmode {

// Row-major dense matrix of feature values.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
};

enum class ClassifierKind { knn, svm_linear, svm_rbf, decision_tree };
inline constexpr ClassifierKind kAllClassifiers[] = {
    ClassifierKind::knn, ClassifierKind::svm_linear, ClassifierKind::svm_rbf,
    ClassifierKind::decision_tree};

const char* to_string(ClassifierKind kind);  // "knn" | "svm_linear" | "svm_rbf" | "tree"
std::optional<ClassifierKind> classifier_from_string(std::string_view name);

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::knn;
    int knn_k = 2;
    double svm_c = 1.0;
    double svm_gamma = 0.0;  // <= 0 resolves to 1 / (num_features * variance)
    double svm_tolerance = 1e-3;
    int tree_min_split = 10;
    int tree_min_leaf = 5;
    int tree_max_depth = 0;  // 0 = unlimited
    std::optional<bool> standardize;  // default: on except for the tree
    std::uint64_t seed = 0;

    bool standardize_effective() const {
        return standardize.value_or(kind != ClassifierKind::decision_tree);
    }
};

// Per-feature affine transform fit on training data: (x - mean) / scale,
// scale being the population standard deviation (1 where it is zero).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    bool active() const { return !mean.empty(); }
    Matrix apply(const Matrix& x) const;
    void apply_row(std::span<const double> in, double* out) const;
};

// SMO internals captured for property checks when requested at train time.
struct SvmPairDiagnostics {
    int class_a = 0;
    int class_b = 0;
    std::vector<double> alphas;
    std::vector<std::int8_t> labels;  // +1 for class_a, -1 for class_b
    std::vector<double> objective_trace;  // dual objective after each outer pass
    double max_kkt_violation = 0.0;
    bool kkt_ok = false;
};

struct TrainDiagnostics {
    std::vector<SvmPairDiagnostics> svm_pairs;
};

namespace detail {

struct KnnState {
    int k = 2;
    Matrix x;
    std::vector<int> y;
};

struct SvmPair {
    int class_a = 0;
    int class_b = 0;
    Matrix support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i per support vector
    double bias = 0.0;
};

struct SvmState {
    bool rbf = false;
    double gamma = 0.0;
    std::vector<int> classes;
    std::vector<SvmPair> pairs;
};

// feature < 0 marks a leaf carrying leaf_class.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int leaf_class = 0;
};

struct TreeState {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

}  // namespace detail

// Immutable fitted classifier. Predictions are pure functions of the model.
class TrainedModel {
public:
    ClassifierKind kind() const { return kind_; }
    std::size_t feature_count() const { return feature_count_; }

    int predict(std::span<const double> features) const;
    std::vector<int> predict_all(const Matrix& x) const;

    std::string to_json() const;
    static TrainedModel from_json(std::string_view text);

private:
    friend TrainedModel train(const ClassifierConfig&, const Matrix&,
                              const std::vector<int>&, TrainDiagnostics*);

    ClassifierKind kind_ = ClassifierKind::knn;
    std::size_t feature_count_ = 0;
    Standardizer standardizer_;
    std::variant<detail::KnnState, detail::SvmState, detail::TreeState> state_;
};

// Errors on empty data, a single class, fewer than 2 examples in any class,
// or non-finite features. Deterministic under (config, data).
TrainedModel train(const ClassifierConfig& config, const Matrix& x,
                   const std::vector<int>& y, TrainDiagnostics* diagnostics = nullptr);

}  // namespace opmode
