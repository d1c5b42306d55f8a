#include "opmode/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "opmode/errors.hpp"

namespace opmode {

const char* to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::knn: return "knn";
        case ClassifierKind::svm_linear: return "svm_linear";
        case ClassifierKind::svm_rbf: return "svm_rbf";
        case ClassifierKind::decision_tree: return "tree";
    }
    return "?";
}

std::optional<ClassifierKind> classifier_from_string(std::string_view name) {
    if (name == "knn") return ClassifierKind::knn;
    if (name == "svm_linear" || name == "svm-l") return ClassifierKind::svm_linear;
    if (name == "svm_rbf" || name == "svm-r") return ClassifierKind::svm_rbf;
    if (name == "tree" || name == "decision_tree") return ClassifierKind::decision_tree;
    return std::nullopt;
}

// --- standardization --------------------------------------------------

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.scale.assign(x.cols, 1.0);
    if (x.rows == 0) return s;
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            s.mean[c] += x.at(r, c);
        }
    }
    for (double& m : s.mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            const double d = x.at(r, c) - s.mean[c];
            var[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < x.cols; ++c) {
        const double sd = std::sqrt(var[c] / static_cast<double>(x.rows));
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (!active()) return x;
    Matrix out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
        apply_row(x.row(r), out.row_ptr(r));
    }
    return out;
}

void Standardizer::apply_row(std::span<const double> in, double* out) const {
    if (!active()) {
        std::copy(in.begin(), in.end(), out);
        return;
    }
    for (std::size_t c = 0; c < in.size(); ++c) {
        out[c] = (in[c] - mean[c]) / scale[c];
    }
}

// --- kernels ----------------------------------------------------------

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double kernel_value(bool rbf, double gamma, std::span<const double> a,
                    std::span<const double> b) {
    return rbf ? std::exp(-gamma * squared_distance(a, b)) : dot(a, b);
}

// Population variance over every entry of the matrix; the "scale" gamma rule.
double matrix_variance(const Matrix& x) {
    const std::size_t n = x.data.size();
    if (n == 0) return 0.0;
    double mean = std::accumulate(x.data.begin(), x.data.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x.data) {
        const double d = v - mean;
        var += d * d;
    }
    return var / static_cast<double>(n);
}

double resolve_gamma(const ClassifierConfig& config, const Matrix& x) {
    if (config.svm_gamma > 0.0) return config.svm_gamma;
    const double var = matrix_variance(x);
    if (var <= 0.0 || x.cols == 0) return 1.0;
    return 1.0 / (static_cast<double>(x.cols) * var);
}

// --- SMO binary solver ------------------------------------------------

// Platt-style SMO over one binary subproblem. Kernel values are cached as a
// full matrix when it fits; the solver is deterministic under its seed.
class SmoSolver {
public:
    SmoSolver(const Matrix& x, const std::vector<std::int8_t>& y, double c, double tol,
              bool rbf, double gamma, std::uint64_t seed)
        : x_(x), y_(y), n_(x.rows), c_(c), tol_(tol), rbf_(rbf), gamma_(gamma),
          alpha_(n_, 0.0), error_(n_), rng_(seed) {
        const std::size_t cache_bytes = n_ * n_ * sizeof(double);
        if (cache_bytes <= kCacheLimitBytes) {
            cache_.assign(n_ * n_, 0.0);
            for (std::size_t i = 0; i < n_; ++i) {
                cache_[i * n_ + i] = rbf_ ? 1.0 : dot(x_.row(i), x_.row(i));
                for (std::size_t j = 0; j < i; ++j) {
                    const double v = kernel_value(rbf_, gamma_, x_.row(i), x_.row(j));
                    cache_[i * n_ + j] = v;
                    cache_[j * n_ + i] = v;
                }
            }
        }
        for (std::size_t i = 0; i < n_; ++i) {
            error_[i] = -static_cast<double>(y_[i]);  // u = 0 at alpha = 0
        }
    }

    void solve(std::vector<double>* objective_trace) {
        bool examine_all = true;
        std::size_t changed = 0;
        std::size_t passes = 0;
        converged_ = true;
        while (changed > 0 || examine_all) {
            changed = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
            } else {
                for (std::size_t i = 0; i < n_; ++i) {
                    if (alpha_[i] > 0.0 && alpha_[i] < c_) changed += examine(i);
                }
            }
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
            if (objective_trace) objective_trace->push_back(objective());
            if (++passes > kMaxPasses) {
                converged_ = false;
                break;
            }
        }
    }

    const std::vector<double>& alphas() const { return alpha_; }
    double bias() const { return bias_; }
    bool converged() const { return converged_; }

    // u_i recomputed exactly from the alphas, not the incremental cache.
    double decision(std::size_t i) const {
        double u = bias_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (alpha_[j] > 0.0) {
                u += alpha_[j] * static_cast<double>(y_[j]) * kernel(j, i);
            }
        }
        return u;
    }

    double objective() const {
        double sum = 0.0;
        double quad = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] <= 0.0) continue;
            sum += alpha_[i];
            for (std::size_t j = 0; j < n_; ++j) {
                if (alpha_[j] <= 0.0) continue;
                quad += alpha_[i] * alpha_[j] * static_cast<double>(y_[i]) *
                        static_cast<double>(y_[j]) * kernel(i, j);
            }
        }
        return sum - 0.5 * quad;
    }

private:
    static constexpr std::size_t kCacheLimitBytes = std::size_t{1} << 30;
    static constexpr std::size_t kMaxPasses = 10000;
    static constexpr double kEps = 1e-12;

    double kernel(std::size_t i, std::size_t j) const {
        if (!cache_.empty()) return cache_[i * n_ + j];
        return kernel_value(rbf_, gamma_, x_.row(i), x_.row(j));
    }

    std::size_t examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alpha_[i2];
        const double e2 = error_[i2];
        const double r2 = e2 * y2;
        if (!((r2 < -tol_ && a2 < c_) || (r2 > tol_ && a2 > 0.0))) return 0;

        // heuristic 1: maximize |E1 - E2| over non-bound points
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] > 0.0 && alpha_[i] < c_) {
                const double gap = std::abs(error_[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;

        // heuristic 2: all non-bound points from a random start
        const std::size_t start1 = rng_() % n_;
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i = (start1 + k) % n_;
            if (alpha_[i] > 0.0 && alpha_[i] < c_ && take_step(i, i2)) return 1;
        }

        // heuristic 3: everything from a random start
        const std::size_t start2 = rng_() % n_;
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i = (start2 + k) % n_;
            if (take_step(i, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = error_[i1], e2 = error_[i2];
        const double s = y1 * y2;

        double low, high;
        if (y1 != y2) {
            low = std::max(0.0, a2 - a1);
            high = std::min(c_, c_ + a2 - a1);
        } else {
            low = std::max(0.0, a1 + a2 - c_);
            high = std::min(c_, a1 + a2);
        }
        if (high - low < kEps) return false;

        const double k11 = kernel(i1, i1);
        const double k12 = kernel(i1, i2);
        const double k22 = kernel(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, low, high);
        } else {
            // dual objective restricted to the constraint line, old alphas
            const double gamma_sum = a1 + s * a2;
            const double v1 = e1 + y1 - bias_ - y1 * a1 * k11 - y2 * a2 * k12;
            const double v2 = e2 + y2 - bias_ - y1 * a1 * k12 - y2 * a2 * k22;
            const auto line_objective = [&](double t) {
                const double t1 = gamma_sum - s * t;
                return t1 + t - 0.5 * k11 * t1 * t1 - 0.5 * k22 * t * t -
                       s * k12 * t1 * t - y1 * t1 * v1 - y2 * t * v2;
            };
            const double obj_low = line_objective(low);
            const double obj_high = line_objective(high);
            if (obj_low > obj_high + kEps) {
                a2_new = low;
            } else if (obj_low < obj_high - kEps) {
                a2_new = high;
            } else {
                a2_new = a2;
            }
        }
        if (std::abs(a2_new - a2) < 1e-8 * (a2_new + a2 + 1e-8)) return false;

        const double a1_new = a1 + s * (a2 - a2_new);
        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);

        const double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
        double bias_new;
        if (a1_new > 0.0 && a1_new < c_) {
            bias_new = b1;
        } else if (a2_new > 0.0 && a2_new < c_) {
            bias_new = b2;
        } else {
            bias_new = 0.5 * (b1 + b2);
        }
        const double db = bias_new - bias_;

        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        bias_ = bias_new;
        for (std::size_t i = 0; i < n_; ++i) {
            error_[i] += d1 * kernel(i1, i) + d2 * kernel(i2, i) + db;
        }
        return true;
    }

    const Matrix& x_;
    const std::vector<std::int8_t>& y_;
    std::size_t n_;
    double c_, tol_;
    bool rbf_;
    double gamma_;
    std::vector<double> alpha_;
    std::vector<double> error_;  // u_i - y_i, maintained incrementally
    std::vector<double> cache_;
    double bias_ = 0.0;
    bool converged_ = true;
    std::mt19937_64 rng_;
};

detail::SvmState train_svm(const ClassifierConfig& config, const Matrix& x,
                           const std::vector<int>& y, const std::vector<int>& classes,
                           TrainDiagnostics* diagnostics) {
    detail::SvmState state;
    state.rbf = config.kind == ClassifierKind::svm_rbf;
    state.gamma = resolve_gamma(config, x);
    state.classes = classes;

    for (std::size_t ai = 0; ai < classes.size(); ++ai) {
        for (std::size_t bi = ai + 1; bi < classes.size(); ++bi) {
            const int class_a = classes[ai];
            const int class_b = classes[bi];

            std::vector<std::size_t> rows;
            for (std::size_t r = 0; r < x.rows; ++r) {
                if (y[r] == class_a || y[r] == class_b) rows.push_back(r);
            }
            Matrix sub(rows.size(), x.cols);
            std::vector<std::int8_t> labels(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto src = x.row(rows[r]);
                std::copy(src.begin(), src.end(), sub.row_ptr(r));
                labels[r] = y[rows[r]] == class_a ? 1 : -1;
            }

            std::seed_seq seq{config.seed, static_cast<std::uint64_t>(class_a),
                              static_cast<std::uint64_t>(class_b)};
            std::mt19937_64 seeder(seq);
            SmoSolver solver(sub, labels, config.svm_c, config.svm_tolerance, state.rbf,
                             state.gamma, seeder());

            SvmPairDiagnostics* pair_diag = nullptr;
            if (diagnostics) {
                diagnostics->svm_pairs.emplace_back();
                pair_diag = &diagnostics->svm_pairs.back();
                pair_diag->class_a = class_a;
                pair_diag->class_b = class_b;
            }
            solver.solve(pair_diag ? &pair_diag->objective_trace : nullptr);

            detail::SvmPair pair;
            pair.class_a = class_a;
            pair.class_b = class_b;
            pair.bias = solver.bias();
            const auto& alphas = solver.alphas();
            std::vector<std::size_t> sv_rows;
            for (std::size_t r = 0; r < alphas.size(); ++r) {
                if (alphas[r] > 1e-10) sv_rows.push_back(r);
            }
            pair.support_vectors = Matrix(sv_rows.size(), x.cols);
            for (std::size_t r = 0; r < sv_rows.size(); ++r) {
                const auto src = sub.row(sv_rows[r]);
                std::copy(src.begin(), src.end(), pair.support_vectors.row_ptr(r));
                pair.coefficients.push_back(alphas[sv_rows[r]] *
                                            static_cast<double>(labels[sv_rows[r]]));
            }

            if (pair_diag) {
                pair_diag->alphas = alphas;
                pair_diag->labels = labels;
                double worst = 0.0;
                for (std::size_t r = 0; r < alphas.size(); ++r) {
                    const double margin =
                        static_cast<double>(labels[r]) * solver.decision(r);
                    double violation = 0.0;
                    if (alphas[r] <= 1e-10) {
                        violation = std::max(0.0, 1.0 - margin);
                    } else if (alphas[r] >= config.svm_c - 1e-10) {
                        violation = std::max(0.0, margin - 1.0);
                    } else {
                        violation = std::abs(margin - 1.0);
                    }
                    worst = std::max(worst, violation);
                }
                pair_diag->max_kkt_violation = worst;
                pair_diag->kkt_ok = solver.converged() && worst <= config.svm_tolerance + 1e-9;
            }

            state.pairs.push_back(std::move(pair));
        }
    }
    return state;
}

double svm_pair_decision(const detail::SvmPair& pair, bool rbf, double gamma,
                         std::span<const double> features) {
    double u = pair.bias;
    for (std::size_t r = 0; r < pair.support_vectors.rows; ++r) {
        u += pair.coefficients[r] *
             kernel_value(rbf, gamma, pair.support_vectors.row(r), features);
    }
    return u;
}

// --- decision tree ----------------------------------------------------

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum += p * p;
    }
    return 1.0 - sum;
}

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y;               // values are class ids 0..k-1 here
    const ClassifierConfig& config;
    std::size_t n_classes;
    std::vector<detail::TreeNode> nodes;

    int majority(const std::vector<std::size_t>& counts) const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < counts.size(); ++c) {
            if (counts[c] > counts[best]) best = c;
        }
        return static_cast<int>(best);
    }

    std::int32_t build(std::vector<std::size_t>& samples, int depth) {
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t s : samples) ++counts[static_cast<std::size_t>(y[s])];
        const double impurity = gini(counts, samples.size());

        const auto leaf = [&] {
            detail::TreeNode node;
            node.leaf_class = majority(counts);
            nodes.push_back(node);
            return static_cast<std::int32_t>(nodes.size() - 1);
        };

        if (impurity == 0.0 ||
            samples.size() < static_cast<std::size_t>(config.tree_min_split) ||
            (config.tree_max_depth > 0 && depth >= config.tree_max_depth)) {
            return leaf();
        }

        const std::size_t min_leaf = static_cast<std::size_t>(config.tree_min_leaf);
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12;  // strict decrease required

        std::vector<std::size_t> order(samples);
        for (std::size_t f = 0; f < x.cols; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x.at(a, f) < x.at(b, f);
            });
            std::vector<std::size_t> left_counts(n_classes, 0);
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                ++left_counts[static_cast<std::size_t>(y[order[i]])];
                const double v0 = x.at(order[i], f);
                const double v1 = x.at(order[i + 1], f);
                if (v0 == v1) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = order.size() - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                std::vector<std::size_t> right_counts(n_classes, 0);
                for (std::size_t c = 0; c < n_classes; ++c) {
                    right_counts[c] = counts[c] - left_counts[c];
                }
                const double weighted =
                    (static_cast<double>(nl) * gini(left_counts, nl) +
                     static_cast<double>(nr) * gini(right_counts, nr)) /
                    static_cast<double>(order.size());
                const double gain = impurity - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = v0 + 0.5 * (v1 - v0);
                }
            }
        }

        if (best_feature < 0) return leaf();

        std::vector<std::size_t> left, right;
        for (std::size_t s : samples) {
            (x.at(s, static_cast<std::size_t>(best_feature)) <= best_threshold ? left
                                                                               : right)
                .push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();

        detail::TreeNode node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes.push_back(node);
        const auto index = static_cast<std::int32_t>(nodes.size() - 1);
        const auto left_index = build(left, depth + 1);
        const auto right_index = build(right, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left_index;
        nodes[static_cast<std::size_t>(index)].right = right_index;
        return index;
    }
};

detail::TreeState train_tree(const ClassifierConfig& config, const Matrix& x,
                             const std::vector<int>& y, const std::vector<int>& classes) {
    // class ids remapped to 0..k-1 for counting, mapped back at the leaves
    std::vector<int> dense(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        dense[i] = static_cast<int>(
            std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
    }
    TreeBuilder builder{x, dense, config, classes.size(), {}};
    std::vector<std::size_t> samples(x.rows);
    std::iota(samples.begin(), samples.end(), 0);
    const auto root = builder.build(samples, 0);
    (void)root;  // root lands at node 0 by construction

    detail::TreeState state;
    state.nodes = std::move(builder.nodes);
    for (auto& node : state.nodes) {
        if (node.feature < 0) node.leaf_class = classes[static_cast<std::size_t>(node.leaf_class)];
    }
    return state;
}

}  // namespace

// --- training ---------------------------------------------------------

TrainedModel train(const ClassifierConfig& config, const Matrix& x,
                   const std::vector<int>& y, TrainDiagnostics* diagnostics) {
    if (x.rows == 0 || x.cols == 0) {
        throw InvalidInput("training data is empty");
    }
    if (y.size() != x.rows) {
        throw InvalidInput("label count does not match row count");
    }
    for (double v : x.data) {
        if (!std::isfinite(v)) {
            throw InvalidInput("non-finite feature value in training data");
        }
    }
    std::map<int, std::size_t> class_counts;
    for (int label : y) ++class_counts[label];
    if (class_counts.size() < 2) {
        throw InvalidInput("training data has a single class");
    }
    for (const auto& [label, count] : class_counts) {
        if (count < 2) {
            throw InvalidInput("class " + std::to_string(label) +
                               " has fewer than 2 examples");
        }
    }
    if (config.knn_k < 1) throw InvalidInput("k must be >= 1");
    if (config.svm_c <= 0.0) throw InvalidInput("C must be positive");

    std::vector<int> classes;
    for (const auto& [label, count] : class_counts) classes.push_back(label);

    TrainedModel model;
    model.kind_ = config.kind;
    model.feature_count_ = x.cols;
    if (config.standardize_effective()) {
        model.standardizer_ = Standardizer::fit(x);
    }
    const Matrix xs = model.standardizer_.active() ? model.standardizer_.apply(x) : x;

    switch (config.kind) {
        case ClassifierKind::knn: {
            detail::KnnState state;
            state.k = config.knn_k;
            state.x = xs;
            state.y = y;
            model.state_ = std::move(state);
            break;
        }
        case ClassifierKind::svm_linear:
        case ClassifierKind::svm_rbf:
            model.state_ = train_svm(config, xs, y, classes, diagnostics);
            break;
        case ClassifierKind::decision_tree:
            model.state_ = train_tree(config, xs, y, classes);
            break;
    }
    return model;
}

// --- prediction -------------------------------------------------------

namespace {

int predict_knn(const detail::KnnState& state, std::span<const double> features) {
    const std::size_t n = state.x.rows;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(state.k), n);

    // neighbor order: squared distance, then training index
    std::vector<std::pair<double, std::size_t>> near(n);
    for (std::size_t i = 0; i < n; ++i) {
        near[i] = {squared_distance(state.x.row(i), features), i};
    }
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k),
                      near.end());

    std::map<int, std::size_t> votes;
    for (std::size_t i = 0; i < k; ++i) votes[state.y[near[i].second]]++;
    std::size_t best = 0;
    for (const auto& [label, count] : votes) best = std::max(best, count);

    // tie: the tied class seen earliest in neighbor order wins, which for
    // k = 2 is the nearest neighbor's class
    for (std::size_t i = 0; i < k; ++i) {
        const int label = state.y[near[i].second];
        if (votes[label] == best) return label;
    }
    return state.y[near[0].second];
}

int predict_svm(const detail::SvmState& state, std::span<const double> features) {
    std::map<int, int> votes;
    std::map<int, double> scores;
    for (int c : state.classes) {
        votes[c] = 0;
        scores[c] = 0.0;
    }
    for (const auto& pair : state.pairs) {
        const double u = svm_pair_decision(pair, state.rbf, state.gamma, features);
        ++votes[u >= 0.0 ? pair.class_a : pair.class_b];
        scores[pair.class_a] += u;
        scores[pair.class_b] -= u;
    }
    int winner = state.classes.front();
    for (int c : state.classes) {
        if (votes[c] > votes[winner] ||
            (votes[c] == votes[winner] && scores[c] > scores[winner])) {
            winner = c;
        }
    }
    return winner;
}

int predict_tree(const detail::TreeState& state, std::span<const double> features) {
    std::size_t node = 0;
    for (;;) {
        const auto& current = state.nodes[node];
        if (current.feature < 0) return current.leaf_class;
        node = static_cast<std::size_t>(
            features[static_cast<std::size_t>(current.feature)] <= current.threshold
                ? current.left
                : current.right);
    }
}

}  // namespace

int TrainedModel::predict(std::span<const double> features) const {
    if (features.size() != feature_count_) {
        throw InvalidInput("feature vector has length " + std::to_string(features.size()) +
                           ", model expects " + std::to_string(feature_count_));
    }
    std::vector<double> buffer(features.size());
    standardizer_.apply_row(features, buffer.data());
    const std::span<const double> row(buffer);

    return std::visit(
        [&](const auto& state) -> int {
            using T = std::decay_t<decltype(state)>;
            if constexpr (std::is_same_v<T, detail::KnnState>) {
                return predict_knn(state, row);
            } else if constexpr (std::is_same_v<T, detail::SvmState>) {
                return predict_svm(state, row);
            } else {
                return predict_tree(state, row);
            }
        },
        state_);
}

std::vector<int> TrainedModel::predict_all(const Matrix& x) const {
    std::vector<int> out;
    out.reserve(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        out.push_back(predict(x.row(r)));
    }
    return out;
}

// --- serialization ----------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) {
        throw InvalidInput("matrix shape does not match data length");
    }
    return m;
}

}  // namespace

std::string TrainedModel::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = to_string(kind_);
    j["features"] = feature_count_;
    j["standardizer"] = {{"mean", standardizer_.mean}, {"scale", standardizer_.scale}};

    std::visit(
        [&](const auto& state) {
            using T = std::decay_t<decltype(state)>;
            if constexpr (std::is_same_v<T, detail::KnnState>) {
                j["knn"] = {{"k", state.k}, {"x", matrix_to_json(state.x)}, {"y", state.y}};
            } else if constexpr (std::is_same_v<T, detail::SvmState>) {
                nlohmann::json pairs = nlohmann::json::array();
                for (const auto& pair : state.pairs) {
                    pairs.push_back({{"a", pair.class_a},
                                     {"b", pair.class_b},
                                     {"sv", matrix_to_json(pair.support_vectors)},
                                     {"coef", pair.coefficients},
                                     {"bias", pair.bias}});
                }
                j["svm"] = {{"rbf", state.rbf},
                            {"gamma", state.gamma},
                            {"classes", state.classes},
                            {"pairs", std::move(pairs)}};
            } else {
                nlohmann::json nodes = nlohmann::json::array();
                for (const auto& node : state.nodes) {
                    nodes.push_back({{"f", node.feature},
                                     {"t", node.threshold},
                                     {"l", node.left},
                                     {"r", node.right},
                                     {"c", node.leaf_class}});
                }
                j["tree"] = {{"nodes", std::move(nodes)}};
            }
        },
        state_);
    return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad model JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) {
            throw InvalidInput("unsupported model version");
        }
        const auto kind = classifier_from_string(j.at("kind").get<std::string>());
        if (!kind) throw InvalidInput("unknown model kind");

        TrainedModel model;
        model.kind_ = *kind;
        model.feature_count_ = j.at("features").get<std::size_t>();
        model.standardizer_.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
        model.standardizer_.scale = j.at("standardizer").at("scale").get<std::vector<double>>();

        switch (*kind) {
            case ClassifierKind::knn: {
                detail::KnnState state;
                state.k = j.at("knn").at("k").get<int>();
                state.x = matrix_from_json(j.at("knn").at("x"));
                state.y = j.at("knn").at("y").get<std::vector<int>>();
                model.state_ = std::move(state);
                break;
            }
            case ClassifierKind::svm_linear:
            case ClassifierKind::svm_rbf: {
                detail::SvmState state;
                const auto& svm = j.at("svm");
                state.rbf = svm.at("rbf").get<bool>();
                state.gamma = svm.at("gamma").get<double>();
                state.classes = svm.at("classes").get<std::vector<int>>();
                for (const auto& pj : svm.at("pairs")) {
                    detail::SvmPair pair;
                    pair.class_a = pj.at("a").get<int>();
                    pair.class_b = pj.at("b").get<int>();
                    pair.support_vectors = matrix_from_json(pj.at("sv"));
                    pair.coefficients = pj.at("coef").get<std::vector<double>>();
                    pair.bias = pj.at("bias").get<double>();
                    state.pairs.push_back(std::move(pair));
                }
                model.state_ = std::move(state);
                break;
            }
            case ClassifierKind::decision_tree: {
                detail::TreeState state;
                for (const auto& nj : j.at("tree").at("nodes")) {
                    detail::TreeNode node;
                    node.feature = nj.at("f").get<int>();
                    node.threshold = nj.at("t").get<double>();
                    node.left = nj.at("l").get<std::int32_t>();
                    node.right = nj.at("r").get<std::int32_t>();
                    node.leaf_class = nj.at("c").get<int>();
                    state.nodes.push_back(node);
                }
                model.state_ = std::move(state);
                break;
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad model JSON: ") + e.what());
    }
}

}  // namespace opmode
