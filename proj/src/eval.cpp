#include "opmode/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "opmode/parallel.hpp"
#include "opmode/util.hpp"

namespace opmode {

namespace {

// Rejection-sampled uniform draw in [0, n); keeps shuffles identical across
// standard library implementations.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit || rem == n - 1) return v % n;
    }
}

void fisher_yates(std::vector<std::size_t>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace

FoldPlan make_folds(const LabeledDataset& dataset, std::uint64_t seed) {
    std::map<Mode, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.vectors.size(); ++i) {
        by_class[dataset.vectors[i].label].push_back(i);
    }
    for (const auto& [mode, members] : by_class) {
        if (members.size() < kFoldCount) {
            throw InvalidInput("class " + std::string(to_string(mode)) + " has " +
                               std::to_string(members.size()) + " members, need at least " +
                               std::to_string(kFoldCount));
        }
    }

    FoldPlan plan;
    plan.seed = seed;
    std::array<std::size_t, kFoldCount> load{};
    std::mt19937_64 rng(seed);

    for (auto& [mode, members] : by_class) {
        fisher_yates(members, rng);
        // cycle over folds ordered least-loaded-first so totals stay level
        std::array<std::size_t, kFoldCount> order{};
        for (std::size_t f = 0; f < kFoldCount; ++f) order[f] = f;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return load[a] < load[b]; });
        for (std::size_t j = 0; j < members.size(); ++j) {
            const std::size_t fold = order[j % kFoldCount];
            plan.folds[fold].push_back(dataset.vectors[members[j]].trajectory_id);
            ++load[fold];
        }
    }
    for (auto& fold : plan.folds) {
        std::sort(fold.begin(), fold.end());
    }
    return plan;
}

std::size_t Confusion::total() const {
    std::size_t sum = 0;
    for (std::size_t c : counts) sum += c;
    return sum;
}

FoldMetrics fold_metrics(const Confusion& confusion) {
    const std::size_t k = confusion.classes.size();
    FoldMetrics metrics;
    metrics.precision.resize(k, 0.0);
    metrics.sensitivity.resize(k, 0.0);
    metrics.f1.resize(k, 0.0);

    std::size_t trace = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t tp = confusion.at(i, i);
        trace += tp;
        std::size_t fp = 0, fn = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            fp += confusion.at(j, i);
            fn += confusion.at(i, j);
        }
        const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double s = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        metrics.precision[i] = p;
        metrics.sensitivity[i] = s;
        metrics.f1[i] = p + s > 0.0 ? 2.0 * p * s / (p + s) : 0.0;
    }
    const std::size_t total = confusion.total();
    metrics.accuracy = total > 0 ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;
    return metrics;
}

MetricStats t_interval(std::span<const double> values) {
    MetricStats stats;
    const std::size_t n = values.size();
    if (n == 0) return stats;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    stats.mean = mean;
    if (n < 2) return stats;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    stats.half_width = kTQuantile * sd / std::sqrt(static_cast<double>(n));
    return stats;
}

MetricReport evaluate(const LabeledDataset& dataset, const ClassifierConfig& config,
                      const FoldPlan& plan) {
    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < dataset.vectors.size(); ++i) {
        index_of.emplace(dataset.vectors[i].trajectory_id, i);
    }

    std::vector<int> fold_of(dataset.vectors.size(), -1);
    std::size_t covered = 0;
    for (std::size_t f = 0; f < kFoldCount; ++f) {
        for (const std::string& id : plan.folds[f]) {
            const auto it = index_of.find(id);
            if (it == index_of.end() || fold_of[it->second] != -1) {
                throw InvalidInput("fold plan does not partition the dataset");
            }
            fold_of[it->second] = static_cast<int>(f);
            ++covered;
        }
    }
    if (covered != dataset.vectors.size()) {
        throw InvalidInput("fold plan does not partition the dataset");
    }

    const std::vector<Mode> classes = dataset.classes();
    const auto class_index = [&](Mode mode) {
        return static_cast<std::size_t>(
            std::find(classes.begin(), classes.end(), mode) - classes.begin());
    };
    const std::size_t cols = dataset.spec.vector_length();

    std::array<FoldMetrics, kFoldCount> per_fold;
    for (std::size_t f = 0; f < kFoldCount; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < dataset.vectors.size(); ++i) {
            (fold_of[i] == static_cast<int>(f) ? test_rows : train_rows).push_back(i);
        }

        std::set<Mode> train_classes;
        for (std::size_t i : train_rows) train_classes.insert(dataset.vectors[i].label);
        if (train_classes.size() != classes.size()) {
            throw InvalidInput("training split of fold " + std::to_string(f) +
                               " lacks a class");
        }

        Matrix train_x(train_rows.size(), cols);
        std::vector<int> train_y(train_rows.size());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            const auto& vec = dataset.vectors[train_rows[r]];
            std::copy(vec.values.begin(), vec.values.end(), train_x.row_ptr(r));
            train_y[r] = static_cast<int>(vec.label);
        }

        const TrainedModel model = train(config, train_x, train_y);

        Confusion confusion(classes);
        for (std::size_t i : test_rows) {
            const auto& vec = dataset.vectors[i];
            const int predicted = model.predict(vec.values);
            confusion.at(class_index(vec.label), class_index(static_cast<Mode>(predicted)))++;
        }
        per_fold[f] = fold_metrics(confusion);
    }

    MetricReport report;
    report.classifier = config.kind;
    report.dimension = dataset.spec.params().dimension();
    report.delay = dataset.spec.params().delay();
    report.quantifier_label = dataset.spec.quantifier_label();
    report.signal_label = dataset.spec.signal_label();
    report.classes = classes;
    report.seed = plan.seed;

    std::array<double, kFoldCount> values;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        ClassMetrics cm;
        cm.mode = classes[c];
        for (std::size_t f = 0; f < kFoldCount; ++f) values[f] = per_fold[f].precision[c];
        cm.precision = t_interval(values);
        for (std::size_t f = 0; f < kFoldCount; ++f) values[f] = per_fold[f].sensitivity[c];
        cm.sensitivity = t_interval(values);
        for (std::size_t f = 0; f < kFoldCount; ++f) values[f] = per_fold[f].f1[c];
        cm.f1 = t_interval(values);
        report.per_class.push_back(cm);
    }
    for (std::size_t f = 0; f < kFoldCount; ++f) values[f] = per_fold[f].accuracy;
    report.accuracy = t_interval(values);
    return report;
}

// --- sweep ------------------------------------------------------------

std::vector<SweepCell> expand_grid(const SweepGrid& grid) {
    if (grid.dimensions.empty() || grid.delays.empty() || grid.quantifier_sets.empty() ||
        grid.signal_sets.empty() || grid.classifiers.empty() || grid.class_subsets.empty()) {
        throw InvalidInput("sweep grid has an empty axis");
    }
    std::vector<SweepCell> cells;
    for (int dimension : grid.dimensions) {
        for (int delay : grid.delays) {
            for (const auto& quantifiers : grid.quantifier_sets) {
                for (const auto& signals : grid.signal_sets) {
                    for (ClassifierKind classifier : grid.classifiers) {
                        for (const auto& subset : grid.class_subsets) {
                            cells.push_back(SweepCell{dimension, delay, quantifiers,
                                                      signals, classifier, subset});
                        }
                    }
                }
            }
        }
    }
    return cells;
}

std::vector<SweepResult> sweep(
    const SweepGrid& grid, const std::map<std::pair<int, int>, FeatureMatrix>& matrices,
    int jobs, const std::function<void(const SweepResult&)>& progress) {
    const std::vector<SweepCell> cells = expand_grid(grid);
    std::vector<SweepResult> results(cells.size());
    std::mutex progress_mutex;

    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const SweepCell& cell = cells[i];
        const auto it = matrices.find({cell.dimension, cell.delay});
        if (it == matrices.end()) {
            throw InvalidInput("no feature matrix for D=" + std::to_string(cell.dimension) +
                               " tau=" + std::to_string(cell.delay));
        }
        const FeatureSpec spec(EmbeddingParams(cell.dimension, cell.delay),
                               cell.quantifiers, cell.signals);
        LabeledDataset dataset = select_features(it->second, spec);
        if (!cell.class_subset.empty()) {
            std::erase_if(dataset.vectors, [&](const FeatureVector& vec) {
                return std::find(cell.class_subset.begin(), cell.class_subset.end(),
                                 vec.label) == cell.class_subset.end();
            });
        }

        ClassifierConfig config = grid.defaults;
        config.kind = cell.classifier;
        config.seed = grid.seed;

        const FoldPlan plan = make_folds(dataset, grid.seed);
        SweepResult result;
        result.cell = cell;
        result.dataset_size = dataset.vectors.size();
        result.report = evaluate(dataset, config, plan);
        results[i] = std::move(result);

        if (progress) {
            const std::lock_guard<std::mutex> lock(progress_mutex);
            progress(results[i]);
        }
    });
    return results;
}

// --- results files ----------------------------------------------------

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string class_list_label(const std::vector<Mode>& classes) {
    std::string out;
    for (Mode mode : classes) {
        if (!out.empty()) out += '+';
        out += to_string(mode);
    }
    return out;
}

}  // namespace

void write_results_csv(const std::vector<SweepResult>& results, std::ostream& out) {
    out << "D,tau,features,signals,classifier,classes,class,precision,sensitivity,f1,"
           "accuracy,ci_half_width,seed\n";
    for (const SweepResult& result : results) {
        const MetricReport& report = result.report;
        const std::string prefix = std::to_string(report.dimension) + ',' +
                                   std::to_string(report.delay) + ',' +
                                   report.quantifier_label + ',' + report.signal_label +
                                   ',' + to_string(report.classifier) + ',' +
                                   class_list_label(report.classes) + ',';
        for (const ClassMetrics& cm : report.per_class) {
            out << prefix << to_string(cm.mode) << ',' << fixed6(cm.precision.mean) << ','
                << fixed6(cm.sensitivity.mean) << ',' << fixed6(cm.f1.mean) << ",,"
                << fixed6(cm.f1.half_width) << ',' << report.seed << '\n';
        }
        out << prefix << "__overall__,,,," << fixed6(report.accuracy.mean) << ','
            << fixed6(report.accuracy.half_width) << ',' << report.seed << '\n';
    }
}

std::string results_json(const std::vector<SweepResult>& results) {
    const auto stats_json = [](const MetricStats& stats) {
        return nlohmann::json{{"mean", stats.mean}, {"half_width", stats.half_width}};
    };
    nlohmann::json out = nlohmann::json::array();
    for (const SweepResult& result : results) {
        const MetricReport& report = result.report;
        nlohmann::json cell;
        cell["D"] = report.dimension;
        cell["tau"] = report.delay;
        cell["features"] = report.quantifier_label;
        cell["signals"] = report.signal_label;
        cell["classifier"] = to_string(report.classifier);
        cell["classes"] = class_list_label(report.classes);
        cell["n"] = result.dataset_size;
        cell["seed"] = report.seed;
        cell["accuracy"] = stats_json(report.accuracy);
        nlohmann::json per_class = nlohmann::json::array();
        for (const ClassMetrics& cm : report.per_class) {
            per_class.push_back({{"class", to_string(cm.mode)},
                                 {"precision", stats_json(cm.precision)},
                                 {"sensitivity", stats_json(cm.sensitivity)},
                                 {"f1", stats_json(cm.f1)}});
        }
        cell["per_class"] = std::move(per_class);
        out.push_back(std::move(cell));
    }
    return out.dump(2) + "\n";
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    LineCursor cursor{content};
    std::string_view line;

    if (!cursor.next(line)) {
        throw ParseError("empty results file", 1);
    }
    if (split_view(line, ',').size() != 13) {
        throw ParseError("bad results header", cursor.line_number);
    }

    const auto parse_optional = [&](std::string_view field,
                                    std::size_t line_number) -> std::optional<double> {
        if (field.empty()) return std::nullopt;
        double value;
        if (!parse_double_token(field, value)) {
            throw ParseError("malformed metric " + std::string(field), line_number);
        }
        return value;
    };

    std::vector<ResultRow> rows;
    while (cursor.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_view(line, ',');
        if (fields.size() != 13) {
            throw ParseError("expected 13 fields, got " + std::to_string(fields.size()),
                             cursor.line_number);
        }
        ResultRow row;
        double numeric;
        if (!parse_double_token(fields[0], numeric) || numeric < 2 || numeric > 7) {
            throw ParseError("bad D value", cursor.line_number);
        }
        row.dimension = static_cast<int>(numeric);
        if (!parse_double_token(fields[1], numeric) || numeric < 1) {
            throw ParseError("bad tau value", cursor.line_number);
        }
        row.delay = static_cast<int>(numeric);
        row.features = std::string(fields[2]);
        row.signals = std::string(fields[3]);
        row.classifier = std::string(fields[4]);
        row.classes = std::string(fields[5]);
        row.label = std::string(fields[6]);
        row.precision = parse_optional(fields[7], cursor.line_number);
        row.sensitivity = parse_optional(fields[8], cursor.line_number);
        row.f1 = parse_optional(fields[9], cursor.line_number);
        row.accuracy = parse_optional(fields[10], cursor.line_number);
        row.ci_half_width = parse_optional(fields[11], cursor.line_number);
        if (!parse_double_token(fields[12], numeric) || numeric < 0) {
            throw ParseError("bad seed value", cursor.line_number);
        }
        row.seed = static_cast<std::uint64_t>(numeric);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace opmode
