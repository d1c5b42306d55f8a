#include "opmode/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <tuple>

#include "opmode/util.hpp"

namespace opmode {

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<ResultRow> overall_rows(const std::vector<ResultRow>& rows) {
    std::vector<ResultRow> out;
    for (const ResultRow& row : rows) {
        if (row.label == "__overall__" && row.accuracy) out.push_back(row);
    }
    return out;
}

auto row_key(const ResultRow& row) {
    return std::tie(row.features, row.signals, row.classifier, row.classes,
                    row.dimension, row.delay);
}

}  // namespace

std::string accuracy_by_d_csv(const std::vector<ResultRow>& rows) {
    std::string out = "D,tau,features,signals,classifier,classes,accuracy,ci_half_width\n";
    std::vector<ResultRow> overall = overall_rows(rows);
    if (overall.empty()) return out;

    int min_delay = std::numeric_limits<int>::max();
    for (const ResultRow& row : overall) min_delay = std::min(min_delay, row.delay);
    std::erase_if(overall, [&](const ResultRow& row) { return row.delay != min_delay; });
    std::sort(overall.begin(), overall.end(),
              [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });

    for (const ResultRow& row : overall) {
        out += std::to_string(row.dimension) + ',' + std::to_string(row.delay) + ',' +
               row.features + ',' + row.signals + ',' + row.classifier + ',' + row.classes +
               ',' + fixed6(*row.accuracy) + ',' + fixed6(row.ci_half_width.value_or(0.0)) +
               '\n';
    }
    return out;
}

std::string accuracy_by_tau_csv(const std::vector<ResultRow>& rows) {
    std::string out = "tau,D,features,signals,classifier,classes,accuracy,ci_half_width\n";
    std::vector<ResultRow> overall = overall_rows(rows);
    if (overall.empty()) return out;

    int best_dimension = overall.front().dimension;
    double best_accuracy = -1.0;
    for (const ResultRow& row : overall) {
        if (*row.accuracy > best_accuracy ||
            (*row.accuracy == best_accuracy && row.dimension < best_dimension)) {
            best_accuracy = *row.accuracy;
            best_dimension = row.dimension;
        }
    }
    std::erase_if(overall,
                  [&](const ResultRow& row) { return row.dimension != best_dimension; });
    std::sort(overall.begin(), overall.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.features, a.signals, a.classifier, a.classes, a.delay) <
               std::tie(b.features, b.signals, b.classifier, b.classes, b.delay);
    });

    for (const ResultRow& row : overall) {
        out += std::to_string(row.delay) + ',' + std::to_string(row.dimension) + ',' +
               row.features + ',' + row.signals + ',' + row.classifier + ',' + row.classes +
               ',' + fixed6(*row.accuracy) + ',' + fixed6(row.ci_half_width.value_or(0.0)) +
               '\n';
    }
    return out;
}

std::string ce_plane_csv(const FeatureMatrix& matrix) {
    std::string out = "traj_id,mode,signal,H,C\n";
    const auto column = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(matrix.columns.begin(), matrix.columns.end(), name);
        return it == matrix.columns.end() ? -1 : it - matrix.columns.begin();
    };

    for (Signal signal : kAllSignals) {
        const std::string prefix = to_string(signal);
        const std::ptrdiff_t h = column(prefix + "_H");
        const std::ptrdiff_t c = column(prefix + "_C");
        if (h < 0 || c < 0) continue;
        for (const FeatureVector& row : matrix.rows) {
            out += row.trajectory_id + ',' + to_string(row.label) + ',' + prefix + ',' +
                   shortest_double(row.values[static_cast<std::size_t>(h)]) + ',' +
                   shortest_double(row.values[static_cast<std::size_t>(c)]) + '\n';
        }
    }
    return out;
}

}  // namespace opmode
