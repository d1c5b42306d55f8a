#include "opmode/transition_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace opmode {

TransitionGraph::TransitionGraph(std::vector<Edge> edges, EmbeddingParams params,
                                 std::size_t transition_count)
    : edges_(std::move(edges)), params_(params), transition_count_(transition_count) {
    if (transition_count_ == 0) {
        throw InvalidInput("transition graph needs at least one transition");
    }
    double sum = 0.0;
    const Edge* prev = nullptr;
    for (const Edge& e : edges_) {
        if (e.src >= params_.pattern_count() || e.dst >= params_.pattern_count()) {
            throw InvalidInput("edge endpoint out of pattern range");
        }
        if (!(e.weight > 0.0)) {
            throw InvalidInput("stored edge weights must be positive");
        }
        if (prev && !(prev->src < e.src || (prev->src == e.src && prev->dst < e.dst))) {
            throw InvalidInput("edges must be sorted by (src, dst) without duplicates");
        }
        sum += e.weight;
        prev = &e;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInput("edge weights sum to " + std::to_string(sum) + ", expected 1");
    }
}

double TransitionGraph::weight(std::uint16_t src, std::uint16_t dst) const noexcept {
    const auto it = std::lower_bound(
        edges_.begin(), edges_.end(), std::pair{src, dst}, [](const Edge& e, const std::pair<std::uint16_t, std::uint16_t>& key) {
            return e.src < key.first || (e.src == key.first && e.dst < key.second);
        });
    if (it != edges_.end() && it->src == src && it->dst == dst) {
        return it->weight;
    }
    return 0.0;
}

TransitionGraph build_graph(const OrdinalSequence& sequence) {
    const std::size_t m = sequence.size();
    if (m < 2) {
        throw SequenceTooShort(m);
    }
    const std::size_t transitions = m - 1;

    std::unordered_map<std::uint32_t, std::size_t> counts;
    counts.reserve(std::min<std::size_t>(transitions, 4096));
    const auto indices = sequence.indices();
    for (std::size_t t = 0; t + 1 < m; ++t) {
        const std::uint32_t key =
            (static_cast<std::uint32_t>(indices[t]) << 16) | indices[t + 1];
        ++counts[key];
    }

    std::vector<TransitionGraph::Edge> edges;
    edges.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        edges.push_back({static_cast<std::uint16_t>(key >> 16),
                         static_cast<std::uint16_t>(key & 0xffff),
                         static_cast<double>(count) / static_cast<double>(transitions)});
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.src < b.src || (a.src == b.src && a.dst < b.dst);
    });
    return TransitionGraph(std::move(edges), sequence.params(), transitions);
}

double self_transition_probability(const TransitionGraph& graph) {
    double p = 0.0;
    for (const auto& e : graph.edges()) {
        if (e.src == e.dst) p += e.weight;
    }
    return std::clamp(p, 0.0, 1.0);
}

void write_edge_list_csv(const TransitionGraph& graph, std::ostream& out) {
    out << "src_index,dst_index,weight\n";
    char buf[64];
    for (const auto& e : graph.edges()) {
        std::snprintf(buf, sizeof(buf), "%u,%u,%.17g\n", e.src, e.dst, e.weight);
        out << buf;
    }
}

}  // namespace opmode
