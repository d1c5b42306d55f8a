#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "opmode/ordinal.hpp"

namespace opmode {

// Weighted directed graph over ordinal patterns. An edge (src, dst)
// exists when dst follows src somewhere in the sequence; its weight is
// the fraction of the m - 1 transitions it accounts for, so all weights
// sum to 1. Self-loops are kept: consecutive repeats of a pattern carry
// the temporal correlation the self-transition probability reads off.
// Edges are stored sparsely; at dimension 7 a dense matrix would hold
// 25M cells per trajectory while a sequence contributes at most m - 1
// distinct edges.
class TransitionGraph {
public:
    struct Edge {
        std::uint16_t src;
        std::uint16_t dst;
        double weight;
    };

    TransitionGraph(std::vector<Edge> edges, EmbeddingParams params,
                    std::size_t transition_count);

    const EmbeddingParams& params() const noexcept { return params_; }
    int dimension() const noexcept { return params_.dimension(); }

    // Number of transitions, m - 1.
    std::size_t transition_count() const noexcept { return transition_count_; }

    // Sorted by (src, dst); every stored weight is positive.
    std::span<const Edge> edges() const noexcept { return edges_; }

    // Weight of one edge, 0 when absent.
    double weight(std::uint16_t src, std::uint16_t dst) const noexcept;

private:
    std::vector<Edge> edges_;
    EmbeddingParams params_;
    std::size_t transition_count_;
};

// Count consecutive pattern pairs and normalize by m - 1. Throws
// SequenceTooShort when the sequence has fewer than two patterns.
TransitionGraph build_graph(const OrdinalSequence& sequence);

// Sum of self-loop weights: the fraction of consecutive window pairs
// sharing the same pattern.
double self_transition_probability(const TransitionGraph& graph);

// Edge list as CSV with header "src_index,dst_index,weight".
void write_edge_list_csv(const TransitionGraph& graph, std::ostream& out);

}  // namespace opmode
