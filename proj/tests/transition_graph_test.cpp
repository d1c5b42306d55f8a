#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include <doctest.h>

#include "opmode/ordinal.hpp"
#include "opmode/time_series.hpp"
#include "opmode/transition_graph.hpp"

using namespace opmode;

namespace {

TransitionGraph graph_of(std::vector<double> series, int d, int tau = 1) {
    return build_graph(extract_sequence(TimeSeries(std::move(series)), EmbeddingParams(d, tau)));
}

// Direct count of consecutive equal patterns, bypassing the graph.
double oracle_pst(const OrdinalSequence& seq) {
    std::size_t repeats = 0;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        if (seq.indices()[i] == seq.indices()[i + 1]) ++repeats;
    }
    return static_cast<double>(repeats) / static_cast<double>(seq.size() - 1);
}

}  // namespace

TEST_CASE("monotone series yield a single self-loop") {
    const auto graph = graph_of({1, 2, 3, 4, 5}, 3);
    REQUIRE(graph.edges().size() == 1);
    CHECK(graph.edges()[0].src == 0);
    CHECK(graph.edges()[0].dst == 0);
    CHECK(graph.edges()[0].weight == 1.0);
    CHECK(graph.transition_count() == 2);
    CHECK(self_transition_probability(graph) == 1.0);
}

TEST_CASE("alternating series split weight over two edges") {
    // patterns (0,1), (1,0), (0,1) -> transitions 0->1 and 1->0
    const auto graph = graph_of({1, 2, 1, 2}, 2);
    REQUIRE(graph.edges().size() == 2);
    CHECK(graph.edges()[0].src == 0);
    CHECK(graph.edges()[0].dst == 1);
    CHECK(graph.edges()[0].weight == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(graph.edges()[1].src == 1);
    CHECK(graph.edges()[1].dst == 0);
    CHECK(graph.edges()[1].weight == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(self_transition_probability(graph) == 0.0);
}

TEST_CASE("self transition worked values") {
    // [1,2,3,2,1] at D=2: patterns (0,1),(0,1),(1,0),(1,0); repeats 2 of 3
    CHECK(self_transition_probability(graph_of({1, 2, 3, 2, 1}, 2)) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(self_transition_probability(graph_of({0, 1, 2, 3, 4, 5, 6}, 4)) == 1.0);
    CHECK(self_transition_probability(graph_of({1, 2, 1, 2, 1, 2, 1}, 2)) == 0.0);
}

TEST_CASE("weights sum to one and match pair counts") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> length(8, 80);
    for (int round = 0; round < 1000; ++round) {
        std::vector<double> series(length(rng));
        for (double& x : series) x = value(rng);
        // coarse quantization keeps repeats likely
        if (round % 2 == 0) {
            for (double& x : series) x = std::floor(x * 3.0);
        }
        for (int d : {2, 3, 4}) {
            if (series.size() < static_cast<std::size_t>(d)) continue;
            const auto seq = extract_sequence(TimeSeries(series), EmbeddingParams(d, 1));
            if (seq.size() < 2) continue;
            const auto graph = build_graph(seq);

            std::map<std::pair<int, int>, std::size_t> pairs;
            for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
                ++pairs[{seq.indices()[i], seq.indices()[i + 1]}];
            }
            REQUIRE(graph.edges().size() == pairs.size());
            double sum = 0.0;
            for (const auto& edge : graph.edges()) {
                const auto it = pairs.find({edge.src, edge.dst});
                REQUIRE(it != pairs.end());
                REQUIRE(edge.weight ==
                        doctest::Approx(static_cast<double>(it->second) /
                                        static_cast<double>(seq.size() - 1))
                            .epsilon(1e-14));
                CHECK(edge.weight > 0.0);
                sum += edge.weight;
            }
            REQUIRE(std::abs(sum - 1.0) < 1e-12);
            REQUIRE(self_transition_probability(graph) ==
                    doctest::Approx(oracle_pst(seq)).epsilon(1e-14));
            CHECK(graph.transition_count() == seq.size() - 1);
        }
    }
}

TEST_CASE("edges are sorted by source then destination") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<double> series(200);
    for (double& x : series) x = value(rng);
    const auto graph = graph_of(std::move(series), 3);
    for (std::size_t i = 0; i + 1 < graph.edges().size(); ++i) {
        const auto& a = graph.edges()[i];
        const auto& b = graph.edges()[i + 1];
        CHECK((a.src < b.src || (a.src == b.src && a.dst < b.dst)));
    }
    CHECK(graph.weight(graph.edges()[0].src, graph.edges()[0].dst) == graph.edges()[0].weight);
}

TEST_CASE("weight lookup returns zero for absent edges") {
    const auto graph = graph_of({1, 2, 3, 4, 5}, 3);
    CHECK(graph.weight(0, 0) == 1.0);
    CHECK(graph.weight(0, 1) == 0.0);
    CHECK(graph.weight(5, 5) == 0.0);
}

TEST_CASE("single-pattern sequences have no transitions") {
    CHECK_THROWS_AS(graph_of({1, 2, 3}, 3), SequenceTooShort);
    CHECK_NOTHROW(graph_of({1, 2, 3, 4}, 3));
}

TEST_CASE("graph construction validates edges") {
    const EmbeddingParams params(3, 1);
    using Edge = TransitionGraph::Edge;
    CHECK_NOTHROW(TransitionGraph({Edge{0, 0, 1.0}}, params, 4));
    // weights must sum to one
    CHECK_THROWS_AS(TransitionGraph({Edge{0, 0, 0.5}}, params, 4), InvalidInput);
    // pattern indices must fit the dimension
    CHECK_THROWS_AS(TransitionGraph({Edge{6, 0, 1.0}}, params, 4), InvalidInput);
    // edges must be sorted and unique
    CHECK_THROWS_AS(
        TransitionGraph({Edge{1, 0, 0.5}, Edge{0, 1, 0.5}}, params, 4), InvalidInput);
    CHECK_THROWS_AS(
        TransitionGraph({Edge{0, 1, 0.5}, Edge{0, 1, 0.5}}, params, 4), InvalidInput);
}

TEST_CASE("edge list csv layout") {
    const auto graph = graph_of({1, 2, 1, 2}, 2);
    std::ostringstream out;
    write_edge_list_csv(graph, out);
    CHECK(out.str() == "src_index,dst_index,weight\n0,1,0.5\n1,0,0.5\n");
}
