#ifndef LFCI_TEST_HELPERS_HPP
#define LFCI_TEST_HELPERS_HPP

#include <ostream>
#include <string>

#include "lfci/lfci.hpp"

namespace lfci {

// readable graphs in test failure messages
inline void PrintTo(const MixedGraph& g, std::ostream* os) { *os << "\n" << serialize_graph(g); }

}  // namespace lfci

namespace lfci::testing {

inline MixedGraph fixture(const std::string& name) { return read_graph_file(std::string(LFCI_FIXTURE_DIR) + "/" + name); }

inline NodeSet labelled(const MixedGraph& g, std::initializer_list<const char*> names) {
    NodeSet s;
    for (const char* n : names) s.push_back(g.at(n));
    return make_set(s);
}

/// Random DAG on p nodes with edge probability `density`.
inline MixedGraph random_dag(int p, double density, Rng& rng) {
    std::vector<int> order = rng.permutation(p);
    MixedGraph g(p);
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (rng.coin(density)) g.add_directed(order[a], order[b]);
    return g;
}

/// Random MAG: DAG over p + latents nodes projected onto p observed nodes.
inline MixedGraph random_mag(int p, int latents, double density, Rng& rng) {
    MixedGraph dag = random_dag(p + latents, density, rng);
    Partition part;
    std::vector<int> order = rng.permutation(p + latents);
    part.latent = make_set(std::vector<int>(order.begin(), order.begin() + latents));
    part.observed = make_set(std::vector<int>(order.begin() + latents, order.end()));
    return latent_project_fast(dag, part);
}

/// Random mixed graph, not necessarily ancestral; circles when allowed.
inline MixedGraph random_mixed(int p, double density, bool circles, Rng& rng) {
    MixedGraph g(p);
    const Mark marks[] = {Mark::Tail, Mark::Head, Mark::Circle};
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (rng.coin(density)) g.add_edge(a, b, marks[rng.below(circles ? 3 : 2)], marks[rng.below(circles ? 3 : 2)]);
    return g;
}

/// Copy of g with node v renamed perm[v].
inline MixedGraph relabel(const MixedGraph& g, const std::vector<int>& perm) {
    MixedGraph h(g.size());
    for (const Edge& e : g.edges()) h.add_edge(perm[e.a], perm[e.b], e.mark_at_a, e.mark_at_b);
    return h;
}

inline NodeSet relabel(const NodeSet& s, const std::vector<int>& perm) {
    NodeSet out;
    for (NodeId v : s) out.push_back(perm[v]);
    return make_set(out);
}

}  // namespace lfci::testing

#endif  // LFCI_TEST_HELPERS_HPP
