#ifndef LFCI_PROJECTION_HPP
#define LFCI_PROJECTION_HPP

#include <string>
#include <vector>

#include "graph.hpp"
#include "orientation.hpp"
#include "separation.hpp"

namespace lfci {

class NotADag : public GraphError {
public:
    NotADag() : GraphError("input is not a DAG") {}
};

class InvalidMag : public GraphError {
public:
    explicit InvalidMag(const std::string& why) : GraphError("invalid MAG: " + why) {}
};

/// Observed / latent / selection split of the DAG's nodes.
struct Partition {
    NodeSet observed;
    NodeSet latent;
    NodeSet selection;

    static Partition all_observed(int p) {
        Partition part;
        for (NodeId v = 0; v < p; ++v) part.observed.push_back(v);
        return part;
    }

    void validate(int p) const {
        std::vector<int> seen(p, 0);
        for (const NodeSet* s : {&observed, &latent, &selection})
            for (NodeId v : *s) {
                if (v < 0 || v >= p) throw GraphError("partition node out of range");
                ++seen[v];
            }
        for (int c : seen)
            if (c != 1) throw GraphError("partition must cover each node exactly once");
        if (observed.empty()) throw GraphError("no observed nodes");
    }
};

inline constexpr int kMaxExhaustiveProjectionNodes = 20;

namespace detail {

/// MAG over the observed nodes given an adjacency predicate on DAG indices.
template <class Adjacent>
MixedGraph build_mag(const MixedGraph& dag, const Partition& part, Adjacent&& adjacent) {
    const NodeSet& x = part.observed;
    MixedGraph mag(static_cast<int>(x.size()));
    for (std::size_t a = 0; a < x.size(); ++a) {
        NodeSet with_a = set_union(part.selection, {x[a]});
        std::vector<char> anc_a = ancestor_mask(dag, with_a);
        for (std::size_t b = a + 1; b < x.size(); ++b) {
            if (!adjacent(x[a], x[b])) continue;
            NodeSet with_b = set_union(part.selection, {x[b]});
            std::vector<char> anc_b = ancestor_mask(dag, with_b);
            Mark at_a = anc_b[x[a]] ? Mark::Tail : Mark::Head;
            Mark at_b = anc_a[x[b]] ? Mark::Tail : Mark::Head;
            mag.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b), at_a, at_b);
        }
    }
    if (!dag.labels().empty()) {
        std::vector<std::string> labels;
        for (NodeId v : x) labels.push_back(dag.labels()[v]);
        mag.set_labels(std::move(labels));
    }
    return mag;
}

}  // namespace detail

/// MAG over part.observed (re-indexed in that order). Adjacency by
/// exhaustive search over Y subsets of X \ {i,j}, conditioning on Y and Z.
inline MixedGraph latent_project(const MixedGraph& dag, const Partition& part) {
    if (!is_dag(dag)) throw NotADag();
    if (dag.size() > kMaxExhaustiveProjectionNodes) throw GraphTooLarge(dag.size(), kMaxExhaustiveProjectionNodes);
    part.validate(dag.size());
    return detail::build_mag(dag, part, [&](NodeId i, NodeId j) {
        NodeSet pool = set_difference(part.observed, make_set({i, j}));
        for (int k = 0; k <= static_cast<int>(pool.size()); ++k) {
            bool separated = false;
            for_each_combination(pool, k, [&](const NodeSet& y) {
                if (m_separated(dag, i, j, set_union(y, part.selection))) {
                    separated = true;
                    return false;
                }
                return true;
            });
            if (separated) return false;
        }
        return true;
    });
}

/// Same contract as latent_project for any size: i and j are separable iff
/// (an({i,j} u Z) n X) \ {i,j}, together with Z, separates them.
inline MixedGraph latent_project_fast(const MixedGraph& dag, const Partition& part) {
    if (!is_dag(dag)) throw NotADag();
    part.validate(dag.size());
    std::vector<char> observed(dag.size(), 0);
    for (NodeId v : part.observed) observed[v] = 1;
    return detail::build_mag(dag, part, [&](NodeId i, NodeId j) {
        NodeSet cond = part.selection;
        for (NodeId v : ancestors(dag, set_union(part.selection, make_set({i, j}))))
            if (observed[v] && v != i && v != j) cond.push_back(v);
        return !m_separated(dag, i, j, make_set(std::move(cond)));
    });
}

/// A separator for each non-adjacent pair of a MAG: an({i,j}) \ {i,j} when
/// it separates, else the smallest separating set.
inline SepRecord mag_separators(const MixedGraph& mag) {
    SepRecord sep;
    for (NodeId i = 0; i < mag.size(); ++i)
        for (NodeId j = i + 1; j < mag.size(); ++j) {
            if (mag.adjacent(i, j)) continue;
            NodeSet s = set_difference(ancestors(mag, {i, j}), {i, j});
            if (!m_separated(mag, i, j, s)) {
                if (mag.size() > kMaxSubsetSearchNodes) throw InvalidMag("pair has no ancestral separator");
                auto found = find_local_separator(mag, {i, j, kUnbounded, kUnbounded});
                if (!found) throw InvalidMag("pair (" + std::to_string(i) + "," + std::to_string(j) + ") is inseparable");
                s = *found;
            }
            sep.set(i, j, std::move(s));
        }
    return sep;
}

/// Maximally informative PAG of the MAG's equivalence class.
inline MixedGraph true_pag(const MixedGraph& mag) {
    if (mag.has_circles()) throw InvalidMag("circle marks");
    if (!is_ancestral(mag)) throw InvalidMag("not ancestral");
    SepRecord sep = mag_separators(mag);
    return orient(skeleton(mag), sep, OrientOptions{});
}

inline constexpr int kMaxVerifyNodes = 15;

/// Brute-force check of a PAG against the generating DAG: adjacency iff no
/// Y u Z separation; arrowhead at j only if j is not in an({i} u Z); tail
/// at j only if j is in an({i} u Z).
inline bool verify_pag(const MixedGraph& pag, const MixedGraph& dag, const Partition& part) {
    if (dag.size() > kMaxVerifyNodes) throw GraphTooLarge(dag.size(), kMaxVerifyNodes);
    part.validate(dag.size());
    const NodeSet& x = part.observed;
    if (pag.size() != static_cast<int>(x.size())) return false;
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t b = a + 1; b < x.size(); ++b) {
            NodeId i = x[a], j = x[b];
            NodeSet pool = set_difference(x, make_set({i, j}));
            bool separable = false;
            for (int k = 0; k <= static_cast<int>(pool.size()) && !separable; ++k)
                for_each_combination(pool, k, [&](const NodeSet& y) {
                    separable = m_separated(dag, i, j, set_union(y, part.selection));
                    return !separable;
                });
            if (separable == pag.adjacent(static_cast<NodeId>(a), static_cast<NodeId>(b))) return false;
        }
    for (const Edge& e : pag.edges())
        for (auto [u, v] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            Mark at_v = pag.mark_at(v, u);
            if (at_v == Mark::Circle) continue;
            bool anc = contains(ancestors(dag, set_union(part.selection, {x[u]})), x[v]);
            if (at_v == Mark::Head && anc) return false;
            if (at_v == Mark::Tail && !anc) return false;
        }
    return true;
}

}  // namespace lfci

#endif  // LFCI_PROJECTION_HPP
