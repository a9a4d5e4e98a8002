#ifndef LFCI_SEPARATION_HPP
#define LFCI_SEPARATION_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace lfci {

/// Sentinel for "no cap" on gamma or eta.
inline constexpr int kUnbounded = -1;

class InvalidConditioningSet : public GraphError {
public:
    InvalidConditioningSet(NodeId i, NodeId j, const NodeSet& s)
        : GraphError("conditioning set " + to_string(s) + " contains an endpoint of (" + std::to_string(i) + "," +
                     std::to_string(j) + ")") {}
};

class AdjacentPair : public GraphError {
public:
    AdjacentPair(NodeId i, NodeId j)
        : GraphError("nodes " + std::to_string(i) + " and " + std::to_string(j) + " are adjacent") {}
};

class CapExceeded : public GraphError {
public:
    CapExceeded(NodeId i, NodeId j, int cap)
        : GraphError("no separator of size <= " + std::to_string(cap) + " for (" + std::to_string(i) + "," +
                     std::to_string(j) + ")"),
          pair(i, j) {}
    std::pair<NodeId, NodeId> pair;
};

/// Calls visit(subset) for every k-subset of `pool` (sorted) in
/// lexicographic order. Returning false from visit stops early; the
/// function then returns false.
template <class Visitor>
bool for_each_combination(const NodeSet& pool, int k, Visitor&& visit) {
    int n = static_cast<int>(pool.size());
    if (k < 0 || k > n) return true;
    std::vector<int> idx(k);
    for (int t = 0; t < k; ++t) idx[t] = t;
    NodeSet s(k);
    while (true) {
        for (int t = 0; t < k; ++t) s[t] = pool[idx[t]];
        if (!visit(static_cast<const NodeSet&>(s))) return false;
        int t = k - 1;
        while (t >= 0 && idx[t] == n - k + t) --t;
        if (t < 0) return true;
        ++idx[t];
        for (int u = t + 1; u < k; ++u) idx[u] = idx[u - 1] + 1;
    }
}

namespace detail {

inline std::vector<char> ancestor_mask_within(const MixedGraph& g, const NodeSet& s, const std::vector<char>* mask) {
    std::vector<char> seen(g.size(), 0);
    std::vector<NodeId> stack(s.begin(), s.end());
    for (NodeId v : s) seen[v] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : g.neighbors(v))
            if (!seen[w] && (!mask || (*mask)[w]) && g.is_parent(w, v)) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return seen;
}

inline void check_query(NodeId i, NodeId j, const NodeSet& s) {
    if (i == j || contains(s, i) || contains(s, j)) throw InvalidConditioningSet(i, j, s);
}

}  // namespace detail

/// m-separation of i and j given S by reachability over (node, entered
/// with an arrowhead) states. With `mask`, the graph is restricted to the
/// induced subgraph on the masked nodes (i, j and S must be inside it).
inline bool m_separated(const MixedGraph& g, NodeId i, NodeId j, const NodeSet& s,
                        const std::vector<char>* mask = nullptr) {
    detail::check_query(i, j, s);
    const int p = g.size();
    std::vector<char> in_s(p, 0);
    for (NodeId v : s) in_s[v] = 1;
    std::vector<char> anc = detail::ancestor_mask_within(g, s, mask);
    // visited[2*v + h]: v reached via an edge with (h=1) or without a head at v
    std::vector<char> visited(2 * static_cast<std::size_t>(p), 0);
    std::vector<std::pair<NodeId, bool>> stack;
    auto push = [&](NodeId v, NodeId from) {
        bool h = g.mark_at(v, from) == Mark::Head;
        char& slot = visited[2 * static_cast<std::size_t>(v) + h];
        if (slot) return;
        slot = 1;
        stack.emplace_back(v, h);
    };
    for (NodeId w : g.neighbors(i))
        if (!mask || (*mask)[w]) push(w, i);
    while (!stack.empty()) {
        auto [v, h] = stack.back();
        stack.pop_back();
        if (v == j) return false;
        if (v == i) continue;
        for (NodeId w : g.neighbors(v)) {
            if (mask && !(*mask)[w]) continue;
            bool collider = h && g.mark_at(v, w) == Mark::Head;
            bool open = collider ? anc[v] != 0 : in_s[v] == 0;
            if (open) push(w, v);
        }
    }
    return true;
}

/// Path-enumeration version of m_separated, kept as a reference.
inline bool m_separated_bruteforce(const MixedGraph& g, NodeId i, NodeId j, const NodeSet& s) {
    detail::check_query(i, j, s);
    if (g.size() > kMaxUncappedPathNodes) throw GraphTooLarge(g.size(), kMaxUncappedPathNodes);
    std::vector<char> anc = ancestor_mask(g, s);
    bool open_found = false;
    for_each_simple_path(g, i, j, kUnbounded, [&](const std::vector<NodeId>& path) {
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
            NodeId v = path[k];
            bool collider = g.mark_at(v, path[k - 1]) == Mark::Head && g.mark_at(v, path[k + 1]) == Mark::Head;
            if (collider ? !anc[v] : contains(s, v)) return true;  // blocked, keep looking
        }
        open_found = true;
        return false;
    });
    return !open_found;
}

/// Nodes on some simple path of length <= gamma between i and j in the
/// skeleton of g, plus i and j.
inline NodeSet local_nodes(const MixedGraph& g, NodeId i, NodeId j, int gamma) {
    if (gamma == kUnbounded) gamma = g.size();
    std::vector<int> di = bfs_distances(g, i);
    std::vector<int> dj = bfs_distances(g, j);
    // distance-feasible nodes are a superset; stop once all are confirmed
    int pending = 0;
    std::vector<char> candidate(g.size(), 0), marked(g.size(), 0);
    for (NodeId v = 0; v < g.size(); ++v)
        if (v != i && v != j && di[v] >= 0 && dj[v] >= 0 && di[v] + dj[v] <= gamma) {
            candidate[v] = 1;
            ++pending;
        }
    if (pending > 0) {
        for_each_simple_path(g, i, j, gamma, [&](const std::vector<NodeId>& path) {
            for (std::size_t k = 1; k + 1 < path.size(); ++k)
                if (!marked[path[k]]) {
                    marked[path[k]] = 1;
                    --pending;
                }
            return pending > 0;
        });
    }
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (marked[v] || v == i || v == j) out.push_back(v);
    return out;
}

/// {k != i,j : d(i,k) + d(k,j) <= gamma} in g with the edge (i,j) removed.
/// Admits walks, so it contains local_nodes(g,i,j,gamma) minus {i,j}.
inline NodeSet distance_pool(const MixedGraph& g, NodeId i, NodeId j, int gamma) {
    std::vector<int> di = bfs_distances(g, i, i, j);
    std::vector<int> dj = bfs_distances(g, j, i, j);
    NodeSet out;
    for (NodeId k = 0; k < g.size(); ++k)
        if (k != i && k != j && di[k] >= 0 && dj[k] >= 0 && di[k] + dj[k] <= gamma) out.push_back(k);
    return out;
}

struct LocalGraph {
    NodeId i = 0, j = 0;
    int gamma = 1;
    /// V_gamma(i,j) as indices of the parent graph.
    NodeSet nodes;
    /// Induced subgraph, re-indexed in the order of `nodes`.
    MixedGraph induced;

    std::vector<char> mask(int p) const {
        std::vector<char> m(p, 0);
        for (NodeId v : nodes) m[v] = 1;
        return m;
    }
};

inline LocalGraph local_graph(const MixedGraph& g, NodeId i, NodeId j, int gamma) {
    if (i == j) throw GraphError("local_graph needs distinct endpoints");
    if (gamma < 1 && gamma != kUnbounded) throw GraphError("gamma must be >= 1");
    LocalGraph lg;
    lg.i = i;
    lg.j = j;
    lg.gamma = gamma;
    lg.nodes = local_nodes(g, i, j, gamma);
    lg.induced = induced_subgraph(g, lg.nodes);
    return lg;
}

/// |P_gamma(G,i,j)|: simple paths of length <= gamma between i and j.
inline long count_short_paths(const MixedGraph& skel, NodeId i, NodeId j, int gamma, long stop_after = -1) {
    long count = 0;
    for_each_simple_path(skel, i, j, gamma, [&](const std::vector<NodeId>&) {
        ++count;
        return stop_after < 0 || count <= stop_after;
    });
    return count;
}

/// Every non-adjacent pair has at most eta simple paths of length <= gamma.
inline bool has_local_path_property(const MixedGraph& skel, int eta, int gamma) {
    for (NodeId i = 0; i < skel.size(); ++i)
        for (NodeId j = i + 1; j < skel.size(); ++j)
            if (!skel.adjacent(i, j) && count_short_paths(skel, i, j, gamma, eta) > eta) return false;
    return true;
}

struct SeparatorQuery {
    NodeId i = 0, j = 0;
    int gamma = kUnbounded;
    int eta = kUnbounded;
};

/// Minimum-size subset of V_gamma(i,j) \ {i,j} with at most eta nodes that
/// m-separates i and j in G_gamma(i,j). Ties go to the lexicographically
/// smallest set.
inline std::optional<NodeSet> find_local_separator(const MixedGraph& g, const SeparatorQuery& q) {
    if (q.i == q.j) throw GraphError("separator query needs distinct nodes");
    if (g.adjacent(q.i, q.j)) throw AdjacentPair(q.i, q.j);
    NodeSet nodes = local_nodes(g, q.i, q.j, q.gamma);
    std::vector<char> mask(g.size(), 0);
    for (NodeId v : nodes) mask[v] = 1;
    NodeSet pool = set_difference(nodes, NodeSet{std::min(q.i, q.j), std::max(q.i, q.j)});
    int cap = q.eta == kUnbounded ? static_cast<int>(pool.size()) : std::min<int>(q.eta, pool.size());
    std::optional<NodeSet> found;
    for (int k = 0; k <= cap && !found; ++k)
        for_each_combination(pool, k, [&](const NodeSet& s) {
            if (m_separated(g, q.i, q.j, s, &mask)) {
                found = s;
                return false;
            }
            return true;
        });
    return found;
}

/// True when S lies in V_gamma(i,j) and m-separates i and j in G_gamma(i,j).
inline bool is_local_separator(const MixedGraph& g, NodeId i, NodeId j, const NodeSet& s, int gamma) {
    NodeSet nodes = local_nodes(g, i, j, gamma);
    if (!is_subset(s, nodes)) return false;
    std::vector<char> mask(g.size(), 0);
    for (NodeId v : nodes) mask[v] = 1;
    return m_separated(g, i, j, s, &mask);
}

namespace detail {

inline int min_local_separator_size(const MixedGraph& g, NodeId i, NodeId j, int gamma, int eta_cap) {
    auto sep = find_local_separator(g, {i, j, gamma, eta_cap});
    if (!sep) throw CapExceeded(i, j, eta_cap);
    return static_cast<int>(sep->size());
}

}  // namespace detail

/// L(G, gamma): largest minimum local-separator size over non-adjacent pairs.
inline int L_gamma(const MixedGraph& g, int gamma, int eta_cap) {
    if (g.size() > kMaxUncappedPathNodes) throw GraphTooLarge(g.size(), kMaxUncappedPathNodes);
    int worst = 0;
    for (NodeId i = 0; i < g.size(); ++i)
        for (NodeId j = i + 1; j < g.size(); ++j)
            if (!g.adjacent(i, j)) worst = std::max(worst, detail::min_local_separator_size(g, i, j, gamma, eta_cap));
    return worst;
}

/// mb_gamma(G, i): neighbours of i plus endpoints of collider paths from i
/// with at most gamma edges.
inline NodeSet markov_blanket(const MixedGraph& g, NodeId i, int gamma) {
    if (gamma == kUnbounded) gamma = g.size();
    std::vector<char> member(g.size(), 0);
    for (NodeId w : g.neighbors(i)) member[w] = 1;
    // BFS over interior collider nodes; depth = edges from i
    std::vector<int> depth(g.size(), -1);
    std::vector<NodeId> queue;
    for (NodeId v : g.neighbors(i))
        if (g.mark_at(v, i) == Mark::Head) {
            depth[v] = 1;
            queue.push_back(v);
        }
    for (std::size_t h = 0; h < queue.size(); ++h) {
        NodeId v = queue[h];
        if (depth[v] + 1 > gamma) continue;
        for (NodeId w : g.neighbors(v)) {
            if (w == i || g.mark_at(v, w) != Mark::Head) continue;
            member[w] = 1;
            if (depth[w] < 0 && g.mark_at(w, v) == Mark::Head) {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    member[i] = 0;
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (member[v]) out.push_back(v);
    return out;
}

/// Undirected graph with i - j iff one is in the other's gamma-blanket.
inline MixedGraph moral_graph(const MixedGraph& g, int gamma) {
    MixedGraph m(g.size());
    for (NodeId i = 0; i < g.size(); ++i)
        for (NodeId v : markov_blanket(g, i, gamma))
            if (!m.adjacent(i, v)) m.add_undirected(i, v);
    m.set_labels(g.labels());
    return m;
}

/// L^mb(G, gamma): as L_gamma, restricted to non-adjacent blanket pairs.
inline int L_mb(const MixedGraph& g, int gamma, int eta_cap) {
    if (g.size() > kMaxUncappedPathNodes) throw GraphTooLarge(g.size(), kMaxUncappedPathNodes);
    int worst = 0;
    std::vector<char> done(static_cast<std::size_t>(g.size()) * g.size(), 0);
    for (NodeId j = 0; j < g.size(); ++j)
        for (NodeId i : markov_blanket(g, j, gamma)) {
            NodeId a = std::min(i, j), b = std::max(i, j);
            if (g.adjacent(a, b) || done[static_cast<std::size_t>(a) * g.size() + b]) continue;
            done[static_cast<std::size_t>(a) * g.size() + b] = 1;
            worst = std::max(worst, detail::min_local_separator_size(g, a, b, gamma, eta_cap));
        }
    return worst;
}

/// Anterior set: nodes with a path into S along edges a -> b or a - b.
inline std::vector<char> anterior_mask(const MixedGraph& g, const NodeSet& s) {
    std::vector<char> seen(g.size(), 0);
    std::vector<NodeId> stack(s.begin(), s.end());
    for (NodeId v : s) seen[v] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : g.neighbors(v))
            if (!seen[w] && g.mark_at(w, v) == Mark::Tail && g.mark_at(v, w) != Mark::None &&
                g.mark_at(v, w) != Mark::Circle) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    return seen;
}

/// D-SEP(i, j): nodes other than i reachable from i by a collider path
/// whose vertices are all anterior to {i, j}.
inline NodeSet dsep_set(const MixedGraph& g, NodeId i, NodeId j) {
    std::vector<char> anc = anterior_mask(g, make_set({i, j}));
    std::vector<char> member(g.size(), 0), interior(g.size(), 0);
    std::vector<NodeId> queue;
    for (NodeId v : g.neighbors(i)) {
        if (!anc[v]) continue;
        member[v] = 1;
        if (g.mark_at(v, i) == Mark::Head) {
            interior[v] = 1;
            queue.push_back(v);
        }
    }
    for (std::size_t h = 0; h < queue.size(); ++h) {
        NodeId v = queue[h];
        for (NodeId w : g.neighbors(v)) {
            if (w == i || !anc[w] || g.mark_at(v, w) != Mark::Head) continue;
            member[w] = 1;
            if (!interior[w] && g.mark_at(w, v) == Mark::Head) {
                interior[w] = 1;
                queue.push_back(w);
            }
        }
    }
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (member[v] && v != i) out.push_back(v);
    return out;
}

/// Every non-adjacent pair is m-separated by D-SEP(i,j) or D-SEP(j,i).
inline bool is_maximal(const MixedGraph& g) {
    for (NodeId i = 0; i < g.size(); ++i)
        for (NodeId j = i + 1; j < g.size(); ++j) {
            if (g.adjacent(i, j)) continue;
            NodeSet a = set_difference(dsep_set(g, i, j), {j});
            if (m_separated(g, i, j, a)) continue;
            NodeSet b = set_difference(dsep_set(g, j, i), {i});
            if (!m_separated(g, i, j, b)) return false;
        }
    return true;
}

inline constexpr int kMaxSubsetSearchNodes = 12;

/// All-subset reference for is_maximal.
inline bool is_maximal_bruteforce(const MixedGraph& g) {
    if (g.size() > kMaxSubsetSearchNodes) throw GraphTooLarge(g.size(), kMaxSubsetSearchNodes);
    for (NodeId i = 0; i < g.size(); ++i)
        for (NodeId j = i + 1; j < g.size(); ++j)
            if (!g.adjacent(i, j) && !find_local_separator(g, {i, j, kUnbounded, kUnbounded})) return false;
    return true;
}

}  // namespace lfci

#endif  // LFCI_SEPARATION_HPP
