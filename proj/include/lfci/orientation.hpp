#ifndef LFCI_ORIENTATION_HPP
#define LFCI_ORIENTATION_HPP

// Edge orientation for PAGs (rules R0-R10 of Zhang 2008, with the local
// variant of the discriminating-path rule) and for CPDAGs (Meek rules).

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "separation.hpp"

namespace lfci {

/// Separating sets of removed edges, keyed by unordered pair.
class SepRecord {
public:
    void set(NodeId i, NodeId j, NodeSet s) { sets_[key(i, j)] = std::move(s); }

    const NodeSet* find(NodeId i, NodeId j) const {
        auto it = sets_.find(key(i, j));
        return it == sets_.end() ? nullptr : &it->second;
    }

    bool has(NodeId i, NodeId j) const { return sets_.count(key(i, j)) != 0; }
    std::size_t size() const { return sets_.size(); }
    const std::map<std::pair<NodeId, NodeId>, NodeSet>& entries() const { return sets_; }

    friend bool operator==(const SepRecord&, const SepRecord&) = default;

private:
    static std::pair<NodeId, NodeId> key(NodeId i, NodeId j) { return {std::min(i, j), std::max(i, j)}; }
    std::map<std::pair<NodeId, NodeId>, NodeSet> sets_;
};

class InconsistentSeparators : public GraphError {
public:
    InconsistentSeparators(NodeId at, NodeId other, const std::string& rule)
        : GraphError(rule + " conflicts with an existing mark at " + std::to_string(at) + " on edge " +
                     std::to_string(at) + "-" + std::to_string(other)) {}
};

enum class ConflictPolicy {
    Throw,  // raise InconsistentSeparators
    Keep    // leave the earlier mark in place
};

struct OrientOptions {
    enum class Mode { Fci, LfciLocal };
    Mode mode = Mode::Fci;
    /// Local-graph radius for the LfciLocal discriminating-path rule.
    int gamma = 1;
    ConflictPolicy conflicts = ConflictPolicy::Throw;
    /// Cap on path expansions per search in R4, R5, R9 and R10.
    std::size_t path_cap = 200000;
};

namespace detail {

class PagOrienter {
public:
    PagOrienter(MixedGraph& g, const SepRecord& sep, const OrientOptions& opt) : g_(g), sep_(sep), opt_(opt) {}

    void run() {
        rule0();
        do {
            changed_ = false;
            rule1();
            rule2();
            rule3();
            rule4();
            rule5();
            rule6();
            rule7();
            rule8();
            rule9();
            rule10();
        } while (changed_);
    }

private:
    Mark m(NodeId at, NodeId other) const { return g_.mark_at(at, other); }

    void put(NodeId at, NodeId other, Mark mark, const char* rule) {
        Mark cur = g_.mark_at(at, other);
        if (cur == mark) return;
        if (cur != Mark::Circle) {
            if (opt_.conflicts == ConflictPolicy::Throw) throw InconsistentSeparators(at, other, rule);
            return;
        }
        g_.set_mark(at, other, mark);
        changed_ = true;
    }

    // R0: unshielded a *-* b *-* c with b outside SEP(a,c) becomes a *-> b <-* c.
    void rule0() {
        for (NodeId b = 0; b < g_.size(); ++b) {
            const NodeSet nb = g_.neighbors(b);
            for (std::size_t x = 0; x < nb.size(); ++x)
                for (std::size_t y = x + 1; y < nb.size(); ++y) {
                    NodeId a = nb[x], c = nb[y];
                    if (g_.adjacent(a, c)) continue;
                    const NodeSet* s = sep_.find(a, c);
                    if (s && !contains(*s, b)) {
                        put(b, a, Mark::Head, "R0");
                        put(b, c, Mark::Head, "R0");
                    }
                }
        }
    }

    // R1: a *-> b o-* c, a and c not adjacent => b --> c.
    void rule1() {
        for (NodeId b = 0; b < g_.size(); ++b)
            for (NodeId a : g_.neighbors(b)) {
                if (m(b, a) != Mark::Head) continue;
                for (NodeId c : g_.neighbors(b)) {
                    if (c == a || g_.adjacent(a, c) || m(b, c) != Mark::Circle) continue;
                    put(b, c, Mark::Tail, "R1");
                    put(c, b, Mark::Head, "R1");
                }
            }
    }

    // R2: a --> b *-> c or a *-> b --> c, with a *-o c => a *-> c.
    void rule2() {
        for (NodeId a = 0; a < g_.size(); ++a)
            for (NodeId c : g_.neighbors(a)) {
                if (m(c, a) != Mark::Circle) continue;
                for (NodeId b : g_.neighbors(a)) {
                    if (b == c || !g_.adjacent(b, c)) continue;
                    bool first = g_.is_parent(a, b) && m(c, b) == Mark::Head;
                    bool second = m(b, a) == Mark::Head && g_.is_parent(b, c);
                    if (first || second) {
                        put(c, a, Mark::Head, "R2");
                        break;
                    }
                }
            }
    }

    // R3: a *-> b <-* c, a *-o t o-* c, a and c not adjacent, t *-o b => t *-> b.
    void rule3() {
        for (NodeId b = 0; b < g_.size(); ++b) {
            const NodeSet nb = g_.neighbors(b);
            for (NodeId t : nb) {
                if (m(b, t) != Mark::Circle) continue;
                bool done = false;
                for (std::size_t x = 0; x < nb.size() && !done; ++x)
                    for (std::size_t y = x + 1; y < nb.size() && !done; ++y) {
                        NodeId a = nb[x], c = nb[y];
                        if (a == t || c == t || g_.adjacent(a, c)) continue;
                        if (m(b, a) != Mark::Head || m(b, c) != Mark::Head) continue;
                        if (!g_.adjacent(a, t) || !g_.adjacent(c, t)) continue;
                        if (m(t, a) != Mark::Circle || m(t, c) != Mark::Circle) continue;
                        put(b, t, Mark::Head, "R3");
                        done = true;
                    }
            }
        }
    }

    const NodeSet& local_of(NodeId i, NodeId j) {
        auto key = std::make_pair(std::min(i, j), std::max(i, j));
        auto it = local_cache_.find(key);
        if (it == local_cache_.end()) it = local_cache_.emplace(key, local_nodes(g_, i, j, opt_.gamma)).first;
        return it->second;
    }

    // R4 / R4': discriminating path (theta, ..., x, y, j) for y with y o-* j.
    void rule4() {
        for (NodeId y = 0; y < g_.size(); ++y) {
            const NodeSet ny = g_.neighbors(y);
            for (NodeId j : ny) {
                if (m(y, j) != Mark::Circle) continue;
                enum class Act { None, Tail, Collider, HeadOnly } act = Act::None;
                NodeId x_used = -1;
                for_each_discriminating_path(
                    g_, y, j,
                    [&](const std::vector<NodeId>& path) {
                        NodeId theta = path.front();
                        NodeId x = path[path.size() - 3];
                        const NodeSet* s = sep_.find(theta, j);
                        if (!s) return true;
                        if (contains(*s, y)) {
                            act = Act::Tail;
                            return false;
                        }
                        if (opt_.mode == OrientOptions::Mode::Fci) {
                            act = Act::Collider;
                            x_used = x;
                            return false;
                        }
                        const NodeSet& local = local_of(theta, j);
                        bool inside = true;
                        for (NodeId v : path)
                            if (!contains(local, v)) inside = false;
                        if (inside) {
                            act = Act::Collider;
                            x_used = x;
                            return false;
                        }
                        act = Act::HeadOnly;
                        return true;
                    },
                    opt_.path_cap);
                switch (act) {
                    case Act::Tail:
                        put(y, j, Mark::Tail, "R4");
                        put(j, y, Mark::Head, "R4");
                        break;
                    case Act::Collider:
                        put(x_used, y, Mark::Head, "R4");
                        put(y, x_used, Mark::Head, "R4");
                        put(y, j, Mark::Head, "R4");
                        put(j, y, Mark::Head, "R4");
                        break;
                    case Act::HeadOnly:
                        put(j, y, Mark::Head, "R4'");
                        break;
                    case Act::None:
                        break;
                }
            }
        }
    }

    bool circle_edge(NodeId a, NodeId b) const { return m(a, b) == Mark::Circle && m(b, a) == Mark::Circle; }

    // R5: a o-o b with an uncovered circle path (a, c, ..., d, b), a and d
    // not adjacent, b and c not adjacent => a --- b and every path edge undirected.
    void rule5() {
        for (NodeId a = 0; a < g_.size(); ++a) {
            const NodeSet na = g_.neighbors(a);
            for (NodeId b : na) {
                if (b < a || !circle_edge(a, b)) continue;
                std::vector<NodeId> path{a};
                std::vector<char> used(g_.size(), 0);
                used[a] = used[b] = 1;
                std::size_t budget = opt_.path_cap;
                std::vector<NodeId> found;
                std::function<bool(NodeId)> dfs = [&](NodeId cur) -> bool {
                    if (budget-- == 0) return false;
                    NodeId prev = path.size() >= 2 ? path[path.size() - 2] : -1;
                    for (NodeId w : g_.neighbors(cur)) {
                        if (!circle_edge(cur, w)) continue;
                        if (w == b) {
                            // cur is the last interior node d: need d, a non-adjacent and
                            // the triple (prev, cur, b) uncovered
                            if (path.size() >= 3 && !g_.adjacent(cur, a) && (prev < 0 || !g_.adjacent(prev, b))) {
                                found = path;
                                found.push_back(b);
                                return true;
                            }
                            continue;
                        }
                        if (used[w] || (prev >= 0 && g_.adjacent(prev, w))) continue;
                        used[w] = 1;
                        path.push_back(w);
                        if (dfs(w)) return true;
                        path.pop_back();
                        used[w] = 0;
                    }
                    return false;
                };
                for (NodeId c : na) {
                    if (c == b || g_.adjacent(c, b) || !circle_edge(a, c)) continue;
                    used[c] = 1;
                    path.push_back(c);
                    bool ok = dfs(c);
                    path.pop_back();
                    used[c] = 0;
                    if (ok) break;
                }
                if (found.empty()) continue;
                put(a, b, Mark::Tail, "R5");
                put(b, a, Mark::Tail, "R5");
                for (std::size_t k = 0; k + 1 < found.size(); ++k) {
                    put(found[k], found[k + 1], Mark::Tail, "R5");
                    put(found[k + 1], found[k], Mark::Tail, "R5");
                }
            }
        }
    }

    // R6: a --- b o-* c => b --* c.
    void rule6() {
        for (NodeId b = 0; b < g_.size(); ++b)
            for (NodeId a : g_.neighbors(b)) {
                if (!g_.is_undirected(a, b)) continue;
                for (NodeId c : g_.neighbors(b))
                    if (c != a && m(b, c) == Mark::Circle) put(b, c, Mark::Tail, "R6");
            }
    }

    // R7: a --o b o-* c, a and c not adjacent => b --* c.
    void rule7() {
        for (NodeId b = 0; b < g_.size(); ++b)
            for (NodeId a : g_.neighbors(b)) {
                if (m(a, b) != Mark::Tail || m(b, a) != Mark::Circle) continue;
                for (NodeId c : g_.neighbors(b))
                    if (c != a && !g_.adjacent(a, c) && m(b, c) == Mark::Circle) put(b, c, Mark::Tail, "R7");
            }
    }

    // R8: a --> b --> c or a --o b --> c, with a o-> c => a --> c.
    void rule8() {
        for (NodeId a = 0; a < g_.size(); ++a)
            for (NodeId c : g_.neighbors(a)) {
                if (m(a, c) != Mark::Circle || m(c, a) != Mark::Head) continue;
                for (NodeId b : g_.neighbors(a)) {
                    if (b == c || !g_.adjacent(b, c) || !g_.is_parent(b, c)) continue;
                    if (m(a, b) == Mark::Tail && (m(b, a) == Mark::Head || m(b, a) == Mark::Circle)) {
                        put(a, c, Mark::Tail, "R8");
                        break;
                    }
                }
            }
    }

    /// Edge u -> v can lie on a potentially directed path.
    bool pd(NodeId u, NodeId v) const { return m(u, v) != Mark::Head && m(v, u) != Mark::Tail; }

    /// Uncovered potentially directed path (start, first, ..., target)
    /// avoiding `avoid`.
    bool updp_from(NodeId start, NodeId first, NodeId target, NodeId avoid) {
        if (!pd(start, first)) return false;
        if (first == target) return true;
        std::vector<char> used(g_.size(), 0);
        used[start] = used[first] = 1;
        if (avoid >= 0) used[avoid] = 1;
        std::size_t budget = opt_.path_cap;
        std::function<bool(NodeId, NodeId)> dfs = [&](NodeId prev, NodeId cur) -> bool {
            if (budget-- == 0) return false;
            for (NodeId w : g_.neighbors(cur)) {
                if (w == prev || g_.adjacent(prev, w) || !pd(cur, w)) continue;
                if (w == target) return true;
                if (used[w]) continue;
                used[w] = 1;
                if (dfs(cur, w)) return true;
                used[w] = 0;
            }
            return false;
        };
        return dfs(start, first);
    }

    // R9: a o-> c with an uncovered p.d. path (a, b, t, ..., c), b and c
    // not adjacent => a --> c.
    void rule9() {
        for (NodeId a = 0; a < g_.size(); ++a)
            for (NodeId c : g_.neighbors(a)) {
                if (m(a, c) != Mark::Circle || m(c, a) != Mark::Head) continue;
                for (NodeId b : g_.neighbors(a)) {
                    if (b == c || g_.adjacent(b, c)) continue;
                    if (updp_from(a, b, c, -1)) {
                        put(a, c, Mark::Tail, "R9");
                        break;
                    }
                }
            }
    }

    // R10: a o-> c, b --> c <-- t, uncovered p.d. paths p1 from a to b and
    // p2 from a to t whose second vertices u, w differ and are not adjacent
    // => a --> c.
    void rule10() {
        for (NodeId a = 0; a < g_.size(); ++a)
            for (NodeId c : g_.neighbors(a)) {
                if (m(a, c) != Mark::Circle || m(c, a) != Mark::Head) continue;
                NodeSet parents;
                for (NodeId b : g_.neighbors(c))
                    if (b != a && g_.is_parent(b, c)) parents.push_back(b);
                if (parents.size() < 2) continue;
                std::vector<NodeSet> firsts(parents.size());
                for (std::size_t k = 0; k < parents.size(); ++k)
                    for (NodeId u : g_.neighbors(a))
                        if (u != c && updp_from(a, u, parents[k], c)) firsts[k].push_back(u);
                bool fire = false;
                for (std::size_t k = 0; k < parents.size() && !fire; ++k)
                    for (std::size_t l = k + 1; l < parents.size() && !fire; ++l)
                        for (NodeId u : firsts[k])
                            for (NodeId w : firsts[l])
                                if (u != w && !g_.adjacent(u, w)) fire = true;
                if (fire) put(a, c, Mark::Tail, "R10");
            }
    }

    MixedGraph& g_;
    const SepRecord& sep_;
    OrientOptions opt_;
    bool changed_ = false;
    std::map<std::pair<NodeId, NodeId>, NodeSet> local_cache_;
};

}  // namespace detail

/// Orients a skeleton into a PAG: all marks start as circles, then R0 and
/// R1-R10 run to a fixed point.
inline MixedGraph orient(const MixedGraph& skel, const SepRecord& sep, const OrientOptions& opt = {}) {
    MixedGraph g(skel.size());
    for (const Edge& e : skel.edges()) g.add_edge(e.a, e.b, Mark::Circle, Mark::Circle);
    g.set_labels(skel.labels());
    detail::PagOrienter(g, sep, opt).run();
    return g;
}

/// CPDAG from a skeleton: v-structures from SEP, then Meek rules R1-R4.
/// Conflicting v-structures keep the first orientation.
inline MixedGraph orient_cpdag(const MixedGraph& skel, const SepRecord& sep) {
    MixedGraph g(skel.size());
    for (const Edge& e : skel.edges()) g.add_undirected(e.a, e.b);
    g.set_labels(skel.labels());
    auto undirected = [&](NodeId a, NodeId b) { return g.is_undirected(a, b); };
    auto direct = [&](NodeId a, NodeId b) {
        g.set_mark(a, b, Mark::Tail);
        g.set_mark(b, a, Mark::Head);
    };
    for (NodeId b = 0; b < g.size(); ++b) {
        const NodeSet nb = g.neighbors(b);
        for (std::size_t x = 0; x < nb.size(); ++x)
            for (std::size_t y = x + 1; y < nb.size(); ++y) {
                NodeId a = nb[x], c = nb[y];
                if (g.adjacent(a, c)) continue;
                const NodeSet* s = sep.find(a, c);
                if (!s || contains(*s, b)) continue;
                if (g.is_parent(b, a) || g.is_parent(b, c)) continue;
                if (undirected(a, b)) direct(a, b);
                if (undirected(c, b)) direct(c, b);
            }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId a = 0; a < g.size(); ++a)
            for (NodeId b : NodeSet(g.neighbors(a))) {
                if (!undirected(a, b)) continue;
                bool orient_ab = false;
                const NodeSet& na = g.neighbors(a);
                const NodeSet& nb = g.neighbors(b);
                // R1: c --> a --- b, c and b not adjacent
                for (NodeId c : na)
                    if (c != b && g.is_parent(c, a) && !g.adjacent(c, b)) orient_ab = true;
                // R2: a --> c --> b
                for (NodeId c : na)
                    if (!orient_ab && c != b && g.is_parent(a, c) && g.adjacent(c, b) && g.is_parent(c, b))
                        orient_ab = true;
                // R3: a --- c --> b, a --- d --> b, c and d not adjacent
                if (!orient_ab) {
                    NodeSet cands;
                    for (NodeId c : na)
                        if (c != b && undirected(a, c) && g.adjacent(c, b) && g.is_parent(c, b)) cands.push_back(c);
                    for (std::size_t x = 0; x < cands.size() && !orient_ab; ++x)
                        for (std::size_t y = x + 1; y < cands.size(); ++y)
                            if (!g.adjacent(cands[x], cands[y])) orient_ab = true;
                }
                // R4: a --- c --> d --> b, c and b not adjacent, a adjacent to d
                if (!orient_ab) {
                    for (NodeId d : nb) {
                        if (orient_ab) break;
                        if (d == a || !g.is_parent(d, b) || !g.adjacent(a, d)) continue;
                        for (NodeId c : na)
                            if (c != b && c != d && undirected(a, c) && g.adjacent(c, d) && g.is_parent(c, d) &&
                                !g.adjacent(c, b))
                                orient_ab = true;
                    }
                }
                if (orient_ab) {
                    direct(a, b);
                    changed = true;
                }
            }
    }
    return g;
}

}  // namespace lfci

#endif  // LFCI_ORIENTATION_HPP
