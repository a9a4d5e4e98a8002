#ifndef LFCI_GRAPH_HPP
#define LFCI_GRAPH_HPP

// Mixed graphs with three edge marks (tail, head, circle). One type covers
// DAGs, MAGs, PAGs and undirected skeletons.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lfci {

using NodeId = int;
/// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<NodeId>;

enum class Mark : std::uint8_t { None = 0, Tail = 1, Head = 2, Circle = 3 };

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DuplicateEdge : public GraphError {
public:
    DuplicateEdge(NodeId a, NodeId b)
        : GraphError("duplicate edge " + std::to_string(a) + " - " + std::to_string(b)) {}
};

class SelfLoop : public GraphError {
public:
    explicit SelfLoop(NodeId a) : GraphError("self loop at node " + std::to_string(a)) {}
};

class CircleMarkPresent : public GraphError {
public:
    CircleMarkPresent() : GraphError("graph contains circle marks") {}
};

class GraphTooLarge : public GraphError {
public:
    GraphTooLarge(int p, int limit)
        : GraphError("graph has " + std::to_string(p) + " nodes; limit is " + std::to_string(limit)) {}
};

class ParseError : public GraphError {
public:
    ParseError(int line, const std::string& what)
        : GraphError("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct Edge {
    NodeId a;
    NodeId b;
    Mark mark_at_a;
    Mark mark_at_b;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphClass { Dag, Mag, Pag, Undirected };

inline bool contains(const NodeSet& s, NodeId v) { return std::binary_search(s.begin(), s.end(), v); }

inline NodeSet make_set(std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool is_subset(const NodeSet& a, const NodeSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::string to_string(const NodeSet& s) {
    std::string out = "{";
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k) out += ",";
        out += std::to_string(s[k]);
    }
    return out + "}";
}

/// Simple graph over nodes 0..p-1. Marks are stored per endpoint in a dense
/// p x p table: mark_at(v, w) is the mark at v on the edge v *-* w.
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(int p) : p_(p), marks_(static_cast<std::size_t>(p) * p, Mark::None), adj_(p) {
        if (p < 0) throw GraphError("negative node count");
    }

    int size() const { return p_; }

    bool adjacent(NodeId a, NodeId b) const { return mark_at(a, b) != Mark::None; }

    Mark mark_at(NodeId at, NodeId other) const {
        return marks_[static_cast<std::size_t>(at) * p_ + other];
    }

    const NodeSet& neighbors(NodeId v) const { return adj_[v]; }

    int degree(NodeId v) const { return static_cast<int>(adj_[v].size()); }

    void add_edge(NodeId a, NodeId b, Mark mark_at_a, Mark mark_at_b) {
        check_node(a);
        check_node(b);
        if (a == b) throw SelfLoop(a);
        if (adjacent(a, b)) throw DuplicateEdge(a, b);
        if (mark_at_a == Mark::None || mark_at_b == Mark::None) throw GraphError("edge marks must be set");
        slot(a, b) = mark_at_a;
        slot(b, a) = mark_at_b;
        adj_[a].insert(std::upper_bound(adj_[a].begin(), adj_[a].end(), b), b);
        adj_[b].insert(std::upper_bound(adj_[b].begin(), adj_[b].end(), a), a);
        ++n_edges_;
    }

    /// Adds a -> b.
    void add_directed(NodeId a, NodeId b) { add_edge(a, b, Mark::Tail, Mark::Head); }
    void add_bidirected(NodeId a, NodeId b) { add_edge(a, b, Mark::Head, Mark::Head); }
    void add_undirected(NodeId a, NodeId b) { add_edge(a, b, Mark::Tail, Mark::Tail); }

    void remove_edge(NodeId a, NodeId b) {
        if (!adjacent(a, b)) return;
        slot(a, b) = Mark::None;
        slot(b, a) = Mark::None;
        adj_[a].erase(std::lower_bound(adj_[a].begin(), adj_[a].end(), b));
        adj_[b].erase(std::lower_bound(adj_[b].begin(), adj_[b].end(), a));
        --n_edges_;
    }

    void set_mark(NodeId at, NodeId other, Mark m) {
        if (!adjacent(at, other)) throw GraphError("set_mark on absent edge");
        if (m == Mark::None) throw GraphError("use remove_edge to delete edges");
        slot(at, other) = m;
    }

    /// a -> b
    bool is_parent(NodeId a, NodeId b) const {
        return mark_at(a, b) == Mark::Tail && mark_at(b, a) == Mark::Head;
    }
    bool is_bidirected(NodeId a, NodeId b) const {
        return mark_at(a, b) == Mark::Head && mark_at(b, a) == Mark::Head;
    }
    bool is_undirected(NodeId a, NodeId b) const {
        return mark_at(a, b) == Mark::Tail && mark_at(b, a) == Mark::Tail;
    }

    NodeSet parents(NodeId v) const {
        NodeSet out;
        for (NodeId w : adj_[v])
            if (is_parent(w, v)) out.push_back(w);
        return out;
    }
    NodeSet children(NodeId v) const {
        NodeSet out;
        for (NodeId w : adj_[v])
            if (is_parent(v, w)) out.push_back(w);
        return out;
    }

    int edge_count() const { return n_edges_; }

    /// Edges with a < b, in (a, b) order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(n_edges_);
        for (NodeId a = 0; a < p_; ++a)
            for (NodeId b : adj_[a])
                if (a < b) out.push_back({a, b, mark_at(a, b), mark_at(b, a)});
        return out;
    }

    bool has_circles() const {
        return std::find(marks_.begin(), marks_.end(), Mark::Circle) != marks_.end();
    }

    int max_degree() const {
        int d = 0;
        for (const auto& a : adj_) d = std::max(d, static_cast<int>(a.size()));
        return d;
    }

    const std::vector<std::string>& labels() const { return labels_; }
    void set_labels(std::vector<std::string> labels) {
        if (!labels.empty() && static_cast<int>(labels.size()) != p_) throw GraphError("label count mismatch");
        labels_ = std::move(labels);
    }
    std::string label(NodeId v) const { return labels_.empty() ? std::to_string(v) : labels_[v]; }

    /// Node lookup by label (or decimal id when unlabeled).
    std::optional<NodeId> find(std::string_view label) const {
        if (labels_.empty()) {
            int v = -1;
            auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), v);
            if (ec != std::errc() || ptr != label.data() + label.size() || v < 0 || v >= p_) return std::nullopt;
            return v;
        }
        for (NodeId v = 0; v < p_; ++v)
            if (labels_[v] == label) return v;
        return std::nullopt;
    }

    NodeId at(std::string_view label) const {
        auto v = find(label);
        if (!v) throw GraphError("unknown node '" + std::string(label) + "'");
        return *v;
    }

    /// Structural equality: same node count and marks. Labels are ignored.
    friend bool operator==(const MixedGraph& x, const MixedGraph& y) {
        return x.p_ == y.p_ && x.marks_ == y.marks_;
    }

private:
    void check_node(NodeId v) const {
        if (v < 0 || v >= p_) throw GraphError("node " + std::to_string(v) + " out of range");
    }
    Mark& slot(NodeId at, NodeId other) { return marks_[static_cast<std::size_t>(at) * p_ + other]; }

    int p_ = 0;
    int n_edges_ = 0;
    std::vector<Mark> marks_;
    std::vector<NodeSet> adj_;
    std::vector<std::string> labels_;
};

inline MixedGraph complete_undirected(int p) {
    MixedGraph g(p);
    for (NodeId a = 0; a < p; ++a)
        for (NodeId b = a + 1; b < p; ++b) g.add_undirected(a, b);
    return g;
}

/// an(G, S): nodes with a directed path into S, S included.
inline NodeSet ancestors(const MixedGraph& g, const NodeSet& s) {
    std::vector<char> seen(g.size(), 0);
    std::vector<NodeId> stack(s.begin(), s.end());
    for (NodeId v : s) seen[v] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : g.neighbors(v))
            if (!seen[w] && g.is_parent(w, v)) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

inline NodeSet descendants(const MixedGraph& g, const NodeSet& s) {
    std::vector<char> seen(g.size(), 0);
    std::vector<NodeId> stack(s.begin(), s.end());
    for (NodeId v : s) seen[v] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : g.neighbors(v))
            if (!seen[w] && g.is_parent(v, w)) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (seen[v]) out.push_back(v);
    return out;
}

/// Membership mask of an(G, S).
inline std::vector<char> ancestor_mask(const MixedGraph& g, const NodeSet& s) {
    std::vector<char> mask(g.size(), 0);
    for (NodeId v : ancestors(g, s)) mask[v] = 1;
    return mask;
}

struct AncestralCheck {
    enum class Violation { None, DirectedCycle, AlmostDirectedCycle, UndirectedWithArrowhead };
    Violation violation = Violation::None;
    /// Cycle nodes in path order, or the triple (a, b, c) for a - b <-* c.
    std::vector<NodeId> witness;

    explicit operator bool() const { return violation == Violation::None; }
};

/// Directed path from `from` to `to` following tail->head edges, if any.
inline std::optional<std::vector<NodeId>> directed_path(const MixedGraph& g, NodeId from, NodeId to) {
    std::vector<NodeId> prev(g.size(), -1);
    std::vector<char> seen(g.size(), 0);
    std::vector<NodeId> queue{from};
    seen[from] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        NodeId v = queue[h];
        if (v == to) {
            std::vector<NodeId> path;
            for (NodeId x = to; x != -1; x = prev[x]) path.push_back(x);
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (NodeId w : g.neighbors(v))
            if (!seen[w] && g.is_parent(v, w)) {
                seen[w] = 1;
                prev[w] = v;
                queue.push_back(w);
            }
    }
    return std::nullopt;
}

inline AncestralCheck is_ancestral(const MixedGraph& g) {
    if (g.has_circles()) throw CircleMarkPresent();
    AncestralCheck res;
    // directed cycles: an edge a -> b with a directed path b ~> a
    for (const Edge& e : g.edges()) {
        NodeId a = e.a, b = e.b;
        if (g.is_parent(b, a)) std::swap(a, b);
        if (!g.is_parent(a, b)) continue;
        if (auto back = directed_path(g, b, a)) {
            res.violation = AncestralCheck::Violation::DirectedCycle;
            res.witness.push_back(a);
            res.witness.insert(res.witness.end(), back->begin(), back->end() - 1);
            return res;
        }
    }
    for (const Edge& e : g.edges()) {
        if (!g.is_bidirected(e.a, e.b)) continue;
        for (auto [x, y] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            if (auto path = directed_path(g, x, y)) {
                res.violation = AncestralCheck::Violation::AlmostDirectedCycle;
                res.witness = *path;
                return res;
            }
        }
    }
    for (const Edge& e : g.edges()) {
        if (!g.is_undirected(e.a, e.b)) continue;
        for (auto [x, y] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            for (NodeId c : g.neighbors(x)) {
                if (c == y) continue;
                if (g.mark_at(x, c) == Mark::Head) {
                    res.violation = AncestralCheck::Violation::UndirectedWithArrowhead;
                    res.witness = {y, x, c};
                    return res;
                }
            }
        }
    }
    return res;
}

inline bool is_dag(const MixedGraph& g) {
    for (const Edge& e : g.edges())
        if (!g.is_parent(e.a, e.b) && !g.is_parent(e.b, e.a)) return false;
    return !g.has_circles() && static_cast<bool>(is_ancestral(g));
}

/// Nodes in a topological order of the directed part; throws on a directed cycle.
inline std::vector<NodeId> topological_order(const MixedGraph& g) {
    std::vector<int> indeg(g.size(), 0);
    for (NodeId v = 0; v < g.size(); ++v)
        for (NodeId w : g.neighbors(v))
            if (g.is_parent(w, v)) ++indeg[v];
    std::vector<NodeId> order;
    for (NodeId v = 0; v < g.size(); ++v)
        if (indeg[v] == 0) order.push_back(v);
    for (std::size_t h = 0; h < order.size(); ++h)
        for (NodeId w : g.neighbors(order[h]))
            if (g.is_parent(order[h], w) && --indeg[w] == 0) order.push_back(w);
    if (static_cast<int>(order.size()) != g.size()) throw GraphError("directed cycle");
    return order;
}

inline MixedGraph skeleton(const MixedGraph& g) {
    MixedGraph s(g.size());
    for (const Edge& e : g.edges()) s.add_undirected(e.a, e.b);
    s.set_labels(g.labels());
    return s;
}

/// Subgraph induced by `nodes` (sorted), re-indexed 0..k-1 in that order.
inline MixedGraph induced_subgraph(const MixedGraph& g, const NodeSet& nodes) {
    MixedGraph s(static_cast<int>(nodes.size()));
    for (std::size_t x = 0; x < nodes.size(); ++x)
        for (std::size_t y = x + 1; y < nodes.size(); ++y)
            if (g.adjacent(nodes[x], nodes[y]))
                s.add_edge(static_cast<NodeId>(x), static_cast<NodeId>(y), g.mark_at(nodes[x], nodes[y]),
                           g.mark_at(nodes[y], nodes[x]));
    if (!g.labels().empty()) {
        std::vector<std::string> labels;
        for (NodeId v : nodes) labels.push_back(g.labels()[v]);
        s.set_labels(std::move(labels));
    }
    return s;
}

/// Unweighted shortest-path distances from `src`; -1 when unreachable. The
/// edge (skip_a, skip_b), if given, is treated as absent.
inline std::vector<int> bfs_distances(const MixedGraph& g, NodeId src, NodeId skip_a = -1, NodeId skip_b = -1,
                                      const std::vector<char>* mask = nullptr) {
    std::vector<int> dist(g.size(), -1);
    std::vector<NodeId> queue{src};
    dist[src] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        NodeId v = queue[h];
        for (NodeId w : g.neighbors(v)) {
            if (dist[w] >= 0) continue;
            if ((v == skip_a && w == skip_b) || (v == skip_b && w == skip_a)) continue;
            if (mask && !(*mask)[w]) continue;
            dist[w] = dist[v] + 1;
            queue.push_back(w);
        }
    }
    return dist;
}

constexpr int kMaxUncappedPathNodes = 20;

/// Calls visit(path) for every simple path from a to b with at most
/// max_len edges (max_len < 0 means uncapped, allowed up to 20 nodes).
/// Returning false from visit stops the enumeration.
template <class Visitor>
void for_each_simple_path(const MixedGraph& g, NodeId a, NodeId b, int max_len, Visitor&& visit) {
    if (max_len < 0) {
        if (g.size() > kMaxUncappedPathNodes) throw GraphTooLarge(g.size(), kMaxUncappedPathNodes);
        max_len = g.size();
    }
    // distance-to-b bound prunes branches that cannot close within max_len
    std::vector<int> to_b = bfs_distances(g, b);
    std::vector<NodeId> path{a};
    std::vector<char> on_path(g.size(), 0);
    on_path[a] = 1;
    bool stop = false;
    std::function<void(NodeId)> dfs = [&](NodeId v) {
        if (stop) return;
        if (v == b) {
            if (!visit(static_cast<const std::vector<NodeId>&>(path))) stop = true;
            return;
        }
        int used = static_cast<int>(path.size()) - 1;
        for (NodeId w : g.neighbors(v)) {
            if (on_path[w] || to_b[w] < 0 || used + 1 + to_b[w] > max_len) continue;
            on_path[w] = 1;
            path.push_back(w);
            dfs(w);
            path.pop_back();
            on_path[w] = 0;
            if (stop) return;
        }
    };
    if (to_b[a] >= 0 && to_b[a] <= max_len) dfs(a);
}

/// Calls visit(path) for every discriminating path (theta, ..., x, y, j) for
/// y: at least three edges, theta not adjacent to j, and every node strictly
/// between theta and y a collider on the path and a parent of j. Paths are
/// produced in depth-first order from y outward; at most max_paths are visited.
template <class Visitor>
void for_each_discriminating_path(const MixedGraph& g, NodeId y, NodeId j, Visitor&& visit,
                                  std::size_t max_paths = 100000) {
    if (!g.adjacent(y, j)) return;
    std::vector<NodeId> rev{j, y};  // built backwards
    std::vector<char> used(g.size(), 0);
    used[j] = used[y] = 1;
    std::size_t count = 0;
    bool stop = false;
    // `cur` is a collider whose successor on the path is rev[rev.size()-2]
    std::function<void(NodeId)> extend = [&](NodeId cur) {
        for (NodeId w : g.neighbors(cur)) {
            if (stop) return;
            if (used[w] || g.mark_at(cur, w) != Mark::Head) continue;
            if (!g.adjacent(w, j)) {
                rev.push_back(w);
                std::vector<NodeId> path(rev.rbegin(), rev.rend());
                rev.pop_back();
                if (!visit(static_cast<const std::vector<NodeId>&>(path)) || ++count >= max_paths) stop = true;
            } else if (g.is_parent(w, j) && g.mark_at(w, cur) == Mark::Head) {
                used[w] = 1;
                rev.push_back(w);
                extend(w);
                rev.pop_back();
                used[w] = 0;
            }
        }
    };
    for (NodeId x : g.neighbors(y)) {
        if (stop) return;
        if (x == j || g.mark_at(x, y) != Mark::Head || !g.is_parent(x, j)) continue;
        used[x] = 1;
        rev.push_back(x);
        extend(x);
        rev.pop_back();
        used[x] = 0;
    }
}

/// All discriminating paths between i and j for y.
inline std::vector<std::vector<NodeId>> discriminating_paths(const MixedGraph& g, NodeId i, NodeId j, NodeId y) {
    std::vector<std::vector<NodeId>> out;
    if (g.adjacent(i, j)) return out;
    for_each_discriminating_path(g, y, j, [&](const std::vector<NodeId>& path) {
        if (path.front() == i) out.push_back(path);
        return true;
    });
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Text format: one edge per line, "<id> <left>-<right> <id>".

namespace detail {

inline std::optional<Mark> left_mark(char c) {
    switch (c) {
        case '<': return Mark::Head;
        case 'o': return Mark::Circle;
        case '-': return Mark::Tail;
        default: return std::nullopt;
    }
}

inline std::optional<Mark> right_mark(char c) {
    switch (c) {
        case '>': return Mark::Head;
        case 'o': return Mark::Circle;
        case '-': return Mark::Tail;
        default: return std::nullopt;
    }
}

inline bool is_index(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline std::string edge_token(Mark at_a, Mark at_b) {
    std::string t = "---";
    t[0] = at_a == Mark::Head ? '<' : at_a == Mark::Circle ? 'o' : '-';
    t[2] = at_b == Mark::Head ? '>' : at_b == Mark::Circle ? 'o' : '-';
    return t;
}

/// Accepts numeric ids (nodes 0..max) or arbitrary labels. Labels are
/// numbered in order of a `nodes=a,b,...` header, then first appearance.
inline MixedGraph parse_graph(std::string_view text) {
    struct Line {
        int line;
        std::string a, tok, b;
    };
    std::vector<Line> lines;
    int declared_p = 0;
    std::vector<std::string> declared_labels;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string s = detail::trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.rfind("p=", 0) == 0) {
            std::string v = detail::trim(s.substr(2));
            if (!detail::is_index(v)) throw ParseError(lineno, "bad node count '" + v + "'");
            declared_p = std::stoi(v);
            continue;
        }
        if (s.rfind("nodes=", 0) == 0) {
            std::istringstream ls(s.substr(6));
            std::string item;
            while (std::getline(ls, item, ',')) {
                item = detail::trim(item);
                if (!item.empty()) declared_labels.push_back(item);
            }
            continue;
        }
        std::istringstream ls(s);
        Line l{lineno, {}, {}, {}};
        std::string extra;
        if (!(ls >> l.a >> l.tok >> l.b) || (ls >> extra)) throw ParseError(lineno, "expected '<id> <mark>-<mark> <id>'");
        if (l.tok.size() != 3 || l.tok[1] != '-' || !detail::left_mark(l.tok[0]) || !detail::right_mark(l.tok[2]))
            throw ParseError(lineno, "bad edge token '" + l.tok + "'");
        lines.push_back(std::move(l));
    }

    bool numeric = declared_labels.empty();
    for (const auto& l : lines)
        if (!detail::is_index(l.a) || !detail::is_index(l.b)) numeric = false;

    MixedGraph g;
    std::unordered_map<std::string, NodeId> ids;
    if (numeric) {
        int p = declared_p;
        for (const auto& l : lines) p = std::max({p, std::stoi(l.a) + 1, std::stoi(l.b) + 1});
        g = MixedGraph(p);
    } else {
        std::vector<std::string> labels = declared_labels;
        for (std::size_t k = 0; k < labels.size(); ++k) ids.emplace(labels[k], static_cast<NodeId>(k));
        for (const auto& l : lines)
            for (const auto* name : {&l.a, &l.b})
                if (ids.emplace(*name, static_cast<NodeId>(labels.size())).second) labels.push_back(*name);
        g = MixedGraph(static_cast<int>(labels.size()));
        g.set_labels(std::move(labels));
    }
    for (const auto& l : lines) {
        NodeId a = numeric ? std::stoi(l.a) : ids.at(l.a);
        NodeId b = numeric ? std::stoi(l.b) : ids.at(l.b);
        try {
            g.add_edge(a, b, *detail::left_mark(l.tok[0]), *detail::right_mark(l.tok[2]));
        } catch (const GraphError& e) {
            throw ParseError(l.line, e.what());
        }
    }
    return g;
}

inline std::string serialize_graph(const MixedGraph& g) {
    std::ostringstream out;
    if (g.labels().empty()) {
        out << "p=" << g.size() << "\n";
    } else {
        out << "nodes=";
        for (NodeId v = 0; v < g.size(); ++v) out << (v ? "," : "") << g.labels()[v];
        out << "\n";
    }
    for (const Edge& e : g.edges())
        out << g.label(e.a) << " " << edge_token(e.mark_at_a, e.mark_at_b) << " " << g.label(e.b) << "\n";
    return out.str();
}

inline MixedGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

inline void write_graph_file(const MixedGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write " + path);
    out << serialize_graph(g);
}

}  // namespace lfci

#endif  // LFCI_GRAPH_HPP
