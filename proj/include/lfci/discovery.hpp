#ifndef LFCI_DISCOVERY_HPP
#define LFCI_DISCOVERY_HPP

#include <algorithm>
#include <chrono>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "citest.hpp"
#include "graph.hpp"
#include "orientation.hpp"
#include "separation.hpp"

namespace lfci {

struct PoolStrategy {
    enum class Kind { Gamma, Neighborhood, PossibleDsep, AllNodes };
    Kind kind = Kind::Neighborhood;
    int gamma = 0;

    static PoolStrategy Gamma(int gamma) {
        if (gamma < 1) throw GraphError("Gamma pools need gamma >= 1");
        return {Kind::Gamma, gamma};
    }
    static PoolStrategy Neighborhood() { return {Kind::Neighborhood, 0}; }
    static PoolStrategy PossibleDsep() { return {Kind::PossibleDsep, 0}; }
    static PoolStrategy AllNodes() { return {Kind::AllNodes, 0}; }
};

struct SkeletonState {
    MixedGraph C;
    /// Snapshot taken at the start of the current level.
    MixedGraph C_old;
};

struct RunStats {
    long n_tests = 0;
    /// Largest conditioning-set size tested.
    int m_reach = 0;
    std::vector<int> edges_removed_per_level;
    double runtime_ms = 0.0;
};

struct DiscoveryResult {
    MixedGraph graph;
    SepRecord sep;
    RunStats stats;
};

class TesterFailure : public std::runtime_error {
public:
    TesterFailure(NodeId i, NodeId j, const NodeSet& s, const std::string& why)
        : std::runtime_error("test " + std::to_string(i) + " _||_ " + std::to_string(j) + " | " + to_string(s) +
                             " failed: " + why) {}
};

class FciTooLarge : public std::runtime_error {
public:
    explicit FciTooLarge(int p)
        : std::runtime_error("fci refuses p=" + std::to_string(p) + " > 40 without the large-graph override") {}
};

/// Possible-D-SEP of i: nodes reachable from i along paths on which every
/// consecutive triple (a, b, c) has b a collider or a, c adjacent.
inline NodeSet possible_dsep(const MixedGraph& g, NodeId i) {
    const int p = g.size();
    std::vector<char> member(p, 0);
    std::vector<char> seen(static_cast<std::size_t>(p) * p, 0);  // directed edge states (a, b)
    std::vector<std::pair<NodeId, NodeId>> queue;
    for (NodeId b : g.neighbors(i)) {
        member[b] = 1;
        seen[static_cast<std::size_t>(i) * p + b] = 1;
        queue.emplace_back(i, b);
    }
    for (std::size_t h = 0; h < queue.size(); ++h) {
        auto [a, b] = queue[h];
        for (NodeId c : g.neighbors(b)) {
            if (c == a) continue;
            bool collider = g.mark_at(b, a) == Mark::Head && g.mark_at(b, c) == Mark::Head;
            if (!collider && !g.adjacent(a, c)) continue;
            std::size_t key = static_cast<std::size_t>(b) * p + c;
            if (seen[key]) continue;
            seen[key] = 1;
            member[c] = 1;
            queue.emplace_back(b, c);
        }
    }
    member[i] = 0;
    NodeSet out;
    for (NodeId v = 0; v < p; ++v)
        if (member[v]) out.push_back(v);
    return out;
}

/// Candidate conditioning nodes for the edge (i, j).
inline NodeSet pool(const PoolStrategy& strategy, const SkeletonState& state, NodeId i, NodeId j) {
    NodeSet ends = make_set({i, j});
    switch (strategy.kind) {
        case PoolStrategy::Kind::Gamma:
            return distance_pool(state.C_old, i, j, strategy.gamma);
        case PoolStrategy::Kind::Neighborhood:
            return set_difference(set_union(state.C.neighbors(i), state.C.neighbors(j)), ends);
        case PoolStrategy::Kind::PossibleDsep:
            return set_difference(possible_dsep(state.C, i), ends);
        case PoolStrategy::Kind::AllNodes: {
            NodeSet all;
            for (NodeId v = 0; v < state.C.size(); ++v)
                if (v != i && v != j) all.push_back(v);
            return all;
        }
    }
    return {};
}

struct SkeletonOptions {
    PoolStrategy strategy = PoolStrategy::Neighborhood();
    /// Largest level tested; kUnbounded runs until no pool is large enough.
    int eta = kUnbounded;
    std::optional<MixedGraph> initial;
    int first_level = 0;
    /// Compute each level's removals from C_old, then apply them together.
    bool batch = false;
    /// Worker threads for batch mode.
    int threads = 1;
};

namespace detail {

struct PairOutcome {
    bool removed = false;
    NodeSet sep;
    bool tested = false;
};

inline PairOutcome test_pair(CiTester& tester, NodeId i, NodeId j, const NodeSet& candidates, int level) {
    PairOutcome out;
    if (static_cast<int>(candidates.size()) < level) return out;
    out.tested = true;
    for_each_combination(candidates, level, [&](const NodeSet& s) {
        bool indep;
        try {
            indep = tester.decide(i, j, s);
        } catch (const std::exception& e) {
            throw TesterFailure(i, j, s, e.what());
        }
        if (indep) {
            out.removed = true;
            out.sep = s;
            return false;
        }
        return true;
    });
    return out;
}

}  // namespace detail

/// Level-wise edge removal. Each unordered adjacent pair is tested once per
/// level against size-l subsets of its pool (computed from C_old) in
/// lexicographic order; the first accepted subset removes the edge.
inline DiscoveryResult skeleton_search(CiTester& tester, int p, const SkeletonOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    if (tester.size() != p) throw GraphError("tester size does not match p");
    DiscoveryResult res;
    long count0 = tester.count();
    MixedGraph c = opt.initial ? *opt.initial : complete_undirected(p);
    if (c.size() != p) throw GraphError("initial graph size does not match p");
    for (const Edge& e : c.edges())
        if (!c.is_undirected(e.a, e.b)) throw GraphError("initial graph must be undirected");
    for (int level = opt.first_level;; ++level) {
        if (opt.eta != kUnbounded && level > opt.eta) break;
        SkeletonState view{c, c};
        std::vector<std::pair<NodeId, NodeId>> pairs;
        for (const Edge& e : c.edges()) pairs.emplace_back(e.a, e.b);
        std::vector<NodeSet> pools(pairs.size());
        bool any = false;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            pools[k] = pool(opt.strategy, view, pairs[k].first, pairs[k].second);
            if (static_cast<int>(pools[k].size()) >= level) any = true;
        }
        if (!any) break;
        int removed = 0;
        std::vector<detail::PairOutcome> outcomes(pairs.size());
        if (!opt.batch) {
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                outcomes[k] = detail::test_pair(tester, pairs[k].first, pairs[k].second, pools[k], level);
                if (outcomes[k].removed) c.remove_edge(pairs[k].first, pairs[k].second);
            }
        } else {
            int workers = std::max(1, std::min<int>(opt.threads, static_cast<int>(pairs.size())));
            std::vector<std::exception_ptr> errors(workers);
            auto work = [&](int w) {
                try {
                    for (std::size_t k = w; k < pairs.size(); k += workers)
                        outcomes[k] = detail::test_pair(tester, pairs[k].first, pairs[k].second, pools[k], level);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            };
            if (workers == 1) {
                work(0);
            } else {
                std::vector<std::thread> threads;
                for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
                for (auto& t : threads) t.join();
            }
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
            for (std::size_t k = 0; k < pairs.size(); ++k)
                if (outcomes[k].removed) c.remove_edge(pairs[k].first, pairs[k].second);
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (outcomes[k].tested) res.stats.m_reach = std::max(res.stats.m_reach, level);
            if (outcomes[k].removed) {
                res.sep.set(pairs[k].first, pairs[k].second, outcomes[k].sep);
                ++removed;
            }
        }
        res.stats.edges_removed_per_level.push_back(removed);
    }
    res.graph = std::move(c);
    res.stats.n_tests = tester.count() - count0;
    res.stats.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline DiscoveryResult skeleton_search(CiTester& tester, int p, const PoolStrategy& strategy, int eta,
                                       std::optional<MixedGraph> initial = std::nullopt) {
    SkeletonOptions opt;
    opt.strategy = strategy;
    opt.eta = eta;
    opt.initial = std::move(initial);
    return skeleton_search(tester, p, opt);
}

/// Sample-based testers tolerate conflicting orientations; oracles do not.
inline ConflictPolicy default_conflicts(const CiTester& tester) {
    return tester.kind() == "fisher-z" ? ConflictPolicy::Keep : ConflictPolicy::Throw;
}

struct PipelineOptions {
    int eta = 3;
    int gamma = 1;
    std::optional<ConflictPolicy> conflicts;
    bool batch = false;
    int threads = 1;
};

namespace detail {

inline void finish(DiscoveryResult& res, CiTester& tester, long count0, std::chrono::steady_clock::time_point t0) {
    res.stats.n_tests = tester.count() - count0;
    res.stats.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Local FCI: Gamma(gamma) pools up to level eta, then orientation with the
/// local discriminating-path rule.
inline DiscoveryResult lfci(CiTester& tester, int p, const PipelineOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    long count0 = tester.count();
    if (opt.eta < 0) throw GraphError("eta must be >= 0");
    SkeletonOptions so;
    so.strategy = PoolStrategy::Gamma(opt.gamma);
    so.eta = opt.eta;
    so.batch = opt.batch;
    so.threads = opt.threads;
    DiscoveryResult res = skeleton_search(tester, p, so);
    OrientOptions oo;
    oo.mode = OrientOptions::Mode::LfciLocal;
    oo.gamma = opt.gamma;
    oo.conflicts = opt.conflicts.value_or(default_conflicts(tester));
    res.graph = orient(res.graph, res.sep, oo);
    detail::finish(res, tester, count0, t0);
    return res;
}

inline DiscoveryResult lfci(CiTester& tester, int p, int eta, int gamma) {
    PipelineOptions opt;
    opt.eta = eta;
    opt.gamma = gamma;
    return lfci(tester, p, opt);
}

class SingularAfterRidge : public CiError {
public:
    SingularAfterRidge() : CiError("covariance plus ridge is not positive definite") {}
};

/// Support of the ridge-regularized precision matrix: i - j iff
/// |Theta_ij| > tau sqrt(Theta_ii Theta_jj).
inline MixedGraph estimate_moral_graph(const CovEstimate& est, double ridge, double tau) {
    const Eigen::Index p = est.sigma.rows();
    Matrix reg = est.sigma + ridge * Matrix::Identity(p, p);
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() != Eigen::Success) throw SingularAfterRidge();
    Matrix theta = llt.solve(Matrix::Identity(p, p));
    MixedGraph g(static_cast<int>(p));
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (std::abs(theta(i, j)) > tau * std::sqrt(theta(i, i) * theta(j, j)))
                g.add_undirected(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return g;
}

/// lFCI started from a moral graph: levels 0..eta-1 only. Pairs already
/// non-adjacent in the moral graph get SEP = moral neighbours of the
/// smaller-index node (a blanket separates a node from every non-member).
inline DiscoveryResult lfci_mb(CiTester& tester, int p, const PipelineOptions& opt, const MixedGraph& moral) {
    auto t0 = std::chrono::steady_clock::now();
    long count0 = tester.count();
    if (moral.size() != p) throw GraphError("moral graph size does not match p");
    SkeletonOptions so;
    so.strategy = PoolStrategy::Gamma(opt.gamma);
    so.eta = opt.eta - 1;
    so.first_level = 0;
    so.initial = skeleton(moral);
    so.batch = opt.batch;
    so.threads = opt.threads;
    DiscoveryResult res = skeleton_search(tester, p, so);
    for (NodeId i = 0; i < p; ++i)
        for (NodeId j = i + 1; j < p; ++j)
            if (!moral.adjacent(i, j)) res.sep.set(i, j, moral.neighbors(i));
    OrientOptions oo;
    oo.mode = OrientOptions::Mode::LfciLocal;
    oo.gamma = opt.gamma;
    oo.conflicts = opt.conflicts.value_or(default_conflicts(tester));
    res.graph = orient(res.graph, res.sep, oo);
    detail::finish(res, tester, count0, t0);
    return res;
}

inline DiscoveryResult lfci_mb(CiTester& tester, int p, int eta, int gamma, const MixedGraph& moral) {
    PipelineOptions opt;
    opt.eta = eta;
    opt.gamma = gamma;
    return lfci_mb(tester, p, opt, moral);
}

struct FciOptions {
    bool allow_large = false;
    /// Largest subset size tried in the possible-D-SEP phase.
    int max_pdsep = kUnbounded;
    std::optional<ConflictPolicy> conflicts;
};

inline constexpr int kFciMaxNodes = 40;

/// FCI: neighbourhood skeleton, v-structures, possible-D-SEP re-testing,
/// then orientation with the original discriminating-path rule.
inline DiscoveryResult fci(CiTester& tester, int p, const FciOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    long count0 = tester.count();
    if (p > kFciMaxNodes && !opt.allow_large) throw FciTooLarge(p);
    ConflictPolicy conflicts = opt.conflicts.value_or(default_conflicts(tester));
    DiscoveryResult res = skeleton_search(tester, p, PoolStrategy::Neighborhood(), kUnbounded);
    // v-structures only; possible-D-SEP reads colliders from this graph
    MixedGraph pre(p);
    for (const Edge& e : res.graph.edges()) pre.add_edge(e.a, e.b, Mark::Circle, Mark::Circle);
    for (NodeId b = 0; b < p; ++b) {
        const NodeSet nb = pre.neighbors(b);
        for (std::size_t x = 0; x < nb.size(); ++x)
            for (std::size_t y = x + 1; y < nb.size(); ++y) {
                NodeId a = nb[x], c = nb[y];
                if (pre.adjacent(a, c)) continue;
                const NodeSet* s = res.sep.find(a, c);
                if (s && !contains(*s, b)) {
                    pre.set_mark(b, a, Mark::Head);
                    pre.set_mark(b, c, Mark::Head);
                }
            }
    }
    std::vector<NodeSet> pdsep(p);
    for (NodeId v = 0; v < p; ++v) pdsep[v] = possible_dsep(pre, v);
    int reach = res.stats.m_reach;
    for (const Edge& e : pre.edges()) {
        NodeId i = e.a, j = e.b;
        NodeSet pools[2] = {set_difference(pdsep[i], {j}), set_difference(pdsep[j], {i})};
        std::size_t largest = std::max(pools[0].size(), pools[1].size());
        if (opt.max_pdsep != kUnbounded) largest = std::min<std::size_t>(largest, opt.max_pdsep);
        bool removed = false;
        for (std::size_t k = 1; k <= largest && !removed; ++k)
            for (const NodeSet& pl : pools) {
                if (pl.size() < k) continue;
                reach = std::max(reach, static_cast<int>(k));
                auto out = detail::test_pair(tester, i, j, pl, static_cast<int>(k));
                if (out.removed) {
                    res.graph.remove_edge(i, j);
                    res.sep.set(i, j, out.sep);
                    removed = true;
                    break;
                }
            }
    }
    res.stats.m_reach = reach;
    OrientOptions oo;
    oo.mode = OrientOptions::Mode::Fci;
    oo.conflicts = conflicts;
    res.graph = orient(res.graph, res.sep, oo);
    detail::finish(res, tester, count0, t0);
    return res;
}

struct PcVariant {
    enum class Kind { Standard, Reduced };
    Kind kind = Kind::Standard;
    int eta = kUnbounded;

    static PcVariant Standard() { return {}; }
    static PcVariant Reduced(int eta) { return {Kind::Reduced, eta}; }
};

/// PC (neighbourhood pools, unbounded) or reduced PC (all-node pools up to
/// level eta); both end with Meek orientation into a CPDAG.
inline DiscoveryResult pc(CiTester& tester, int p, const PcVariant& variant = {}) {
    auto t0 = std::chrono::steady_clock::now();
    long count0 = tester.count();
    DiscoveryResult res = variant.kind == PcVariant::Kind::Standard
                              ? skeleton_search(tester, p, PoolStrategy::Neighborhood(), kUnbounded)
                              : skeleton_search(tester, p, PoolStrategy::AllNodes(), variant.eta);
    res.graph = orient_cpdag(res.graph, res.sep);
    detail::finish(res, tester, count0, t0);
    return res;
}

}  // namespace lfci

#endif  // LFCI_DISCOVERY_HPP
