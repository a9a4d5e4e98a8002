#ifndef LFCI_TEST_LEMMA_CHECKS_HPP
#define LFCI_TEST_LEMMA_CHECKS_HPP

#include <sstream>
#include <string>

#include "helpers.hpp"

namespace lfci::testing {

struct LemmaTally {
    int instances = 0;
    long pairs = 0;
    int violations = 0;
    /// Instances drawn but rejected for failing the premises.
    int rejected = 0;
    /// Largest bound value seen among accepted instances.
    int max_bound = 0;
    /// Accepted instances whose bound needed a nonzero degree part.
    int hybrid = 0;
    std::string first_violation;

    void violation(const MixedGraph& g, const std::string& what) {
        if (violations++ == 0) first_violation = what + "\n" + serialize_graph(g);
    }
};

/// Smallest eta for which the skeleton has the (eta, gamma) local path
/// property.
inline int min_path_eta(const MixedGraph& g, int gamma) {
    MixedGraph skel = skeleton(g);
    long worst = 0;
    for (NodeId i = 0; i < g.size(); ++i)
        for (NodeId j = i + 1; j < g.size(); ++j)
            if (!g.adjacent(i, j)) worst = std::max(worst, count_short_paths(skel, i, j, gamma));
    return static_cast<int>(worst);
}

inline MixedGraph sparse_dag(int p, Rng& rng) {
    GraphFamily f;
    f.kind = rng.coin(0.5) ? GraphFamily::Kind::ErdosRenyi : GraphFamily::Kind::PowerLaw;
    f.p = p;
    f.degree = rng.uniform(1.6, 2.8);
    return generate_graph(f, rng.next());
}

inline MixedGraph sparse_mag(int p_obs, Rng& rng) {
    int latents = 1 + static_cast<int>(rng.below(3));
    MixedGraph dag = sparse_dag(p_obs + latents, rng);
    Partition part = random_partition(p_obs + latents, static_cast<double>(latents) / (p_obs + latents), rng);
    return latent_project_fast(dag, part);
}

/// DAGs with the (eta, gamma) property: for i not in an(j), pa(G_gamma(i,j), i)
/// is a local separator with at most eta nodes.
inline LemmaTally check_parent_separator(int count, std::uint64_t seed) {
    LemmaTally t;
    Rng rng(seed);
    while (t.instances < count) {
        int p = 10 + static_cast<int>(rng.below(3));
        int gamma = 2 + static_cast<int>(rng.below(3));
        MixedGraph g = sparse_dag(p, rng);
        int eta = min_path_eta(g, gamma);
        if (eta > 4) {
            ++t.rejected;
            continue;
        }
        ++t.instances;
        t.max_bound = std::max(t.max_bound, eta);
        for (NodeId a = 0; a < p; ++a)
            for (NodeId b = a + 1; b < p; ++b) {
                if (g.adjacent(a, b)) continue;
                ++t.pairs;
                NodeId i = contains(ancestors(g, {b}), a) ? b : a;
                NodeId j = i == a ? b : a;
                NodeSet local = local_nodes(g, i, j, gamma);
                NodeSet s;
                for (NodeId v : g.parents(i))
                    if (contains(local, v)) s.push_back(v);
                if (static_cast<int>(s.size()) > eta || !is_local_separator(g, i, j, s, gamma)) {
                    std::ostringstream os;
                    os << "pair (" << i << "," << j << ") gamma=" << gamma << " eta=" << eta << " S=" << to_string(s);
                    t.violation(g, os.str());
                }
            }
    }
    return t;
}

/// MAGs with the (eta, gamma) property for eta <= 3 satisfy L(G, gamma) <= eta.
inline LemmaTally check_mag_separator_size(int count, std::uint64_t seed) {
    LemmaTally t;
    Rng rng(seed);
    while (t.instances < count) {
        int p = 10 + static_cast<int>(rng.below(3));
        int gamma = 2 + static_cast<int>(rng.below(3));
        MixedGraph g = sparse_mag(p, rng);
        int eta = min_path_eta(g, gamma);
        if (eta > 3) {
            ++t.rejected;
            continue;
        }
        ++t.instances;
        t.max_bound = std::max(t.max_bound, eta);
        for (NodeId i = 0; i < p; ++i)
            for (NodeId j = i + 1; j < p; ++j) {
                if (g.adjacent(i, j)) continue;
                ++t.pairs;
                if (!find_local_separator(g, {i, j, gamma, eta})) {
                    std::ostringstream os;
                    os << "pair (" << i << "," << j << ") gamma=" << gamma << " has no local separator of size <= " << eta;
                    t.violation(g, os.str());
                }
            }
    }
    return t;
}

/// MAGs with the (eta, gamma) property for eta <= 4 satisfy
/// L^mb(G, gamma) <= max(0, eta - 1).
inline LemmaTally check_blanket_separator_size(int count, std::uint64_t seed) {
    LemmaTally t;
    Rng rng(seed);
    while (t.instances < count) {
        int p = 10 + static_cast<int>(rng.below(3));
        int gamma = 2 + static_cast<int>(rng.below(3));
        MixedGraph g = sparse_mag(p, rng);
        int eta = min_path_eta(g, gamma);
        if (eta > 4) {
            ++t.rejected;
            continue;
        }
        ++t.instances;
        t.max_bound = std::max(t.max_bound, eta);
        int cap = std::max(0, eta - 1);
        std::vector<char> done(static_cast<std::size_t>(p) * p, 0);
        for (NodeId j = 0; j < p; ++j)
            for (NodeId i : markov_blanket(g, j, gamma)) {
                NodeId a = std::min(i, j), b = std::max(i, j);
                if (g.adjacent(a, b) || done[static_cast<std::size_t>(a) * p + b]) continue;
                done[static_cast<std::size_t>(a) * p + b] = 1;
                ++t.pairs;
                if (!find_local_separator(g, {a, b, gamma, cap})) {
                    std::ostringstream os;
                    os << "blanket pair (" << a << "," << b << ") gamma=" << gamma << " eta=" << eta
                       << " has no local separator of size <= " << cap;
                    t.violation(g, os.str());
                }
            }
    }
    return t;
}

/// Nodes that lie on no simple i-j path using a bidirected edge.
inline NodeSet off_bidirected_paths(const MixedGraph& g, NodeId i, NodeId j) {
    std::vector<char> on(g.size(), 0);
    for_each_simple_path(g, i, j, kUnbounded, [&](const std::vector<NodeId>& path) {
        bool bidirected = false;
        for (std::size_t k = 0; k + 1 < path.size() && !bidirected; ++k) bidirected = g.is_bidirected(path[k], path[k + 1]);
        if (bidirected)
            for (NodeId v : path) on[v] = 1;
        return true;
    });
    NodeSet out;
    for (NodeId v = 0; v < g.size(); ++v)
        if (!on[v] && v != i && v != j) out.push_back(v);
    return out;
}

/// Hybrid MAGs: for each non-adjacent pair a set M inside the nodes off
/// bidirected paths with G[M + {i,j}] of degree <= Delta and G[V \ M] with
/// the (eta0, gamma) property, eta0 <= 3. Checks L <= Delta + eta0 and
/// L^mb <= max(0, Delta + eta0 - 1). Candidate sets per pair are the empty
/// set and the full off-path set; (Delta, eta0) is the smallest-sum global
/// choice that every pair can meet.
inline LemmaTally check_hybrid_separator_size(int count, std::uint64_t seed) {
    LemmaTally t;
    Rng rng(seed);
    while (t.instances < count) {
        GraphFamily f;
        f.kind = GraphFamily::Kind::Hybrid;
        f.hybrid_base = rng.coin(0.5) ? GraphFamily::Kind::ErdosRenyi : GraphFamily::Kind::WattsStrogatz;
        int latents = 1 + static_cast<int>(rng.below(2));
        int p_obs = 10 + static_cast<int>(rng.below(3));
        f.p = p_obs + latents;
        f.degree = rng.uniform(1.6, 2.4);
        f.hybrid_block = 4 + static_cast<int>(rng.below(3));
        f.hybrid_delta = 2 + static_cast<int>(rng.below(2));
        int gamma = 2 + static_cast<int>(rng.below(3));
        MixedGraph dag = generate_graph(f, rng.next());
        Partition part = random_partition(f.p, static_cast<double>(latents) / f.p, rng);
        MixedGraph g = latent_project_fast(dag, part);
        const int p = g.size();

        struct Option {
            int delta, eta0;
        };
        std::vector<std::vector<Option>> options;
        for (NodeId i = 0; i < p; ++i)
            for (NodeId j = i + 1; j < p; ++j) {
                if (g.adjacent(i, j)) continue;
                std::vector<Option> opts;
                NodeSet off = off_bidirected_paths(g, i, j);
                std::vector<NodeSet> candidates{NodeSet{}};
                if (!off.empty()) candidates.push_back(off);
                for (const NodeSet& m : candidates) {
                    NodeSet with_ij = set_union(m, make_set({i, j}));
                    NodeSet rest;
                    for (NodeId v = 0; v < p; ++v)
                        if (!contains(m, v)) rest.push_back(v);
                    int delta = induced_subgraph(g, with_ij).max_degree();
                    int eta0 = min_path_eta(induced_subgraph(g, rest), gamma);
                    if (eta0 <= 3) opts.push_back({delta, eta0});
                }
                options.push_back(opts);
            }
        // smallest delta + eta0 that every pair can meet
        int best_delta = -1, best_eta0 = -1;
        for (int sum = 0; sum <= p + 3 && best_delta < 0; ++sum)
            for (int eta0 = 0; eta0 <= std::min(3, sum) && best_delta < 0; ++eta0) {
                int delta = sum - eta0;
                bool ok = true;
                for (const auto& opts : options) {
                    bool met = false;
                    for (const Option& o : opts) met = met || (o.delta <= delta && o.eta0 <= eta0);
                    ok = ok && met;
                }
                if (ok) {
                    best_delta = delta;
                    best_eta0 = eta0;
                }
            }
        if (best_delta < 0) {
            ++t.rejected;
            continue;
        }
        ++t.instances;
        t.hybrid += best_delta > 0;
        int eta = best_delta + best_eta0;
        t.max_bound = std::max(t.max_bound, eta);
        for (NodeId i = 0; i < p; ++i)
            for (NodeId j = i + 1; j < p; ++j) {
                if (g.adjacent(i, j)) continue;
                ++t.pairs;
                if (!find_local_separator(g, {i, j, gamma, eta})) {
                    std::ostringstream os;
                    os << "pair (" << i << "," << j << ") gamma=" << gamma << " delta=" << best_delta
                       << " eta0=" << best_eta0 << " has no local separator of size <= " << eta;
                    t.violation(g, os.str());
                }
            }
        int cap = std::max(0, eta - 1);
        for (NodeId j = 0; j < p; ++j)
            for (NodeId i : markov_blanket(g, j, gamma)) {
                if (i > j || g.adjacent(i, j)) continue;
                if (!find_local_separator(g, {i, j, gamma, cap})) {
                    std::ostringstream os;
                    os << "blanket pair (" << i << "," << j << ") gamma=" << gamma << " has no local separator of size <= "
                       << cap;
                    t.violation(g, os.str());
                }
            }
    }
    return t;
}

}  // namespace lfci::testing

#endif  // LFCI_TEST_LEMMA_CHECKS_HPP
