#ifndef LFCI_SEM_HPP
#define LFCI_SEM_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "citest.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "separation.hpp"

namespace lfci {

class SemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public SemError {
public:
    NotPositiveDefinite() : SemError("error covariance is not positive definite") {}
};

class SingularSystem : public SemError {
public:
    SingularSystem() : SemError("I - B is singular") {}
};

class ZeroVariance : public SemError {
public:
    ZeroVariance() : SemError("non-positive variance on the diagonal") {}
};

/// W = B W + eps, eps ~ N(0, Omega). B(i,j) != 0 only for j -> i.
struct SemModel {
    MixedGraph graph;
    Matrix B;
    Matrix Omega;

    int size() const { return graph.size(); }
};

struct SemParams {
    double weight_low = 0.1;
    double weight_high = 1.0;
    double omega_low = 1.0;
    double omega_high = 1.0;
};

namespace detail {

inline bool is_pd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    return llt.info() == Eigen::Success;
}

}  // namespace detail

/// Random parameters for a DAG or MAG. Directed weights are uniform on
/// +-[low, high); bidirected and undirected entries are scaled draws from
/// +-[0.1, 0.5), halved until the relevant block is positive definite.
inline SemModel random_sem(const MixedGraph& graph, const SemParams& params, std::uint64_t seed) {
    if (graph.has_circles()) throw GraphError("SEM needs a graph without circle marks");
    Rng rng(seed);
    const int p = graph.size();
    SemModel m{graph, Matrix::Zero(p, p), Matrix::Zero(p, p)};
    for (NodeId v = 0; v < p; ++v) m.Omega(v, v) = rng.uniform(params.omega_low, params.omega_high);
    std::vector<Edge> bidirected, undirected;
    for (const Edge& e : graph.edges()) {
        if (graph.is_parent(e.a, e.b) || graph.is_parent(e.b, e.a)) {
            NodeId from = graph.is_parent(e.a, e.b) ? e.a : e.b;
            NodeId to = from == e.a ? e.b : e.a;
            double w = rng.uniform(params.weight_low, params.weight_high);
            m.B(to, from) = rng.coin(0.5) ? w : -w;
        } else if (graph.is_bidirected(e.a, e.b)) {
            bidirected.push_back(e);
        } else if (graph.is_undirected(e.a, e.b)) {
            undirected.push_back(e);
        } else {
            throw GraphError("unsupported edge type in SEM graph");
        }
    }
    std::vector<double> draws;
    for (std::size_t k = 0; k < bidirected.size(); ++k) {
        double w = rng.uniform(0.1, 0.5);
        draws.push_back(rng.coin(0.5) ? w : -w);
    }
    for (int attempt = 0;; ++attempt) {
        if (attempt == 100) throw NotPositiveDefinite();
        double scale = std::ldexp(1.0, -attempt);
        for (std::size_t k = 0; k < bidirected.size(); ++k) {
            const Edge& e = bidirected[k];
            double v = scale * draws[k] * std::sqrt(m.Omega(e.a, e.a) * m.Omega(e.b, e.b));
            m.Omega(e.a, e.b) = m.Omega(e.b, e.a) = v;
        }
        if (detail::is_pd(m.Omega)) break;
    }
    if (!undirected.empty()) {
        // undirected part: precision block supported on the undirected edges
        NodeSet u;
        for (const Edge& e : undirected) u.insert(u.end(), {e.a, e.b});
        u = make_set(u);
        const int k = static_cast<int>(u.size());
        auto pos = [&](NodeId v) { return static_cast<int>(std::lower_bound(u.begin(), u.end(), v) - u.begin()); };
        std::vector<double> udraws;
        for (std::size_t t = 0; t < undirected.size(); ++t) {
            double w = rng.uniform(0.1, 0.5);
            udraws.push_back(rng.coin(0.5) ? w : -w);
        }
        Matrix prec = Matrix::Zero(k, k);
        for (int a = 0; a < k; ++a) prec(a, a) = 1.0 / m.Omega(u[a], u[a]);
        for (int attempt = 0;; ++attempt) {
            if (attempt == 100) throw NotPositiveDefinite();
            double scale = std::ldexp(1.0, -attempt);
            for (std::size_t t = 0; t < undirected.size(); ++t) {
                int a = pos(undirected[t].a), b = pos(undirected[t].b);
                prec(a, b) = prec(b, a) = scale * udraws[t] * std::sqrt(prec(a, a) * prec(b, b));
            }
            if (detail::is_pd(prec)) break;
        }
        Matrix cov = prec.inverse();
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) m.Omega(u[a], u[b]) = cov(a, b);
        if (!detail::is_pd(m.Omega)) throw NotPositiveDefinite();
    }
    return m;
}

namespace detail {

inline Eigen::PartialPivLU<Matrix> i_minus_b(const Matrix& b) {
    Matrix a = Matrix::Identity(b.rows(), b.cols()) - b;
    Eigen::FullPivLU<Matrix> check(a);
    if (!check.isInvertible()) throw SingularSystem();
    return Eigen::PartialPivLU<Matrix>(a);
}

}  // namespace detail

/// Sigma = (I - B)^{-1} Omega (I - B)^{-T}.
inline Matrix covariance(const Matrix& b, const Matrix& omega) {
    auto lu = detail::i_minus_b(b);
    Matrix a_omega = lu.solve(omega);
    Matrix sigma = lu.solve(Matrix(a_omega.transpose()));
    return 0.5 * (sigma + sigma.transpose());
}

inline Matrix covariance(const SemModel& m) { return covariance(m.B, m.Omega); }

/// n x p matrix of i.i.d. draws.
inline Matrix sample(const SemModel& m, long n, std::uint64_t seed) {
    const int p = m.size();
    if (n == 0) return Matrix(0, p);
    auto lu = detail::i_minus_b(m.B);
    Eigen::LLT<Matrix> llt(m.Omega);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite();
    Matrix l = llt.matrixL();
    Rng rng(seed);
    Matrix z(p, n);
    for (long r = 0; r < n; ++r)
        for (int c = 0; c < p; ++c) z(c, r) = rng.normal();
    Matrix eps = l * z;
    Matrix w = lu.solve(eps);
    return w.transpose();
}

inline Matrix standardize(const Matrix& sigma) {
    Vector d = sigma.diagonal();
    for (Eigen::Index k = 0; k < d.size(); ++k)
        if (!(d(k) > 0.0)) throw ZeroVariance();
    Vector inv = d.cwiseSqrt().cwiseInverse();
    return inv.asDiagonal() * sigma * inv.asDiagonal();
}

/// Lambda Omega Lambda^T with Lambda = sum_{r=0}^{gamma} B^r.
inline Matrix short_trek_cov(const Matrix& b, const Matrix& omega, int gamma) {
    const Eigen::Index p = b.rows();
    Matrix lambda = Matrix::Identity(p, p);
    Matrix power = Matrix::Identity(p, p);
    for (int r = 1; r <= gamma; ++r) {
        power = power * b;
        lambda += power;
    }
    return lambda * omega * lambda.transpose();
}

inline Matrix short_trek_cov(const SemModel& m, int gamma) { return short_trek_cov(m.B, m.Omega, gamma); }

inline double spectral_norm(const Matrix& b) {
    if (b.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(b);
    return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Treks

inline constexpr int kMaxTrekNodes = 10;

struct Trek {
    /// Directed path from the left top down to i, top first.
    std::vector<NodeId> left;
    /// Directed path from the right top down to j, top first.
    std::vector<NodeId> right;
    /// Bidirected edge (s, t) joining the tops; absent when they coincide.
    bool has_middle = false;

    NodeId source() const { return left.back(); }
    NodeId target() const { return right.back(); }
    int length() const { return static_cast<int>(left.size() + right.size()) - 2; }
};

namespace detail {

inline void check_trek_graph(const MixedGraph& g) {
    if (g.size() > kMaxTrekNodes) throw GraphTooLarge(g.size(), kMaxTrekNodes);
    for (const Edge& e : g.edges())
        if (!g.is_parent(e.a, e.b) && !g.is_parent(e.b, e.a) && !g.is_bidirected(e.a, e.b))
            throw GraphError("treks need directed and bidirected edges only");
}

/// Directed paths ending at v (top first), at most max_len edges.
inline std::vector<std::vector<NodeId>> paths_into(const MixedGraph& g, NodeId v, int max_len) {
    std::vector<std::vector<NodeId>> out;
    std::vector<NodeId> rev{v};
    std::function<void()> grow = [&]() {
        out.emplace_back(rev.rbegin(), rev.rend());
        if (static_cast<int>(rev.size()) - 1 >= max_len) return;
        for (NodeId u : g.neighbors(rev.back()))
            if (g.is_parent(u, rev.back()) && std::find(rev.begin(), rev.end(), u) == rev.end()) {
                rev.push_back(u);
                grow();
                rev.pop_back();
            }
    };
    grow();
    return out;
}

}  // namespace detail

/// All treks between i and j with |P_L| + |P_R| <= max_total_len.
inline std::vector<Trek> enumerate_treks(const SemModel& m, NodeId i, NodeId j, int max_total_len) {
    const MixedGraph& g = m.graph;
    detail::check_trek_graph(g);
    auto left = detail::paths_into(g, i, max_total_len);
    auto right = detail::paths_into(g, j, max_total_len);
    std::vector<Trek> out;
    for (const auto& pl : left)
        for (const auto& pr : right) {
            int len = static_cast<int>(pl.size() + pr.size()) - 2;
            if (len > max_total_len) continue;
            NodeId s = pl.front(), t = pr.front();
            if (s == t)
                out.push_back({pl, pr, false});
            else if (g.is_bidirected(s, t))
                out.push_back({pl, pr, true});
        }
    return out;
}

inline double trek_monomial(const SemModel& m, const Trek& t) {
    double v = m.Omega(t.left.front(), t.right.front());
    for (std::size_t k = 0; k + 1 < t.left.size(); ++k) v *= m.B(t.left[k + 1], t.left[k]);
    for (std::size_t k = 0; k + 1 < t.right.size(); ++k) v *= m.B(t.right[k + 1], t.right[k]);
    return v;
}

/// sum over trek systems T from C to D of sign(T) m_T. By default only
/// systems without sided intersection are summed (pairwise vertex-disjoint
/// left sides and pairwise vertex-disjoint right sides).
inline double det_via_treks(const SemModel& m, const NodeSet& c, const NodeSet& d, bool include_intersecting = false) {
    detail::check_trek_graph(m.graph);
    if (c.size() != d.size() || c.size() > 4) throw GraphError("det_via_treks needs |C| = |D| <= 4");
    const int k = static_cast<int>(c.size());
    const int max_len = 2 * m.size();
    std::vector<std::vector<std::vector<Trek>>> treks(k, std::vector<std::vector<Trek>>(k));
    std::vector<std::vector<std::vector<double>>> mono(k, std::vector<std::vector<double>>(k));
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            treks[a][b] = enumerate_treks(m, c[a], d[b], max_len);
            for (const Trek& t : treks[a][b]) mono[a][b].push_back(trek_monomial(m, t));
        }
    std::vector<int> perm(k);
    for (int a = 0; a < k; ++a) perm[a] = a;
    double total = 0.0;
    do {
        int inversions = 0;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (perm[a] > perm[b]) ++inversions;
        double sign = inversions % 2 ? -1.0 : 1.0;
        std::vector<int> left_used(m.size(), 0), right_used(m.size(), 0);
        std::function<double(int)> pick = [&](int a) -> double {
            if (a == k) return 1.0;
            double acc = 0.0;
            const auto& options = treks[a][perm[a]];
            for (std::size_t t = 0; t < options.size(); ++t) {
                const Trek& tr = options[t];
                if (!include_intersecting) {
                    bool clash = false;
                    for (NodeId v : tr.left) clash |= left_used[v] > 0;
                    for (NodeId v : tr.right) clash |= right_used[v] > 0;
                    if (clash) continue;
                }
                for (NodeId v : tr.left) ++left_used[v];
                for (NodeId v : tr.right) ++right_used[v];
                acc += mono[a][perm[a]][t] * pick(a + 1);
                for (NodeId v : tr.left) --left_used[v];
                for (NodeId v : tr.right) --right_used[v];
            }
            return acc;
        };
        total += sign * pick(0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

/// rho* = max over non-adjacent pairs of the smallest |rho(i,j|S)| over
/// gamma-local-graph separators S with |S| <= eta. Infinity when some pair
/// has no such separator.
inline double local_corr_residual(const Matrix& sigma, const MixedGraph& mag, int gamma, int eta) {
    double worst = 0.0;
    for (NodeId i = 0; i < mag.size(); ++i)
        for (NodeId j = i + 1; j < mag.size(); ++j) {
            if (mag.adjacent(i, j)) continue;
            NodeSet nodes = local_nodes(mag, i, j, gamma);
            std::vector<char> mask(mag.size(), 0);
            for (NodeId v : nodes) mask[v] = 1;
            NodeSet pool = set_difference(nodes, {i, j});
            double best = std::numeric_limits<double>::infinity();
            int cap = std::min<int>(eta, pool.size());
            for (int k = 0; k <= cap && best > 0.0; ++k)
                for_each_combination(pool, k, [&](const NodeSet& s) {
                    if (m_separated(mag, i, j, s, &mask)) best = std::min(best, std::abs(partial_correlation(sigma, i, j, s)));
                    return best > 0.0;
                });
            worst = std::max(worst, best);
        }
    return worst;
}

inline double local_corr_residual(const SemModel& m, int gamma, int eta) {
    return local_corr_residual(covariance(m), m.graph, gamma, eta);
}

// ---------------------------------------------------------------------------
// Serialization: graph file plus "i,j,value" triples for B and Omega.

inline void write_triples(const Matrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SemError("cannot write " + path);
    out.imbue(std::locale::classic());
    out.precision(17);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            if (a(r, c) != 0.0) out << r << "," << c << "," << a(r, c) << "\n";
}

inline Matrix read_triples(const std::string& path, int p) {
    std::ifstream in(path);
    if (!in) throw SemError("cannot open " + path);
    Matrix a = Matrix::Zero(p, p);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        long r, c;
        double v;
        char c1, c2;
        if (!(ls >> r >> c1 >> c >> c2 >> v) || c1 != ',' || c2 != ',' || r < 0 || c < 0 || r >= p || c >= p)
            throw SemError(path + ": bad triple on line " + std::to_string(lineno));
        a(r, c) = v;
    }
    return a;
}

inline void save_sem(const SemModel& m, const std::string& prefix) {
    write_graph_file(m.graph, prefix + ".graph");
    write_triples(m.B, prefix + ".B.csv");
    write_triples(m.Omega, prefix + ".Omega.csv");
}

inline SemModel load_sem(const std::string& prefix) {
    SemModel m;
    m.graph = read_graph_file(prefix + ".graph");
    m.B = read_triples(prefix + ".B.csv", m.size());
    m.Omega = read_triples(prefix + ".Omega.csv", m.size());
    return m;
}

}  // namespace lfci

#endif  // LFCI_SEM_HPP
