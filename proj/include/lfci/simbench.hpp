#ifndef LFCI_SIMBENCH_HPP
#define LFCI_SIMBENCH_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "citest.hpp"
#include "discovery.hpp"
#include "graph.hpp"
#include "projection.hpp"
#include "rng.hpp"
#include "sem.hpp"
#include "separation.hpp"

namespace lfci {

struct GraphFamily {
    enum class Kind { ErdosRenyi, PowerLaw, WattsStrogatz, Hybrid };
    Kind kind = Kind::ErdosRenyi;
    int p = 20;
    double degree = 2.0;
    /// Hybrid only: size and degree bound of the bounded-degree block.
    int hybrid_block = 0;
    int hybrid_delta = 2;
    /// Hybrid only: family of the remaining nodes.
    Kind hybrid_base = Kind::ErdosRenyi;
    /// Watts-Strogatz rewiring probability.
    double rewire = 0.1;
};

inline std::string family_name(GraphFamily::Kind k) {
    switch (k) {
        case GraphFamily::Kind::ErdosRenyi: return "ER";
        case GraphFamily::Kind::PowerLaw: return "PL";
        case GraphFamily::Kind::WattsStrogatz: return "WS";
        case GraphFamily::Kind::Hybrid: return "HY";
    }
    return "?";
}

inline GraphFamily::Kind parse_family(const std::string& s) {
    if (s == "ER" || s == "er" || s == "erdos_renyi") return GraphFamily::Kind::ErdosRenyi;
    if (s == "PL" || s == "pl" || s == "power_law") return GraphFamily::Kind::PowerLaw;
    if (s == "WS" || s == "ws" || s == "watts_strogatz") return GraphFamily::Kind::WattsStrogatz;
    if (s == "HY" || s == "hy" || s == "hybrid") return GraphFamily::Kind::Hybrid;
    throw std::invalid_argument("unknown graph family '" + s + "'");
}

namespace detail {

using EdgeList = std::vector<std::pair<int, int>>;

struct EdgeSet {
    explicit EdgeSet(int p) : p(p), has(static_cast<std::size_t>(p) * p, 0) {}
    bool add(int a, int b) {
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        char& h = has[static_cast<std::size_t>(a) * p + b];
        if (h) return false;
        h = 1;
        list.emplace_back(a, b);
        return true;
    }
    bool contains(int a, int b) const {
        if (a > b) std::swap(a, b);
        return has[static_cast<std::size_t>(a) * p + b] != 0;
    }
    int p;
    std::vector<char> has;
    EdgeList list;
};

inline int target_edges(int p, double degree) {
    long max_edges = static_cast<long>(p) * (p - 1) / 2;
    return static_cast<int>(std::min<long>(max_edges, std::lround(p * degree / 2.0)));
}

inline void add_uniform_edges(EdgeSet& es, int target, Rng& rng) {
    while (static_cast<int>(es.list.size()) < target) es.add(rng.index(es.p), rng.index(es.p));
}

inline EdgeSet erdos_renyi(int p, double degree, Rng& rng) {
    EdgeSet es(p);
    add_uniform_edges(es, target_edges(p, degree), rng);
    return es;
}

/// Preferential attachment with one edge per new node, topped up with
/// uniform edges to reach the target average degree.
inline EdgeSet power_law(int p, double degree, Rng& rng) {
    EdgeSet es(p);
    std::vector<int> ends;  // node repeated once per incident edge
    for (int v = 1; v < p; ++v) {
        int u = ends.empty() ? 0 : ends[rng.below(ends.size())];
        es.add(u, v);
        ends.push_back(u);
        ends.push_back(v);
    }
    add_uniform_edges(es, target_edges(p, degree), rng);
    return es;
}

/// Ring lattice (degree / 2 neighbours per side) with rewiring.
inline EdgeSet watts_strogatz(int p, double degree, double rewire, Rng& rng) {
    EdgeSet es(p);
    int half = std::max(1, static_cast<int>(std::lround(degree / 2.0)));
    EdgeList ring;
    for (int v = 0; v < p; ++v)
        for (int k = 1; k <= half; ++k) ring.emplace_back(v, (v + k) % p);
    std::vector<char> keep(ring.size(), 1);
    for (auto [a, b] : ring) es.add(a, b);
    for (std::size_t e = 0; e < ring.size(); ++e) {
        if (!rng.coin(rewire)) continue;
        auto [a, b] = ring[e];
        int c = rng.index(p);
        if (c == a || es.contains(a, c)) continue;
        // remove (a, b), add (a, c)
        std::size_t ia = static_cast<std::size_t>(std::min(a, b)) * p + std::max(a, b);
        es.has[ia] = 0;
        es.list.erase(std::find(es.list.begin(), es.list.end(), std::make_pair(std::min(a, b), std::max(a, b))));
        es.add(a, c);
    }
    return es;
}

/// Random graph whose nodes [0, block) have degree at most delta among
/// themselves; the rest follow `base`, with sparse cross edges.
inline EdgeSet hybrid(const GraphFamily& f, Rng& rng) {
    const int p = f.p, a = std::clamp(f.hybrid_block, 0, p);
    EdgeSet es(p);
    std::vector<int> deg(p, 0);
    int tries = 4 * a * std::max(1, f.hybrid_delta);
    for (int t = 0; t < tries; ++t) {
        int u = rng.index(std::max(a, 1)), v = rng.index(std::max(a, 1));
        if (a < 2 || u == v || deg[u] >= f.hybrid_delta || deg[v] >= f.hybrid_delta) continue;
        if (es.add(u, v)) {
            ++deg[u];
            ++deg[v];
        }
    }
    GraphFamily rest = f;
    rest.kind = f.hybrid_base;
    rest.p = p - a;
    if (rest.p >= 2) {
        EdgeSet sub = rest.kind == GraphFamily::Kind::PowerLaw      ? power_law(rest.p, f.degree, rng)
                      : rest.kind == GraphFamily::Kind::WattsStrogatz ? watts_strogatz(rest.p, f.degree, f.rewire, rng)
                                                                      : erdos_renyi(rest.p, f.degree, rng);
        for (auto [u, v] : sub.list) es.add(u + a, v + a);
    }
    for (int u = 0; u < a && rest.p > 0; ++u)
        if (rng.coin(0.3)) es.add(u, a + rng.index(rest.p));
    return es;
}

}  // namespace detail

/// Random DAG: undirected structure from the family, oriented along a
/// uniformly random node order.
inline MixedGraph generate_graph(const GraphFamily& f, std::uint64_t seed) {
    if (f.p < 2) throw GraphError("graph families need p >= 2");
    Rng rng(seed);
    detail::EdgeSet es = f.kind == GraphFamily::Kind::ErdosRenyi ? detail::erdos_renyi(f.p, f.degree, rng)
                         : f.kind == GraphFamily::Kind::PowerLaw ? detail::power_law(f.p, f.degree, rng)
                         : f.kind == GraphFamily::Kind::WattsStrogatz
                             ? detail::watts_strogatz(f.p, f.degree, f.rewire, rng)
                             : detail::hybrid(f, rng);
    std::vector<int> order = rng.permutation(f.p);
    std::vector<int> rank(f.p);
    for (int k = 0; k < f.p; ++k) rank[order[k]] = k;
    MixedGraph g(f.p);
    std::sort(es.list.begin(), es.list.end());
    for (auto [a, b] : es.list) {
        if (rank[a] < rank[b])
            g.add_directed(a, b);
        else
            g.add_directed(b, a);
    }
    return g;
}

/// ceil(ln p), at least 1.
inline int default_gamma(int p) { return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(p))))); }

struct ExperimentConfig {
    GraphFamily family;
    long n = 0;
    double latent_fraction = 0.2;
    std::vector<double> alpha_grid{1e-20, 1e-10, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 1e-2};
    int eta = 3;
    /// 0 selects default_gamma(p).
    int gamma = 0;
    int replicates = 50;
    std::uint64_t seed = 1;
    SemParams sem;
    double ridge = 1e-6;
    int threads = 1;

    int effective_gamma() const { return gamma > 0 ? gamma : default_gamma(family.p); }

    void validate() const {
        if (family.p < 2) throw std::invalid_argument("p must be >= 2");
        if (!(latent_fraction >= 0.0 && latent_fraction < 1.0)) throw std::invalid_argument("latent_fraction must be in [0,1)");
        if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end())) throw std::invalid_argument("alpha_grid must be ascending");
        if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
        if (eta < 0) throw std::invalid_argument("eta must be >= 0");
    }
};

struct Instance {
    MixedGraph dag;
    Partition partition;
    SemModel sem;
    MixedGraph mag;
    MixedGraph pag;
    /// Population covariance of the observed nodes.
    Matrix sigma;
    /// n x |X| sample of the observed nodes (empty when n = 0).
    Matrix data;
};

inline Partition random_partition(int p, double latent_fraction, Rng& rng) {
    int q = static_cast<int>(std::lround(latent_fraction * p));
    q = std::clamp(q, 0, p - 1);
    std::vector<int> order = rng.permutation(p);
    Partition part;
    part.latent = make_set(std::vector<int>(order.begin(), order.begin() + q));
    part.observed = make_set(std::vector<int>(order.begin() + q, order.end()));
    return part;
}

inline Matrix submatrix(const Matrix& m, const NodeSet& rows, const NodeSet& cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

/// Deterministic per (cfg.seed, replicate). Set with_pag = false to skip the
/// true PAG when only the MAG is needed.
inline Instance make_instance(const ExperimentConfig& cfg, int replicate, bool with_pag = true) {
    std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(replicate));
    Instance inst;
    inst.dag = generate_graph(cfg.family, mix_seed(base, 1));
    Rng rng(mix_seed(base, 2));
    inst.partition = random_partition(cfg.family.p, cfg.latent_fraction, rng);
    inst.sem = random_sem(inst.dag, cfg.sem, mix_seed(base, 3));
    inst.mag = latent_project_fast(inst.dag, inst.partition);
    if (with_pag) inst.pag = true_pag(inst.mag);
    Matrix full = covariance(inst.sem);
    inst.sigma = submatrix(full, inst.partition.observed, inst.partition.observed);
    if (cfg.n > 0) {
        Matrix all = sample(inst.sem, cfg.n, mix_seed(base, 4));
        inst.data.resize(cfg.n, static_cast<Eigen::Index>(inst.partition.observed.size()));
        for (std::size_t c = 0; c < inst.partition.observed.size(); ++c)
            inst.data.col(static_cast<Eigen::Index>(c)) = all.col(inst.partition.observed[c]);
    }
    return inst;
}

/// Runs fn(r) for r in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers stop.
inline void for_each_replicate(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::clamp(threads, 1, std::max(1, count));
    if (threads == 1) {
        for (int r = 0; r < count; ++r) fn(r);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    auto work = [&] {
        for (int r = next++; r < count && !failed; r = next++) {
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Metrics

class SizeMismatch : public std::invalid_argument {
public:
    SizeMismatch() : std::invalid_argument("graphs have different node counts") {}
};

struct Metrics {
    double precision = 1.0;
    double recall = 1.0;
    long tp = 0, fp = 0, fn = 0;
    long shd = 0;
    long edge_mark_diff = 0;
    double dshd = 0.0;
    long n_tests = 0;
    int m_reach = 0;
};

inline Metrics skeleton_metrics(const MixedGraph& est, const MixedGraph& truth) {
    if (est.size() != truth.size()) throw SizeMismatch();
    Metrics m;
    for (NodeId a = 0; a < est.size(); ++a)
        for (NodeId b = a + 1; b < est.size(); ++b) {
            bool e = est.adjacent(a, b), t = truth.adjacent(a, b);
            m.tp += e && t;
            m.fp += e && !t;
            m.fn += !e && t;
        }
    m.precision = m.tp + m.fp == 0 ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.tp + m.fn == 0 ? 1.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    return m;
}

inline std::pair<long, long> shd_and_marks(const MixedGraph& est, const MixedGraph& truth) {
    if (est.size() != truth.size()) throw SizeMismatch();
    long shd = 0, marks = 0;
    for (NodeId a = 0; a < est.size(); ++a)
        for (NodeId b = a + 1; b < est.size(); ++b) {
            bool e = est.adjacent(a, b), t = truth.adjacent(a, b);
            if (e != t) {
                ++shd;
                continue;
            }
            if (!e) continue;
            int diff = (est.mark_at(a, b) != truth.mark_at(a, b)) + (est.mark_at(b, a) != truth.mark_at(b, a));
            marks += diff;
            shd += diff > 0;
        }
    return {shd, marks};
}

/// Additions and deletions cost 1; a shared edge costs 0.5 per differing mark.
inline double dshd(const MixedGraph& est, const MixedGraph& truth) {
    if (est.size() != truth.size()) throw SizeMismatch();
    double total = 0.0;
    for (NodeId a = 0; a < est.size(); ++a)
        for (NodeId b = a + 1; b < est.size(); ++b) {
            bool e = est.adjacent(a, b), t = truth.adjacent(a, b);
            if (e != t)
                total += 1.0;
            else if (e)
                total += 0.5 * ((est.mark_at(a, b) != truth.mark_at(a, b)) + (est.mark_at(b, a) != truth.mark_at(b, a)));
        }
    return total;
}

inline double f1_score(double precision, double recall) {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

/// Six significant digits, as in the CSV outputs.
inline std::string fmt6(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(6) << v;
    return os.str();
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// ---------------------------------------------------------------------------
// Oracle experiment

struct OracleRow {
    std::string family;
    int p = 0;
    std::string method;
    double recovered_frac = 0.0;
    double rho_star_median = 0.0;
    double log_n_tests_mean = 0.0;
    double n_tests_mean = 0.0;
    double m_reach_mean = 0.0;
    int replicates = 0;
    int max_m_reach = 0;
};

struct OracleExperimentOptions {
    bool run_fci = true;
    bool run_lfci = true;
    bool run_lfci_mb = true;
    bool compute_rho_star = true;
};

/// Population runs: fci with an m-separation oracle, lfci and lfci_mb with
/// the local-graph oracle (gamma), lfci_mb from the MAG's moral graph.
inline std::vector<OracleRow> oracle_experiment(const ExperimentConfig& cfg, const OracleExperimentOptions& opt = {}) {
    cfg.validate();
    if (cfg.family.p > 50) throw std::invalid_argument("oracle_experiment supports p <= 50");
    const int gamma = cfg.effective_gamma();
    struct Acc {
        int recovered = 0;
        double log_tests = 0.0, tests = 0.0, reach = 0.0;
        int max_reach = 0;
        std::vector<double> rho;
    };
    std::vector<std::string> methods;
    if (opt.run_fci) methods.push_back("fci");
    if (opt.run_lfci) methods.push_back("lfci");
    if (opt.run_lfci_mb) methods.push_back("lfci_mb");
    struct Outcome {
        bool recovered = false;
        long n_tests = 0;
        int m_reach = 0;
    };
    std::vector<double> rho(cfg.replicates, 0.0);
    std::vector<std::vector<Outcome>> out(cfg.replicates, std::vector<Outcome>(methods.size()));
    for_each_replicate(cfg.replicates, cfg.threads, [&](int r) {
        Instance inst = make_instance(cfg, r);
        const int p = inst.mag.size();
        if (opt.compute_rho_star) rho[r] = local_corr_residual(inst.sigma, inst.mag, gamma, cfg.eta);
        for (std::size_t k = 0; k < methods.size(); ++k) {
            DiscoveryResult res;
            if (methods[k] == "fci") {
                GraphOracle oracle(inst.mag);
                FciOptions fo;
                fo.allow_large = true;
                res = fci(oracle, p, fo);
            } else if (methods[k] == "lfci") {
                LocalGraphOracle oracle(inst.mag, gamma);
                res = lfci(oracle, p, cfg.eta, gamma);
            } else {
                LocalGraphOracle oracle(inst.mag, gamma);
                res = lfci_mb(oracle, p, cfg.eta, gamma, moral_graph(inst.mag, kUnbounded));
            }
            out[r][k] = {res.graph == inst.pag, res.stats.n_tests, res.stats.m_reach};
        }
    });
    std::vector<Acc> acc(methods.size());
    for (int r = 0; r < cfg.replicates; ++r)
        for (std::size_t k = 0; k < methods.size(); ++k) {
            const Outcome& o = out[r][k];
            acc[k].recovered += o.recovered;
            acc[k].log_tests += std::log(static_cast<double>(std::max<long>(1, o.n_tests)));
            acc[k].tests += static_cast<double>(o.n_tests);
            acc[k].reach += o.m_reach;
            acc[k].max_reach = std::max(acc[k].max_reach, o.m_reach);
            acc[k].rho.push_back(rho[r]);
        }
    std::vector<OracleRow> rows;
    for (std::size_t k = 0; k < methods.size(); ++k) {
        OracleRow row;
        row.family = family_name(cfg.family.kind);
        row.p = cfg.family.p;
        row.method = methods[k];
        row.replicates = cfg.replicates;
        row.recovered_frac = static_cast<double>(acc[k].recovered) / cfg.replicates;
        row.rho_star_median = median(acc[k].rho);
        row.log_n_tests_mean = acc[k].log_tests / cfg.replicates;
        row.n_tests_mean = acc[k].tests / cfg.replicates;
        row.m_reach_mean = acc[k].reach / cfg.replicates;
        row.max_m_reach = acc[k].max_reach;
        rows.push_back(row);
    }
    return rows;
}

inline std::string oracle_csv_header() { return "family,p,method,recovered_frac,rho_star_median,log_n_tests_mean,m_reach_mean"; }

inline std::string oracle_csv_row(const OracleRow& r) {
    return r.family + "," + std::to_string(r.p) + "," + r.method + "," + fmt6(r.recovered_frac) + "," +
           fmt6(r.rho_star_median) + "," + fmt6(r.log_n_tests_mean) + "," + fmt6(r.m_reach_mean);
}

// ---------------------------------------------------------------------------
// Finite-sample precision-recall sweep

struct PrRow {
    std::string method;
    double alpha = 0.0;
    double precision_mean = 0.0;
    double recall_mean = 0.0;
    int replicates = 0;
};

struct PrSweepOptions {
    std::vector<std::string> methods{"pc", "fci", "lfci", "lfci_mb"};
    /// Cap on fci's possible-D-SEP subset size (kUnbounded = none).
    int fci_max_pdsep = kUnbounded;
};

/// Moral-graph threshold matching a Fisher-z test at level alpha given all
/// other p - 2 nodes.
inline double moral_tau(double alpha, long n, int p) {
    long dof = n - (p - 2) - 3;
    if (dof < 1) return 0.0;
    return std::tanh(normal_upper_quantile(alpha) / std::sqrt(static_cast<double>(dof)));
}

inline std::vector<PrRow> pr_sweep(const ExperimentConfig& cfg, const PrSweepOptions& opt = {}) {
    cfg.validate();
    if (cfg.n < 1) throw std::invalid_argument("pr_sweep needs n >= 1");
    const int gamma = cfg.effective_gamma();
    for (const auto& m : opt.methods)
        if (m != "pc" && m != "rpc" && m != "fci" && m != "lfci" && m != "lfci_mb")
            throw std::invalid_argument("unknown method '" + m + "'");
    std::vector<PrRow> rows;
    for (const auto& m : opt.methods)
        for (double a : cfg.alpha_grid) rows.push_back({m, a, 0.0, 0.0, cfg.replicates});
    std::vector<std::vector<Metrics>> out(cfg.replicates, std::vector<Metrics>(rows.size()));
    for_each_replicate(cfg.replicates, cfg.threads, [&](int r) {
        Instance inst = make_instance(cfg, r, false);
        CovEstimate est = sample_covariance(inst.data);
        const int p = inst.mag.size();
        std::size_t row = 0;
        for (const auto& m : opt.methods)
            for (double a : cfg.alpha_grid) {
                SampleTest test(est, a);
                DiscoveryResult res;
                if (m == "pc") {
                    res = pc(test, p);
                } else if (m == "rpc") {
                    res = pc(test, p, PcVariant::Reduced(cfg.eta));
                } else if (m == "fci") {
                    FciOptions fo;
                    fo.allow_large = true;
                    fo.max_pdsep = opt.fci_max_pdsep;
                    res = fci(test, p, fo);
                } else if (m == "lfci") {
                    res = lfci(test, p, cfg.eta, gamma);
                } else {
                    MixedGraph moral = estimate_moral_graph(est, cfg.ridge, moral_tau(a, est.n, p));
                    res = lfci_mb(test, p, cfg.eta, gamma, moral);
                }
                out[r][row++] = skeleton_metrics(res.graph, inst.mag);
            }
    });
    for (int r = 0; r < cfg.replicates; ++r)
        for (std::size_t row = 0; row < rows.size(); ++row) {
            rows[row].precision_mean += out[r][row].precision / cfg.replicates;
            rows[row].recall_mean += out[r][row].recall / cfg.replicates;
        }
    return rows;
}

inline std::string pr_csv_header() { return "method,alpha,precision_mean,recall_mean,replicates"; }

inline std::string pr_csv_row(const PrRow& r) {
    return r.method + "," + fmt6(r.alpha) + "," + fmt6(r.precision_mean) + "," + fmt6(r.recall_mean) + "," +
           std::to_string(r.replicates);
}

/// Largest F1 over the points of a method's mean PR curve.
inline double best_f1(const std::vector<PrRow>& rows, const std::string& method) {
    double best = 0.0;
    for (const auto& r : rows)
        if (r.method == method) best = std::max(best, f1_score(r.precision_mean, r.recall_mean));
    return best;
}

// ---------------------------------------------------------------------------
// Short-trek probe

class NoConvergence : public std::runtime_error {
public:
    NoConvergence() : std::runtime_error("d_gamma did not reach the tolerance by gamma = p - 1") {}
};

enum class WeightDist { Uniform10, Normal3 };

struct ShortTrekProbe {
    int min_gamma = 0;
    /// d_gamma for gamma = 0, 1, ..., up to the nilpotency index of B.
    std::vector<double> d;
};

/// Standardized model (B~, Omega~) and d_gamma = max |Sigma~ - Sigma~_gamma|.
inline ShortTrekProbe short_trek_probe(const Matrix& b, const Matrix& omega, double tol = 1e-4) {
    const Eigen::Index p = b.rows();
    Matrix sigma = covariance(b, omega);
    Vector dinv = sigma.diagonal().cwiseSqrt().cwiseInverse();
    Matrix bt = dinv.asDiagonal() * b * dinv.cwiseInverse().asDiagonal();
    Matrix ot = dinv.asDiagonal() * omega * dinv.asDiagonal();
    Matrix st = standardize(sigma);
    ShortTrekProbe probe;
    probe.min_gamma = -1;
    Matrix lambda = Matrix::Identity(p, p);
    Matrix power = Matrix::Identity(p, p);
    for (Eigen::Index g = 0; g < std::max<Eigen::Index>(p, 1); ++g) {
        if (g > 0) {
            power = power * bt;
            lambda += power;
        }
        double d = (st - lambda * ot * lambda.transpose()).cwiseAbs().maxCoeff();
        probe.d.push_back(d);
        if (probe.min_gamma < 0 && d <= tol) probe.min_gamma = static_cast<int>(g);
        if (g > 0 && power.cwiseAbs().maxCoeff() == 0.0) break;
    }
    if (probe.min_gamma < 0) throw NoConvergence();
    return probe;
}

/// Random DAG model with heavy weights: U(-10, 10) or N(0, 3^2), Omega
/// diagonal U(1, 2).
inline SemModel heavy_weight_model(const GraphFamily& f, WeightDist dist, std::uint64_t seed) {
    MixedGraph dag = generate_graph(f, mix_seed(seed, 1));
    Rng rng(mix_seed(seed, 2));
    SemModel m{dag, Matrix::Zero(f.p, f.p), Matrix::Zero(f.p, f.p)};
    for (const Edge& e : dag.edges()) {
        NodeId from = dag.is_parent(e.a, e.b) ? e.a : e.b;
        NodeId to = from == e.a ? e.b : e.a;
        m.B(to, from) = dist == WeightDist::Uniform10 ? rng.uniform(-10.0, 10.0) : rng.normal(0.0, 3.0);
    }
    for (int v = 0; v < f.p; ++v) m.Omega(v, v) = rng.uniform(1.0, 2.0);
    return m;
}

/// min{gamma : d_gamma <= tol} per replicate.
inline std::vector<ShortTrekProbe> min_gamma_short_trek(const GraphFamily& f, WeightDist dist, int replicates,
                                                        std::uint64_t seed, double tol = 1e-4) {
    std::vector<ShortTrekProbe> out;
    for (int r = 0; r < replicates; ++r) {
        SemModel m = heavy_weight_model(f, dist, mix_seed(seed, static_cast<std::uint64_t>(r)));
        out.push_back(short_trek_probe(m.B, m.Omega, tol));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local moral graph study

/// Fraction of replicates whose gamma-local moral graph equals the moral
/// graph of the MAG.
inline double local_moral_equality(const ExperimentConfig& cfg) {
    cfg.validate();
    const int gamma = cfg.effective_gamma();
    std::vector<char> same(cfg.replicates, 0);
    for_each_replicate(cfg.replicates, cfg.threads, [&](int r) {
        std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(r));
        MixedGraph dag = generate_graph(cfg.family, mix_seed(base, 1));
        Rng rng(mix_seed(base, 2));
        Partition part = random_partition(cfg.family.p, cfg.latent_fraction, rng);
        MixedGraph mag = latent_project_fast(dag, part);
        same[r] = moral_graph(mag, gamma) == moral_graph(mag, kUnbounded);
    });
    const int equal = static_cast<int>(std::count(same.begin(), same.end(), 1));
    return static_cast<double>(equal) / cfg.replicates;
}

// ---------------------------------------------------------------------------
// key=value run configuration

class ConfigError : public std::invalid_argument {
public:
    /// line 0: the file as a whole.
    ConfigError(int line, const std::string& what)
        : std::invalid_argument(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
          line(line) {}
    int line;
};

/// ExperimentConfig plus the harness-only settings of the CLI.
struct RunConfig {
    ExperimentConfig exp;
    /// Node counts to run; `p` in the file may list several.
    std::vector<int> p_values{20};
    std::vector<std::string> methods{"pc", "fci", "lfci", "lfci_mb"};
    /// short_trek or local_moral
    std::string probe = "short_trek";
    WeightDist weights = WeightDist::Uniform10;
    double tol = 1e-4;
    int fci_max_pdsep = kUnbounded;
    bool seed_given = false;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& v, int line, const std::string& key) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(line, "bad value '" + v + "' for " + key);
    return out;
}

}  // namespace detail

/// Lines are `key = value`; blank lines and `#` comments are skipped.
inline RunConfig parse_run_config(std::string_view text) {
    RunConfig rc;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    bool have_p = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string l = detail::trim(raw.substr(0, raw.find('#')));
        if (l.empty()) continue;
        auto eq = l.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key=value");
        std::string key = detail::trim(l.substr(0, eq)), v = detail::trim(l.substr(eq + 1));
        if (v.empty()) throw ConfigError(line, "empty value for " + key);
        auto num = [&]<class T>(T) { return detail::parse_number<T>(v, line, key); };
        ExperimentConfig& e = rc.exp;
        try {
            if (key == "family") {
                e.family.kind = parse_family(v);
            } else if (key == "hybrid_base") {
                e.family.hybrid_base = parse_family(v);
            } else if (key == "p") {
                rc.p_values.clear();
                for (const auto& item : detail::split_list(v)) rc.p_values.push_back(detail::parse_number<int>(item, line, key));
                if (rc.p_values.empty()) throw ConfigError(line, "empty p list");
                have_p = true;
            } else if (key == "degree") {
                e.family.degree = num(0.0);
            } else if (key == "rewire") {
                e.family.rewire = num(0.0);
            } else if (key == "hybrid_block") {
                e.family.hybrid_block = num(0);
            } else if (key == "hybrid_delta") {
                e.family.hybrid_delta = num(0);
            } else if (key == "n") {
                e.n = num(0L);
            } else if (key == "latent_fraction") {
                e.latent_fraction = num(0.0);
            } else if (key == "alpha_grid") {
                e.alpha_grid.clear();
                for (const auto& item : detail::split_list(v)) e.alpha_grid.push_back(detail::parse_number<double>(item, line, key));
            } else if (key == "eta") {
                e.eta = num(0);
            } else if (key == "gamma") {
                e.gamma = num(0);
            } else if (key == "replicates") {
                e.replicates = num(0);
            } else if (key == "seed") {
                e.seed = num(std::uint64_t{0});
                rc.seed_given = true;
            } else if (key == "threads") {
                e.threads = num(0);
            } else if (key == "ridge") {
                e.ridge = num(0.0);
            } else if (key == "weight_low") {
                e.sem.weight_low = num(0.0);
            } else if (key == "weight_high") {
                e.sem.weight_high = num(0.0);
            } else if (key == "omega_low") {
                e.sem.omega_low = num(0.0);
            } else if (key == "omega_high") {
                e.sem.omega_high = num(0.0);
            } else if (key == "methods") {
                rc.methods = detail::split_list(v);
            } else if (key == "probe") {
                if (v != "short_trek" && v != "local_moral") throw ConfigError(line, "unknown probe '" + v + "'");
                rc.probe = v;
            } else if (key == "weights") {
                if (v == "uniform10")
                    rc.weights = WeightDist::Uniform10;
                else if (v == "normal3")
                    rc.weights = WeightDist::Normal3;
                else
                    throw ConfigError(line, "unknown weights '" + v + "'");
            } else if (key == "tol") {
                rc.tol = num(0.0);
            } else if (key == "fci_max_pdsep") {
                rc.fci_max_pdsep = num(0);
            } else {
                throw ConfigError(line, "unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& err) {
            throw ConfigError(line, err.what());
        }
    }
    if (have_p) rc.exp.family.p = rc.p_values.front();
    rc.p_values = have_p ? rc.p_values : std::vector<int>{rc.exp.family.p};
    for (int p : rc.p_values) {
        ExperimentConfig c = rc.exp;
        c.family.p = p;
        try {
            c.validate();
        } catch (const std::invalid_argument& err) {
            throw ConfigError(0, err.what());
        }
    }
    return rc;
}

}  // namespace lfci

#endif  // LFCI_SIMBENCH_HPP
