#ifndef LFCI_CITEST_HPP
#define LFCI_CITEST_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <locale>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "separation.hpp"

namespace lfci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class CiError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularConditioningBlock : public CiError {
public:
    SingularConditioningBlock() : CiError("conditioning block is numerically singular") {}
};

class DegenerateResidualVariance : public CiError {
public:
    DegenerateResidualVariance() : CiError("residual variance is not positive") {}
};

class InsufficientSamples : public CiError {
public:
    InsufficientSamples(long n, std::size_t k)
        : CiError("n - |S| - 3 < 1 (n=" + std::to_string(n) + ", |S|=" + std::to_string(k) + ")") {}
};

class EmptyData : public CiError {
public:
    EmptyData() : CiError("data has no rows") {}
};

inline constexpr double kPivotFloor = 1e-12;

/// rho(i,j|S) from Sigma. The conditioning block is factored by Cholesky;
/// a pivot below 1e-12 times the block's largest diagonal entry is treated
/// as singular.
inline double partial_correlation(const Matrix& sigma, NodeId i, NodeId j, const NodeSet& s) {
    if (i == j || contains(s, i) || contains(s, j)) throw InvalidConditioningSet(i, j, s);
    const int k = static_cast<int>(s.size());
    double sii = sigma(i, i), sjj = sigma(j, j), sij = sigma(i, j);
    if (k > 0) {
        Matrix l = Matrix::Zero(k, k);
        double scale = 0.0;
        for (int a = 0; a < k; ++a) scale = std::max(scale, sigma(s[a], s[a]));
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b <= a; ++b) {
                double v = sigma(s[a], s[b]);
                for (int c = 0; c < b; ++c) v -= l(a, c) * l(b, c);
                if (a == b) {
                    if (!(v > kPivotFloor * scale)) throw SingularConditioningBlock();
                    l(a, a) = std::sqrt(v);
                } else {
                    l(a, b) = v / l(b, b);
                }
            }
        }
        Vector bi(k), bj(k);
        for (int a = 0; a < k; ++a) {
            bi(a) = sigma(s[a], i);
            bj(a) = sigma(s[a], j);
        }
        auto tri = l.triangularView<Eigen::Lower>();
        Vector ri = tri.solve(bi);
        Vector rj = tri.solve(bj);
        sii -= ri.squaredNorm();
        sjj -= rj.squaredNorm();
        sij -= ri.dot(rj);
    }
    if (!(sii > kPivotFloor * std::abs(sigma(i, i))) || !(sjj > kPivotFloor * std::abs(sigma(j, j))))
        throw DegenerateResidualVariance();
    double r = sij / std::sqrt(sii * sjj);
    return std::clamp(r, -1.0, 1.0);
}

struct CovEstimate {
    Matrix sigma;
    long n = 0;
};

/// Mean-centred covariance with the 1/n convention.
inline CovEstimate sample_covariance(const Matrix& data) {
    if (data.rows() < 1) throw EmptyData();
    Vector mean = data.colwise().mean();
    Matrix centered = data.rowwise() - mean.transpose();
    CovEstimate est;
    est.sigma = (centered.transpose() * centered) / static_cast<double>(data.rows());
    est.n = data.rows();
    return est;
}

inline double fisher_z(double rho) {
    constexpr double kClamp = 1.0 - 1e-12;
    rho = std::clamp(rho, -kClamp, kClamp);
    return 0.5 * std::log((1.0 + rho) / (1.0 - rho));
}

/// Phi^{-1}(1 - alpha/2).
inline double normal_upper_quantile(double alpha) {
    boost::math::normal nd;
    return boost::math::quantile(boost::math::complement(nd, alpha / 2.0));
}

/// True when sqrt(n-|S|-3) |g(rho)| <= Phi^{-1}(1 - alpha/2).
inline bool fisher_z_accepts(double rho, long n, std::size_t k, double alpha) {
    long dof = n - static_cast<long>(k) - 3;
    if (dof < 1) throw InsufficientSamples(n, k);
    return std::sqrt(static_cast<double>(dof)) * std::abs(fisher_z(rho)) <= normal_upper_quantile(alpha);
}

/// Fisher-z test; true means "independent".
inline bool fisher_z_decide(const CovEstimate& est, NodeId i, NodeId j, const NodeSet& s, double alpha) {
    if (est.n - static_cast<long>(s.size()) - 3 < 1) throw InsufficientSamples(est.n, s.size());
    return fisher_z_accepts(partial_correlation(est.sigma, i, j, s), est.n, s.size(), alpha);
}

/// Significance level at which the Fisher-z test accepts exactly when
/// |rho_hat| <= t: 2 (1 - Phi(sqrt(n-k-3) g(t))).
inline double threshold_alpha(long n, std::size_t k, double t) {
    boost::math::normal nd;
    double z = std::sqrt(static_cast<double>(n - static_cast<long>(k) - 3)) * fisher_z(t);
    return 2.0 * boost::math::cdf(boost::math::complement(nd, z));
}

/// Conditional-independence decision procedure with a decision counter.
class CiTester {
public:
    explicit CiTester(int p) : p_(p) {}
    virtual ~CiTester() = default;
    CiTester(const CiTester&) = delete;
    CiTester& operator=(const CiTester&) = delete;

    int size() const { return p_; }

    /// True means "i and j are independent given S".
    bool decide(NodeId i, NodeId j, const NodeSet& s) {
        count_.fetch_add(1, std::memory_order_relaxed);
        return independent(i, j, s);
    }

    long count() const { return count_.load(); }
    void reset_count() { count_ = 0; }

    virtual std::string kind() const = 0;

protected:
    virtual bool independent(NodeId i, NodeId j, const NodeSet& s) = 0;

private:
    int p_;
    std::atomic<long> count_{0};
};

/// m-separation in a known graph.
class GraphOracle : public CiTester {
public:
    explicit GraphOracle(MixedGraph g) : CiTester(g.size()), g_(std::move(g)) {}
    std::string kind() const override { return "graph-oracle"; }
    const MixedGraph& graph() const { return g_; }

protected:
    bool independent(NodeId i, NodeId j, const NodeSet& s) override { return m_separated(g_, i, j, s); }

private:
    MixedGraph g_;
};

/// Local-graph separation oracle: independent iff S lies in V_gamma(i,j)
/// of the true graph and m-separates i and j in G_gamma(i,j).
class LocalGraphOracle : public CiTester {
public:
    LocalGraphOracle(MixedGraph g, int gamma) : CiTester(g.size()), g_(std::move(g)), gamma_(gamma) {}
    std::string kind() const override { return "local-graph-oracle"; }
    const MixedGraph& graph() const { return g_; }
    int gamma() const { return gamma_; }

protected:
    bool independent(NodeId i, NodeId j, const NodeSet& s) override {
        const std::vector<char>& mask = local_mask(i, j);
        for (NodeId v : s)
            if (!mask[v]) return false;
        return m_separated(g_, i, j, s, &mask);
    }

private:
    const std::vector<char>& local_mask(NodeId i, NodeId j) {
        auto key = std::make_pair(std::min(i, j), std::max(i, j));
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            std::vector<char> mask(g_.size(), 0);
            for (NodeId v : local_nodes(g_, i, j, gamma_)) mask[v] = 1;
            it = cache_.emplace(key, std::move(mask)).first;
        }
        return it->second;
    }

    MixedGraph g_;
    int gamma_;
    std::mutex mu_;
    std::map<std::pair<NodeId, NodeId>, std::vector<char>> cache_;
};

inline constexpr double kDefaultGaussThreshold = 1e-9;

/// Population test: independent iff |rho(i,j|S)| <= lambda.
class GaussOracle : public CiTester {
public:
    explicit GaussOracle(Matrix sigma, double lambda = kDefaultGaussThreshold)
        : CiTester(static_cast<int>(sigma.rows())), sigma_(std::move(sigma)), lambda_(lambda) {}
    std::string kind() const override { return "gauss-oracle"; }

protected:
    bool independent(NodeId i, NodeId j, const NodeSet& s) override {
        return std::abs(partial_correlation(sigma_, i, j, s)) <= lambda_;
    }

private:
    Matrix sigma_;
    double lambda_;
};

/// Fisher-z test on a sample covariance.
class SampleTest : public CiTester {
public:
    SampleTest(CovEstimate est, double alpha)
        : CiTester(static_cast<int>(est.sigma.rows())), est_(std::move(est)), alpha_(alpha),
          quantile_(normal_upper_quantile(alpha)) {}
    std::string kind() const override { return "fisher-z"; }
    double alpha() const { return alpha_; }
    const CovEstimate& estimate() const { return est_; }

protected:
    bool independent(NodeId i, NodeId j, const NodeSet& s) override {
        long dof = est_.n - static_cast<long>(s.size()) - 3;
        if (dof < 1) throw InsufficientSamples(est_.n, s.size());
        double rho = partial_correlation(est_.sigma, i, j, s);
        return std::sqrt(static_cast<double>(dof)) * std::abs(fisher_z(rho)) <= quantile_;
    }

private:
    CovEstimate est_;
    double alpha_;
    double quantile_;
};

/// Reads a CSV with a header row of node labels, one sample per row.
inline Matrix read_data_csv(const std::string& path, std::vector<std::string>* labels = nullptr) {
    std::ifstream in(path);
    if (!in) throw CiError("cannot open " + path);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            cells.push_back(cell);
        }
        return cells;
    };
    if (!std::getline(in, line)) throw CiError(path + ": missing header row");
    std::vector<std::string> header = split(line);
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != header.size())
            throw CiError(path + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                          " fields, expected " + std::to_string(header.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            std::istringstream cs(c);
            cs.imbue(std::locale::classic());
            double v;
            if (!(cs >> v) || !cs.eof()) throw CiError(path + ": line " + std::to_string(lineno) + ": bad number '" + c + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    Matrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < header.size(); ++c) data(r, c) = rows[r][c];
    if (labels) *labels = header;
    return data;
}

inline void write_data_csv(const Matrix& data, const std::vector<std::string>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CiError("cannot write " + path);
    out.imbue(std::locale::classic());
    out.precision(17);
    for (std::size_t c = 0; c < labels.size(); ++c) out << (c ? "," : "") << labels[c];
    out << "\n";
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data(r, c);
        out << "\n";
    }
}

}  // namespace lfci

#endif  // LFCI_CITEST_HPP
