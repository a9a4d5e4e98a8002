#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "lfci/lfci.hpp"

namespace fs = std::filesystem;
using namespace lfci;

namespace {

enum Exit { kOk = 0, kUsage = 2, kTester = 3, kNotMag = 4 };

/// Errors that map to an exit code.
struct Fail {
    int code;
    std::string what;
};

struct Common {
    std::string algo = "lfci";
    double alpha = 1e-3;
    int eta = 3;
    int gamma = 0;
    std::string out;
    int threads = 0;
    bool allow_large_fci = false;
};

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("LFCI_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw Fail{kUsage, std::string("bad LFCI_THREADS '") + env + "'"};
        return static_cast<int>(v);
    }
    return 1;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Fail{kUsage, "cannot open " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw Fail{kUsage, "cannot write " + path};
}

std::string stats_json(const RunStats& s) {
    nlohmann::json j;
    j["n_tests"] = s.n_tests;
    j["m_reach"] = s.m_reach;
    j["runtime_ms"] = s.runtime_ms;
    return j.dump() + "\n";
}

/// PAG to `out` and stats to `out.json`, or both to stdout.
void emit(const DiscoveryResult& res, const std::string& out) {
    if (out.empty()) {
        std::cout << serialize_graph(res.graph) << stats_json(res.stats);
        return;
    }
    write_text(out, serialize_graph(res.graph));
    write_text(out + ".json", stats_json(res.stats));
}

/// One line per pair whose edge differs.
std::string diff_report(const MixedGraph& est, const MixedGraph& truth) {
    auto token = [](const MixedGraph& g, NodeId a, NodeId b) {
        return g.adjacent(a, b) ? g.label(a) + " " + edge_token(g.mark_at(a, b), g.mark_at(b, a)) + " " + g.label(b)
                                : g.label(a) + " (none) " + g.label(b);
    };
    std::string out;
    for (NodeId a = 0; a < est.size(); ++a)
        for (NodeId b = a + 1; b < est.size(); ++b) {
            bool same = est.adjacent(a, b) == truth.adjacent(a, b) &&
                        (!est.adjacent(a, b) || (est.mark_at(a, b) == truth.mark_at(a, b) && est.mark_at(b, a) == truth.mark_at(b, a)));
            if (!same) out += token(est, a, b) + "    truth: " + token(truth, a, b) + "\n";
        }
    return out;
}

void check_algo(const std::string& algo) {
    if (algo != "lfci" && algo != "lfci_mb" && algo != "fci" && algo != "pc" && algo != "rpc")
        throw Fail{kUsage, "unknown --algo '" + algo + "'"};
}

DiscoveryResult run_algo(const Common& c, CiTester& tester, int p, int gamma, const MixedGraph& moral) {
    PipelineOptions po;
    po.eta = c.eta;
    po.gamma = gamma;
    po.threads = resolve_threads(c.threads);
    po.batch = po.threads > 1;
    try {
        if (c.algo == "lfci") return lfci::lfci(tester, p, po);
        if (c.algo == "lfci_mb") return lfci_mb(tester, p, po, moral);
        if (c.algo == "pc") return pc(tester, p);
        if (c.algo == "rpc") return pc(tester, p, PcVariant::Reduced(c.eta));
        FciOptions fo;
        fo.allow_large = c.allow_large_fci;
        return fci(tester, p, fo);
    } catch (const FciTooLarge& e) {
        throw Fail{kUsage, std::string(e.what()) + " (use --allow-large-fci)"};
    } catch (const TesterFailure& e) {
        throw Fail{kTester, e.what()};
    } catch (const CiError& e) {
        throw Fail{kTester, e.what()};
    }
}

int cmd_learn(const Common& c, const std::string& data_path) {
    check_algo(c.algo);
    if (c.eta < 0) throw Fail{kUsage, "--eta must be >= 0"};
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Fail{kUsage, "--alpha must be in (0,1)"};
    std::vector<std::string> labels;
    Matrix data;
    try {
        data = read_data_csv(data_path, &labels);
    } catch (const CiError& e) {
        throw Fail{kUsage, e.what()};
    }
    const int p = static_cast<int>(data.cols());
    if (p < 1) throw Fail{kUsage, data_path + ": no columns"};
    const int gamma = c.gamma > 0 ? c.gamma : default_gamma(std::max(p, 2));
    MixedGraph moral;
    DiscoveryResult res;
    try {
        CovEstimate est = sample_covariance(data);
        SampleTest test(est, c.alpha);
        if (c.algo == "lfci_mb") moral = estimate_moral_graph(est, ExperimentConfig{}.ridge, moral_tau(c.alpha, est.n, p));
        res = run_algo(c, test, p, gamma, moral);
    } catch (const CiError& e) {
        throw Fail{kTester, e.what()};
    }
    res.graph.set_labels(labels);
    emit(res, c.out);
    return kOk;
}

int cmd_oracle(const Common& c, const std::string& graph_path) {
    check_algo(c.algo);
    if (c.eta < 0) throw Fail{kUsage, "--eta must be >= 0"};
    MixedGraph mag;
    try {
        mag = parse_graph(read_text(graph_path));
    } catch (const GraphError& e) {
        throw Fail{kUsage, graph_path + ": " + e.what()};
    }
    if (mag.has_circles()) throw Fail{kNotMag, graph_path + ": circle marks are not allowed in a MAG"};
    if (!is_ancestral(mag)) throw Fail{kNotMag, graph_path + ": graph is not ancestral"};
    if (!is_maximal(mag)) throw Fail{kNotMag, graph_path + ": graph is not maximal"};
    const int p = mag.size();
    const int gamma = c.gamma > 0 ? c.gamma : default_gamma(std::max(p, 2));
    // local algorithms query gamma-local separations; the rest query the full graph
    std::unique_ptr<CiTester> tester;
    if (c.algo == "lfci" || c.algo == "lfci_mb")
        tester = std::make_unique<LocalGraphOracle>(mag, gamma);
    else
        tester = std::make_unique<GraphOracle>(mag);
    DiscoveryResult res = run_algo(c, *tester, p, gamma, moral_graph(mag, kUnbounded));
    res.graph.set_labels(mag.labels());
    MixedGraph truth = true_pag(mag);
    truth.set_labels(mag.labels());
    emit(res, c.out);
    std::string diff = diff_report(res.graph, truth);
    if (c.out.empty()) {
        std::cout << "# truth\n" << serialize_graph(truth) << "# diff\n" << diff;
    } else {
        write_text(c.out + ".truth", serialize_graph(truth));
        write_text(c.out + ".diff", diff);
    }
    return kOk;
}

RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed, int threads) {
    RunConfig rc;
    try {
        rc = parse_run_config(read_text(path));
    } catch (const ConfigError& e) {
        throw Fail{kUsage, path + ": " + e.what()};
    }
    if (seed) {
        rc.exp.seed = *seed;
    } else if (!rc.seed_given) {
        rc.exp.seed = std::random_device{}();
        rc.exp.seed = (rc.exp.seed << 32) ^ std::random_device{}();
        std::cout << "seed=" << rc.exp.seed << "\n";
    }
    if (threads > 0 || std::getenv("LFCI_THREADS")) rc.exp.threads = resolve_threads(threads);
    return rc;
}

fs::path prepare_dir(const std::string& out) {
    fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Fail{kUsage, "cannot create " + dir.string() + ": " + ec.message()};
    return dir;
}

int cmd_simulate(const RunConfig& rc, const std::string& out) {
    fs::path dir = prepare_dir(out);
    PrSweepOptions opt;
    opt.methods = rc.methods;
    opt.fci_max_pdsep = rc.fci_max_pdsep;
    for (int p : rc.p_values) {
        ExperimentConfig cfg = rc.exp;
        cfg.family.p = p;
        std::vector<PrRow> rows;
        try {
            rows = pr_sweep(cfg, opt);
        } catch (const CiError& e) {
            throw Fail{kTester, e.what()};
        } catch (const std::invalid_argument& e) {
            throw Fail{kUsage, e.what()};
        }
        std::string csv = pr_csv_header() + "\n";
        for (const PrRow& r : rows) csv += pr_csv_row(r) + "\n";
        fs::path file = dir / ("pr_sweep_p" + std::to_string(p) + ".csv");
        write_text(file.string(), csv);
        std::cout << "pr_sweep " << family_name(cfg.family.kind) << " p=" << p << " n=" << cfg.n << " best F1:";
        for (const auto& m : rc.methods) std::cout << " " << m << "=" << fmt6(best_f1(rows, m));
        std::cout << " -> " << file.string() << "\n";
    }
    return kOk;
}

int cmd_bench(const RunConfig& rc, const std::string& out) {
    fs::path dir = prepare_dir(out);
    OracleExperimentOptions opt;
    opt.run_fci = opt.run_lfci = opt.run_lfci_mb = false;
    for (const auto& m : rc.methods) {
        if (m == "fci")
            opt.run_fci = true;
        else if (m == "lfci")
            opt.run_lfci = true;
        else if (m == "lfci_mb")
            opt.run_lfci_mb = true;
    }
    if (!opt.run_fci && !opt.run_lfci && !opt.run_lfci_mb) throw Fail{kUsage, "bench needs a method among fci, lfci, lfci_mb"};
    std::string csv = oracle_csv_header() + "\n";
    for (int p : rc.p_values) {
        ExperimentConfig cfg = rc.exp;
        cfg.family.p = p;
        std::vector<OracleRow> rows;
        try {
            rows = oracle_experiment(cfg, opt);
        } catch (const std::invalid_argument& e) {
            throw Fail{kUsage, e.what()};
        }
        for (const OracleRow& r : rows) csv += oracle_csv_row(r) + "\n";
        std::cout << "oracle_experiment " << family_name(cfg.family.kind) << " p=" << p << " recovered:";
        for (const OracleRow& r : rows) std::cout << " " << r.method << "=" << fmt6(r.recovered_frac);
        std::cout << "\n";
    }
    fs::path file = dir / "oracle_experiment.csv";
    write_text(file.string(), csv);
    std::cout << "wrote " << file.string() << "\n";
    return kOk;
}

int cmd_probe(const RunConfig& rc, const std::string& out) {
    fs::path dir = prepare_dir(out);
    const std::string fam = family_name(rc.exp.family.kind);
    if (rc.probe == "short_trek") {
        std::string csv = "family,p,weights,replicate,min_gamma\n";
        const std::string w = rc.weights == WeightDist::Uniform10 ? "uniform10" : "normal3";
        std::cout << "short_trek " << fam << " " << w << " median min gamma:";
        for (int p : rc.p_values) {
            GraphFamily f = rc.exp.family;
            f.p = p;
            std::vector<ShortTrekProbe> probes = min_gamma_short_trek(f, rc.weights, rc.exp.replicates, rc.exp.seed, rc.tol);
            std::vector<double> mins;
            for (std::size_t r = 0; r < probes.size(); ++r) {
                csv += fam + "," + std::to_string(p) + "," + w + "," + std::to_string(r) + "," +
                       std::to_string(probes[r].min_gamma) + "\n";
                mins.push_back(probes[r].min_gamma);
            }
            std::cout << " p=" << p << ":" << fmt6(median(mins));
        }
        fs::path file = dir / "short_trek.csv";
        write_text(file.string(), csv);
        std::cout << " -> " << file.string() << "\n";
    } else {
        std::string csv = "family,p,gamma,equal_frac\n";
        std::cout << "local_moral " << fam << " equality:";
        for (int p : rc.p_values) {
            ExperimentConfig cfg = rc.exp;
            cfg.family.p = p;
            double frac = local_moral_equality(cfg);
            csv += fam + "," + std::to_string(p) + "," + std::to_string(cfg.effective_gamma()) + "," + fmt6(frac) + "\n";
            std::cout << " p=" << p << ":" << fmt6(frac);
        }
        fs::path file = dir / "local_moral.csv";
        write_text(file.string(), csv);
        std::cout << " -> " << file.string() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local FCI causal discovery"};
    app.require_subcommand(1, 1);

    Common c;
    std::string input;
    std::optional<std::uint64_t> seed;
    auto discovery_flags = [&](CLI::App* sub) {
        sub->add_option("--algo", c.algo, "lfci, lfci_mb, fci, pc or rpc")->capture_default_str();
        sub->add_option("--eta", c.eta, "largest separating set size")->capture_default_str();
        sub->add_option("--gamma", c.gamma, "locality radius (default ceil(ln p))");
        sub->add_option("--out", c.out, "output PAG path (stats go to <out>.json)");
        sub->add_option("--threads", c.threads, "worker threads (default $LFCI_THREADS or 1)");
        sub->add_flag("--allow-large-fci", c.allow_large_fci, "run fci above 40 nodes");
        sub->add_option("--seed", seed, "unused; learning is deterministic");
    };

    CLI::App* learn = app.add_subcommand("learn", "learn a PAG from a data CSV");
    learn->add_option("data", input, "CSV with a header row")->required();
    learn->add_option("--alpha", c.alpha, "Fisher-z significance level")->capture_default_str();
    discovery_flags(learn);

    CLI::App* oracle = app.add_subcommand("oracle", "run a pipeline against a MAG's separations");
    oracle->add_option("graph", input, "MAG in graph text format")->required();
    discovery_flags(oracle);

    std::string out_dir;
    int threads = 0;
    std::vector<CLI::App*> harnesses;
    for (auto [name, help] : {std::pair{"simulate", "finite-sample precision-recall sweep"},
                              {"bench", "oracle recovery experiment"},
                              {"probe", "short-trek or local moral graph probe"}}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", input, "key=value config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--threads", threads, "replicate workers (default $LFCI_THREADS or 1)");
        harnesses.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (learn->parsed()) return cmd_learn(c, input);
        if (oracle->parsed()) return cmd_oracle(c, input);
        RunConfig rc = load_config(input, seed, threads);
        if (harnesses[0]->parsed()) return cmd_simulate(rc, out_dir);
        if (harnesses[1]->parsed()) return cmd_bench(rc, out_dir);
        return cmd_probe(rc, out_dir);
    } catch (const Fail& f) {
        std::cerr << "error: " << f.what << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
