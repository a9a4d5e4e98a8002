#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace lfci;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("lfci_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Outcome run(const std::string& args, const std::string& env = "") const {
        std::string err = path("stderr.txt");
        std::string cmd = env + " " + LFCI_CLI_PATH + " " + args + " 2>" + err;
        FILE* pipe = ::popen(cmd.c_str(), "r");
        std::string out;
        char buf[4096];
        std::size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
        int status = ::pclose(pipe);
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err)};
    }

    static std::string slurp(const std::string& file) {
        std::ifstream in(file);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

    /// n samples of a linear SEM over `dag` with labels x0, x1, ...
    std::string sample_csv(const std::string& name, const MixedGraph& dag, long n, std::uint64_t seed) const {
        Matrix data = sample(random_sem(dag, SemParams{0.5, 1.0, 1.0, 1.0}, seed), n, seed + 1);
        std::vector<std::string> labels;
        for (int v = 0; v < dag.size(); ++v) labels.push_back("x" + std::to_string(v));
        write_data_csv(data, labels, path(name));
        return path(name);
    }

    fs::path dir_;
};

MixedGraph chain(int p) {
    MixedGraph g(p);
    for (int v = 1; v < p; ++v) g.add_directed(v - 1, v);
    return g;
}

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    std::string csv = sample_csv("d.csv", MixedGraph(3), 100, 1);
    EXPECT_EQ(run("learn " + csv + " --algo ges").code, 2);
    EXPECT_EQ(run("learn " + csv + " --alpha 0").code, 2);
    EXPECT_EQ(run("learn " + csv + " --eta x").code, 2);
    EXPECT_EQ(run("learn " + csv, "LFCI_THREADS=zero").code, 2);
}

TEST_F(Cli, LearnIndependentNoiseIsEmpty) {
    std::string csv = sample_csv("noise.csv", MixedGraph(3), 2000, 7);
    Outcome r = run("learn " + csv + " --algo lfci --alpha 1e-3 --out " + path("pag.txt"));
    ASSERT_EQ(r.code, 0) << r.err;
    MixedGraph g = read_graph_file(path("pag.txt"));
    EXPECT_EQ(g.size(), 3);
    EXPECT_EQ(g.edge_count(), 0);
    EXPECT_EQ(g.labels(), (std::vector<std::string>{"x0", "x1", "x2"}));
    nlohmann::json stats = nlohmann::json::parse(slurp(path("pag.txt.json")));
    EXPECT_EQ(stats["n_tests"].get<long>(), 3);
    EXPECT_EQ(stats["m_reach"].get<int>(), 0);
    EXPECT_GE(stats["runtime_ms"].get<double>(), 0.0);
}

TEST_F(Cli, LearnInputErrors) {
    EXPECT_EQ(run("learn " + path("missing.csv")).code, 2);
    write("bad.csv", "a,b\n1,2\n3\n");
    Outcome bad = run("learn " + path("bad.csv"));
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;
    // four rows leave no degrees of freedom once a node is conditioned on
    write("short.csv", "a,b,c\n1,1,1\n2,2.1,2\n3,2.9,3.1\n4,4,3.9\n");
    Outcome tester = run("learn " + path("short.csv") + " --alpha 0.5");
    EXPECT_EQ(tester.code, 3);
    EXPECT_NE(tester.err.find("failed"), std::string::npos) << tester.err;
}

TEST_F(Cli, LearnChainSkeleton) {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::string csv = sample_csv("chain.csv", chain(5), 5000, 100 + seed);
        Outcome r = run("learn " + csv + " --algo lfci --alpha 1e-3 --out " + path("pag.txt"));
        ASSERT_EQ(r.code, 0) << r.err;
        hits += skeleton(read_graph_file(path("pag.txt"))) == skeleton(chain(5));
    }
    EXPECT_GE(hits, 19);
}

TEST_F(Cli, LearnAlphaEndpoints) {
    // n = 200 keeps every |z| below the 1e-300 quantile (about 37)
    std::string small = sample_csv("small.csv", chain(5), 200, 3);
    std::string csv = sample_csv("chain.csv", chain(5), 5000, 3);
    for (const char* algo : {"lfci", "lfci_mb", "fci", "pc", "rpc"}) {
        ASSERT_EQ(run("learn " + small + " --algo " + algo + " --alpha 1e-300 --out " + path("lo.txt")).code, 0);
        EXPECT_EQ(read_graph_file(path("lo.txt")).edge_count(), 0) << algo;
        ASSERT_EQ(run("learn " + csv + " --algo " + algo + " --alpha 0.999 --threads 2 --out " + path("hi.txt")).code, 0);
        EXPECT_GE(read_graph_file(path("hi.txt")).edge_count(), 8) << algo;
    }
}

TEST_F(Cli, LearnWritesToStdout) {
    std::string csv = sample_csv("chain.csv", chain(3), 1000, 5);
    Outcome r = run("learn " + csv);
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("nodes=x0,x1,x2"), std::string::npos);
    EXPECT_NE(r.out.find("\"n_tests\""), std::string::npos);
}

TEST_F(Cli, OracleLocalSeparatorMag) {
    std::string fig = std::string(LFCI_FIXTURE_DIR) + "/local_separator.txt";
    Outcome r = run("oracle " + fig + " --algo lfci --eta 2 --gamma 4 --out " + path("f4.txt"));
    ASSERT_EQ(r.code, 0) << r.err;
    MixedGraph est = read_graph_file(path("f4.txt"));
    MixedGraph truth = read_graph_file(path("f4.txt.truth"));
    EXPECT_EQ(skeleton(est), skeleton(truth));
    EXPECT_EQ(truth, true_pag(lfci::testing::fixture("local_separator.txt")));
    EXPECT_EQ(slurp(path("f4.txt.diff")), "");
}

TEST_F(Cli, OracleDiscriminatingPathDiff) {
    std::string fig = std::string(LFCI_FIXTURE_DIR) + "/discriminating_path.txt";
    Outcome r = run("oracle " + fig + " --algo lfci --eta 4 --gamma 5 --out " + path("f3.txt"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("f3.txt.diff")), "y o-> j    truth: y --> j\n");
    Outcome full = run("oracle " + fig + " --algo fci --out " + path("fci.txt"));
    ASSERT_EQ(full.code, 0) << full.err;
    EXPECT_EQ(slurp(path("fci.txt.diff")), "");
}

TEST_F(Cli, OracleRejectsNonMags) {
    // inducing path between a and d
    write("nonmax.txt", "a <-> b\nb <-> c\nc <-> d\nb --> d\nc --> a\n");
    EXPECT_EQ(run("oracle " + path("nonmax.txt")).code, 4);
    write("cycle.txt", "a --> b\nb --> c\nc --> a\n");
    EXPECT_EQ(run("oracle " + path("cycle.txt")).code, 4);
    write("circle.txt", "a o-> b\n");
    EXPECT_EQ(run("oracle " + path("circle.txt")).code, 4);
    write("garbage.txt", "a ==> b\n");
    EXPECT_EQ(run("oracle " + path("garbage.txt")).code, 2);
    EXPECT_EQ(run("oracle " + path("none.txt")).code, 2);
}

TEST_F(Cli, OracleFciSizeGate) {
    std::ostringstream big;
    for (int v = 1; v < 42; ++v) big << v - 1 << " --> " << v << "\n";
    write("big.txt", big.str());
    EXPECT_EQ(run("oracle " + path("big.txt") + " --algo fci").code, 2);
    EXPECT_EQ(run("oracle " + path("big.txt") + " --algo fci --allow-large-fci --out " + path("o.txt")).code, 0);
}

TEST_F(Cli, SimulateSmoke) {
    write("sim.cfg", "family = ER\np = 12\nn = 300\nreplicates = 1\nalpha_grid = 1e-5, 1e-2\nmethods = lfci, pc\n");
    Outcome r = run("simulate " + path("sim.cfg") + " --out " + path("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("seed=", 0), 0u) << r.out;
    std::string csv = slurp(path("out/pr_sweep_p12.csv"));
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "method,alpha,precision_mean,recall_mean,replicates");
    EXPECT_EQ(rows[1].substr(0, 11), "lfci,1e-05,");
    EXPECT_NE(r.out.find("pr_sweep ER p=12"), std::string::npos);
}

TEST_F(Cli, SeedDeterminism) {
    write("sim.cfg", "p = 10\nn = 200\nreplicates = 2\nalpha_grid = 1e-2\nmethods = lfci\n");
    ASSERT_EQ(run("simulate " + path("sim.cfg") + " --seed 9 --out " + path("a")).code, 0);
    ASSERT_EQ(run("simulate " + path("sim.cfg") + " --seed 9 --threads 2 --out " + path("b")).code, 0);
    EXPECT_EQ(slurp(path("a/pr_sweep_p10.csv")), slurp(path("b/pr_sweep_p10.csv")));
    Outcome seeded = run("simulate " + path("sim.cfg") + " --seed 9 --out " + path("c"));
    EXPECT_EQ(seeded.out.find("seed="), std::string::npos);
}

TEST_F(Cli, BenchDeskConfig) {
    write("bench.cfg", "family = ER\np = 20\ngamma = 6\neta = 3\nreplicates = 3\nseed = 4\n");
    Outcome r = run("bench " + path("bench.cfg") + " --out " + path("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(slurp(path("out/oracle_experiment.csv")));
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "family,p,method,recovered_frac,rho_star_median,log_n_tests_mean,m_reach_mean");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 7u);
        EXPECT_EQ(cells[3], "1") << line;
    }
    EXPECT_EQ(rows, 3);
}

TEST_F(Cli, ProbeShortTrekTrend) {
    write("probe.cfg", "probe = short_trek\np = 20, 40, 80\nreplicates = 15\nweights = uniform10\nseed = 2\n");
    Outcome r = run("probe " + path("probe.cfg") + " --out " + path("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(slurp(path("out/short_trek.csv")));
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "family,p,weights,replicate,min_gamma");
    std::map<int, std::vector<double>> by_p;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        by_p[std::stoi(cells[1])].push_back(std::stod(cells[4]));
    }
    ASSERT_EQ(by_p.size(), 3u);
    EXPECT_LE(median(by_p[20]), median(by_p[40]));
    EXPECT_LE(median(by_p[40]), median(by_p[80]));
}

TEST_F(Cli, ProbeLocalMoral) {
    write("probe.cfg", "probe = local_moral\nfamily = PL\np = 30\ngamma = 30\nreplicates = 5\nseed = 2\n");
    Outcome r = run("probe " + path("probe.cfg") + " --out " + path("out"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("out/local_moral.csv")), "family,p,gamma,equal_frac\nPL,30,30,1\n");
}

TEST_F(Cli, ConfigErrors) {
    write("bad.cfg", "p = 20\ncolour = red\n");
    Outcome r = run("bench " + path("bad.cfg"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
    EXPECT_EQ(run("probe " + path("missing.cfg")).code, 2);
    write("order.cfg", "alpha_grid = 0.1, 0.01\nn = 100\n");
    EXPECT_EQ(run("simulate " + path("order.cfg")).code, 2);
}
