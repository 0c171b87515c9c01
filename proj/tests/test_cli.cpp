#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string bench_bin() {
    const char *p = std::getenv("BIDA_BENCH_BIN");
    REQUIRE(p != nullptr);
    return p;
}

fs::path work_dir() {
    const fs::path d = fs::temp_directory_path() / "bida_cli_test";
    fs::create_directories(d);
    return d;
}

int run(const std::string &args, const fs::path &stdout_path, const fs::path &stderr_path) {
    const std::string cmd = bench_bin() + " " + args + " > " + stdout_path.string() + " 2> " +
                            stderr_path.string();
    const int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : (rc >> 8);
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty())
            out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(f);
    return out;
}

} // namespace

TEST_CASE("gen-instances writes a parseable set") {
    const fs::path d = work_dir();
    const fs::path out = d / "gen.txt";
    const int rc = run("gen-instances --domain stp3 --count 4 --min-length 8 --max-length 14 "
                       "--seed 7 --out " + out.string(),
                       d / "gen.out", d / "gen.err");
    CHECK(rc == 0);
    const auto ls = lines_of(slurp(out));
    REQUIRE(ls.size() == 4);
    for (const auto &l : ls)
        CHECK(l.rfind("stp 3 ", 0) == 0);
}

TEST_CASE("run emits one results row per grid cell with consistent costs") {
    const fs::path d = work_dir();
    const fs::path inst = d / "run_inst.txt";
    REQUIRE(run("gen-instances --domain stp3 --count 3 --min-length 10 --max-length 16 "
                "--seed 11 --out " + inst.string(),
                d / "g.out", d / "g.err") == 0);

    const fs::path out = d / "results.csv";
    const fs::path iout = d / "iters.csv";
    const int rc = run("run --domain stp3 --algo idastar,batch-idastar --threads 1,2 "
                       "--work-num 2 --batch-size 4 --timeout-us 0 --heuristic manhattan "
                       "--instances " + inst.string() + " --out " + out.string() +
                       " --iter-out " + iout.string(),
                       d / "r.out", d / "r.err");
    CHECK(rc == 0);

    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 1 + 2 * 2 * 3); // header + algos x threads x instances
    CHECK(rows[0].rfind("algorithm,instance,cost,", 0) == 0);

    // every configuration reports the same cost per instance
    std::map<std::string, std::string> cost;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields_of(rows[i]);
        REQUIRE(f.size() == 12);
        const auto [it, fresh] = cost.emplace(f[1], f[2]);
        if (!fresh)
            CHECK(it->second == f[2]);
    }
    CHECK(cost.size() == 3);

    const auto irows = lines_of(slurp(iout));
    REQUIRE(irows.size() >= 1 + rows.size() - 1); // at least one iteration per run
    CHECK(irows[0].rfind("algorithm,instance,", 0) == 0);
}

TEST_CASE("build-pdb reports entry count and depth") {
    const fs::path d = work_dir();
    const fs::path pdb = d / "blank4.pdb";
    const int rc = run("build-pdb --domain stp3 --pattern 1,2,3,4 --out " + pdb.string(),
                       d / "p.out", d / "p.err");
    CHECK(rc == 0);
    const std::string out = slurp(d / "p.out");
    CHECK(out.find("entries 3024") != std::string::npos);
    CHECK(out.find("max_depth ") != std::string::npos);
    CHECK(fs::exists(pdb));

    // and the saved table feeds a run
    const fs::path inst = d / "pdb_inst.txt";
    REQUIRE(run("gen-instances --domain stp3 --count 2 --min-length 8 --max-length 8 "
                "--seed 3 --out " + inst.string(),
                d / "g2.out", d / "g2.err") == 0);
    CHECK(run("run --domain stp3 --algo batch-idastar --heuristic pdb:" + pdb.string() +
              " --instances " + inst.string() + " --out " + (d / "pr.csv").string(),
              d / "pr.out", d / "pr.err") == 0);
}

TEST_CASE("balance prints the fill/process comparison") {
    const fs::path d = work_dir();
    const int rc = run("balance --b-nn 800 --n 8 --t-pdb-us 1 --t-nn-us 60 --t-copy-us 20",
                       d / "b.out", d / "b.err");
    CHECK(rc == 0);
    const std::string out = slurp(d / "b.out");
    CHECK(out.find("fill_us ") != std::string::npos);
    CHECK(out.find("process_us ") != std::string::npos);
    CHECK(out.find("ratio ") != std::string::npos);
    CHECK(out.find("dominant ") != std::string::npos);
}

TEST_CASE("timeouts are reported as rows, not errors") {
    const fs::path d = work_dir();
    const fs::path inst = d / "hard.txt";
    std::ofstream(inst) << "stp 3 8 7 6 0 4 1 2 5 3\n"; // distance 31
    const fs::path out = d / "to.csv";
    const int rc = run("run --domain stp3 --algo idastar --heuristic zero "
                       "--time-limit-s 0.05 --instances " + inst.string() + " --out " +
                       out.string(),
                       d / "t.out", d / "t.err");
    CHECK(rc == 0);
    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(fields_of(rows[1])[2] == "timeout");
}

TEST_CASE("config file values apply to the run subcommand") {
    const fs::path d = work_dir();
    const fs::path inst = d / "cfg_inst.txt";
    REQUIRE(run("gen-instances --domain stp3 --count 1 --min-length 6 --max-length 6 "
                "--seed 5 --out " + inst.string(),
                d / "g3.out", d / "g3.err") == 0);
    const fs::path out = d / "cfg.csv";
    const fs::path cfg = d / "bench.ini";
    std::ofstream(cfg) << "[run]\n"
                       << "domain=stp3\n"
                       << "algo=idastar\n"
                       << "heuristic=manhattan\n"
                       << "instances=" << inst.string() << "\n"
                       << "out=" << out.string() << "\n";
    const int rc = run("--config " + cfg.string() + " run", d / "c.out", d / "c.err");
    CHECK(rc == 0);
    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(fields_of(rows[1])[0] == "idastar");
}

TEST_CASE("failures exit nonzero with a diagnostic") {
    const fs::path d = work_dir();
    const fs::path inst = d / "err_inst.txt";
    std::ofstream(inst) << "stp 3 1 2 3 4 5 6 7 8 0\n";

    CHECK(run("run --domain stp3 --algo nonsense --heuristic manhattan --instances " +
              inst.string(),
              d / "e1.out", d / "e1.err") != 0);
    CHECK(slurp(d / "e1.err").find("unknown algorithm") != std::string::npos);

    CHECK(run("run --domain stp3 --algo idastar --heuristic pdb:" +
              (d / "missing.pdb").string() + " --instances " + inst.string(),
              d / "e2.out", d / "e2.err") != 0);
    CHECK(slurp(d / "e2.err").find("build-pdb") != std::string::npos);

    CHECK(run("run --domain bogus --algo idastar --instances " + inst.string(),
              d / "e3.out", d / "e3.err") != 0);
}
