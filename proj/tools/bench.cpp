// Benchmark driver: builds PDBs, generates instance sets, runs algorithm x
// configuration grids, and emits result/iteration CSVs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bida/batch_eval.hpp"
#include "bida/instance.hpp"
#include "bida/search.hpp"

namespace {

using namespace bida;

struct RunOptions {
    std::string domain = "stp3";
    std::vector<std::string> algos{"batch-idastar"};
    std::vector<int> threads{1};
    std::vector<int> work_num{1};
    std::vector<std::size_t> batch_size{64};
    std::vector<std::int64_t> timeout_us{2000};
    int evaluators = 1;
    int d_init = -1;
    std::string heuristic = "manhattan";
    std::int64_t latency_per_call_us = 0;
    std::int64_t latency_per_item_ns = 0;
    std::string instances;
    std::uint64_t seed = 1;
    double time_limit_s = 0.0;
    std::string out;
    std::string iter_out;
    bool no_pruning = false;
};

void write_atomic(const std::string &path, const std::string &content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot write output file: " + tmp);
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::string> split(const std::string &s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim))
        out.push_back(item);
    return out;
}

// Adapts the batched linear scorer to the single-state heuristic interface
// (used by the sequential algorithms and as an evaluator source).
template <class D>
class LinearModelHeuristic final : public Heuristic<D> {
public:
    explicit LinearModelHeuristic(std::shared_ptr<LinearModelBackend<D>> backend)
        : backend_(std::move(backend)) {}
    int lookup(const typename D::State &s) const override {
        BatchItem<D> item;
        item.state = s;
        item.features.resize(static_cast<std::size_t>(D::feature_length()));
        D::encode(s, item.features.data());
        std::int32_t v = 0;
        backend_->evaluate(std::span<const BatchItem<D>>(&item, 1), std::span<std::int32_t>(&v, 1));
        return static_cast<int>(v);
    }

private:
    std::shared_ptr<LinearModelBackend<D>> backend_;
};

template <class D>
struct HeuristicSetup {
    std::shared_ptr<const Heuristic<D>> source;
    std::string linear_file; // nonempty selects the linear backend
    double linear_q = 0.5;
};

template <class D>
std::shared_ptr<const PdbTable<D>> load_pdb(const std::string &path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("PDB file not found: " + path +
                                 " (build it with the build-pdb subcommand)");
    return std::make_shared<const PdbTable<D>>(PdbTable<D>::load(path));
}

template <class D>
HeuristicSetup<D> parse_heuristic(const std::string &spec) {
    HeuristicSetup<D> hs;
    const std::vector<std::string> part = split(spec, ':');
    const std::string &kind = part[0];
    if (kind == "zero") {
        hs.source = std::make_shared<ZeroHeuristic<D>>();
    } else if (kind == "manhattan") {
        if constexpr (std::is_same_v<D, TilePuzzle<3>>)
            hs.source = std::make_shared<ManhattanHeuristic<3>>();
        else if constexpr (std::is_same_v<D, TilePuzzle<4>>)
            hs.source = std::make_shared<ManhattanHeuristic<4>>();
        else
            throw std::runtime_error("heuristic 'manhattan' is only defined for tile puzzles");
    } else if (kind == "pdb") {
        if (part.size() != 2)
            throw std::runtime_error("heuristic spec: expected pdb:FILE");
        hs.source = std::make_shared<PdbHeuristic<D>>(load_pdb<D>(part[1]));
    } else if (kind == "div" || kind == "mod") {
        if (part.size() != 3)
            throw std::runtime_error("heuristic spec: expected " + kind + ":FILE:K");
        auto table = load_pdb<D>(part[1]);
        const auto k = static_cast<std::uint64_t>(std::stoull(part[2]));
        const CompressMode mode = kind == "div" ? CompressMode::Div : CompressMode::Mod;
        hs.source = std::make_shared<CompressedPdbHeuristic<D>>(
            std::make_shared<const CompressedPdb<D>>(*table, mode, k));
    } else if (kind == "additive") {
        if (part.size() != 2)
            throw std::runtime_error("heuristic spec: expected additive:FILE1+FILE2[+...]");
        std::vector<std::shared_ptr<const PdbTable<D>>> tables;
        for (const std::string &f : split(part[1], '+'))
            tables.push_back(load_pdb<D>(f));
        hs.source = std::make_shared<AdditiveHeuristic<D>>(std::move(tables));
    } else if (kind == "linear") {
        if (part.size() != 3)
            throw std::runtime_error("heuristic spec: expected linear:FILE:Q");
        hs.linear_file = part[1];
        hs.linear_q = std::stod(part[2]);
        auto backend = std::make_shared<LinearModelBackend<D>>(
            LinearModelBackend<D>::load(hs.linear_file, hs.linear_q));
        hs.source = std::make_shared<LinearModelHeuristic<D>>(std::move(backend));
    } else {
        throw std::runtime_error("unknown heuristic spec: " + spec);
    }
    return hs;
}

template <class D>
EvaluatorGroup<D> make_group(const HeuristicSetup<D> &hs, const RunOptions &opt, int evaluators,
                             std::size_t batch, std::int64_t timeout_us, bool immediate) {
    std::vector<std::unique_ptr<EvaluatorBackend<D>>> backends;
    for (int i = 0; i < evaluators; ++i) {
        if (!hs.linear_file.empty())
            backends.push_back(std::make_unique<LinearModelBackend<D>>(
                LinearModelBackend<D>::load(hs.linear_file, hs.linear_q)));
        else
            backends.push_back(std::make_unique<TableSimBackend<D>>(
                hs.source, opt.latency_per_call_us, opt.latency_per_item_ns));
    }
    return EvaluatorGroup<D>(std::move(backends), batch, timeout_us, immediate);
}

template <class D>
int run_domain(const RunOptions &opt) {
    if (opt.instances.empty())
        throw std::runtime_error("run: --instances is required");
    const std::vector<Instance<D>> instances = load_instances<D>(opt.instances);
    const HeuristicSetup<D> hs = parse_heuristic<D>(opt.heuristic);

    std::ostringstream results;
    results << "algorithm,instance,cost,expanded,generated,batches,mean_batch,wall_s,"
               "threads,work_num,batch_size,timeout_us\n";
    std::ostringstream iters;
    iters << "algorithm,instance,threads,work_num,batch_size,timeout_us,iteration,"
             "threshold,expanded,generated,batches,mean_batch\n";

    int errors = 0;
    for (const std::string &algo : opt.algos)
        for (int n : opt.threads)
            for (int k : opt.work_num)
                for (std::size_t B : opt.batch_size)
                    for (std::int64_t to : opt.timeout_us)
                        for (const Instance<D> &inst : instances) {
                            SearchConfig cfg;
                            cfg.threads = n;
                            cfg.work_num = k;
                            cfg.batch_size = B;
                            cfg.timeout_us = to;
                            cfg.evaluators = std::min(opt.evaluators, n);
                            cfg.d_init = opt.d_init;
                            cfg.prune = !opt.no_pruning;
                            cfg.seed = opt.seed;
                            cfg.time_limit_s = opt.time_limit_s;
                            try {
                                SearchResult<D> r;
                                if (algo == "idastar") {
                                    r = idastar<D>(inst, *hs.source, opt.time_limit_s);
                                } else if (algo == "aidastar") {
                                    r = aidastar<D>(inst, hs.source, cfg);
                                } else if (algo == "batch-idastar") {
                                    EvaluatorGroup<D> g =
                                        make_group(hs, opt, cfg.evaluators, B, to, false);
                                    r = batch_idastar(inst, g, cfg);
                                    g.close();
                                } else if (algo == "batch-astar") {
                                    EvaluatorGroup<D> g = make_group(hs, opt, 1, B, to, false);
                                    r = batch_astar(inst, g, cfg);
                                    g.close();
                                } else {
                                    throw std::runtime_error("unknown algorithm: " + algo);
                                }
                                results << result_csv_row(algo, inst.label, r) << ',' << n << ','
                                        << k << ',' << B << ',' << to << '\n';
                                for (std::size_t i = 0; i < r.stats.iterations.size(); ++i) {
                                    const IterationStats &row = r.stats.iterations[i];
                                    iters << algo << ',' << inst.label << ',' << n << ',' << k
                                          << ',' << B << ',' << to << ',' << i << ','
                                          << row.threshold << ',' << row.expanded << ','
                                          << row.generated << ',' << row.batches << ','
                                          << row.mean_batch() << '\n';
                                }
                            } catch (const std::exception &e) {
                                ++errors;
                                std::cerr << "error: " << algo << " on " << inst.label << ": "
                                          << e.what() << "\n";
                            }
                        }

    if (!opt.out.empty())
        write_atomic(opt.out, results.str());
    else
        std::cout << results.str();
    if (!opt.iter_out.empty())
        write_atomic(opt.iter_out, iters.str());
    return errors == 0 ? 0 : 1;
}

template <class D>
int build_pdb_domain(const std::string &pattern_csv, const std::string &out,
                     std::uint64_t max_entries) {
    std::vector<std::uint8_t> pattern;
    for (const std::string &t : split(pattern_csv, ','))
        pattern.push_back(static_cast<std::uint8_t>(std::stoi(t)));
    PdbTable<D> table = PdbTable<D>::build(pattern, D::solved(), max_entries);
    table.save(out);
    std::cout << "entries " << table.size() << "\nmax_depth " << table.max_depth() << "\n";
    return 0;
}

template <class D>
int gen_domain(int count, int min_len, int max_len, std::uint64_t seed, const std::string &out) {
    std::vector<Instance<D>> set;
    for (int i = 0; i < count; ++i) {
        const int len = min_len + (max_len > min_len ? static_cast<int>((seed + static_cast<std::uint64_t>(i)) %
                                                                        static_cast<std::uint64_t>(max_len - min_len + 1))
                                                     : 0);
        set.push_back(random_walk_instance<D>(D::solved(), len, seed + static_cast<std::uint64_t>(i)));
    }
    std::ostringstream os;
    write_instances(os, set);
    write_atomic(out, os.str());
    std::cout << "wrote " << set.size() << " instances to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Batched cost-bounded search benchmark driver"};
    app.set_config("--config");
    app.require_subcommand(1);

    RunOptions opt;
    CLI::App *run = app.add_subcommand("run", "run an algorithm/configuration grid");
    run->add_option("--domain", opt.domain, "stp3 | stp4 | rc")->capture_default_str();
    run->add_option("--algo", opt.algos,
                    "idastar | aidastar | batch-idastar | batch-astar (repeat or comma list)")
        ->delimiter(',');
    run->add_option("--threads", opt.threads, "searcher thread counts")->delimiter(',');
    run->add_option("--work-num", opt.work_num, "subtrees per thread")->delimiter(',');
    run->add_option("--batch-size", opt.batch_size, "batch capacities")->delimiter(',');
    run->add_option("--timeout-us", opt.timeout_us, "flush timeouts, microseconds (<0 disables)")
        ->delimiter(',');
    run->add_option("--evaluators", opt.evaluators, "evaluator count (clamped to threads)");
    run->add_option("--d-init", opt.d_init, "work-generation depth (<0 selects automatically)");
    run->add_option("--heuristic", opt.heuristic,
                    "zero | manhattan | pdb:F | div:F:K | mod:F:K | additive:F1+F2 | linear:F:Q");
    run->add_option("--latency-per-call-us", opt.latency_per_call_us, "simulated per-call latency");
    run->add_option("--latency-per-item-ns", opt.latency_per_item_ns, "simulated per-item latency");
    run->add_option("--instances", opt.instances, "instance file");
    run->add_option("--seed", opt.seed, "run seed");
    run->add_option("--time-limit-s", opt.time_limit_s, "per-instance time limit (0 = none)");
    run->add_option("--out", opt.out, "results CSV path (stdout when omitted)");
    run->add_option("--iter-out", opt.iter_out, "per-iteration CSV path");
    run->add_flag("--no-pruning", opt.no_pruning, "disable inverse-operator pruning");

    std::string pdb_domain = "stp3", pattern, pdb_out = "pdb.bin";
    std::uint64_t max_entries = kDefaultPdbEntryCap;
    CLI::App *bp = app.add_subcommand("build-pdb", "build and save a pattern database");
    bp->add_option("--domain", pdb_domain, "stp3 | stp4 | rc")->capture_default_str();
    bp->add_option("--pattern", pattern, "comma-separated tracked labels")->required();
    bp->add_option("--out", pdb_out, "output BPDB1 path")->capture_default_str();
    bp->add_option("--max-entries", max_entries, "abstract-space size cap");

    std::uint64_t b_nn = 0, bal_n = 0;
    double t_pdb = 0, t_nn = 0, t_copy = 0;
    CLI::App *bal = app.add_subcommand("balance", "batch-size cost-balance calculator");
    bal->add_option("--b-nn", b_nn, "batch size")->required();
    bal->add_option("--n", bal_n, "CPU thread count")->required();
    bal->add_option("--t-pdb-us", t_pdb, "per-node CPU heuristic time")->required();
    bal->add_option("--t-nn-us", t_nn, "per-batch model time")->required();
    bal->add_option("--t-copy-us", t_copy, "one-way transfer time")->required();

    std::string gen_dom = "stp3", gen_out = "instances.txt";
    int gen_count = 10, gen_min = 10, gen_max = 10;
    std::uint64_t gen_seed = 1;
    CLI::App *gen = app.add_subcommand("gen-instances", "generate seeded random-walk instances");
    gen->add_option("--domain", gen_dom, "stp3 | stp4 | rc")->capture_default_str();
    gen->add_option("--count", gen_count, "instance count");
    gen->add_option("--min-length", gen_min, "minimum walk length");
    gen->add_option("--max-length", gen_max, "maximum walk length");
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--out", gen_out, "output file")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (opt.domain == "stp3")
                return run_domain<TilePuzzle<3>>(opt);
            if (opt.domain == "stp4")
                return run_domain<TilePuzzle<4>>(opt);
            if (opt.domain == "rc")
                return run_domain<RubiksCube>(opt);
            throw std::runtime_error("unknown domain: " + opt.domain);
        }
        if (bp->parsed()) {
            if (pdb_domain == "stp3")
                return build_pdb_domain<TilePuzzle<3>>(pattern, pdb_out, max_entries);
            if (pdb_domain == "stp4")
                return build_pdb_domain<TilePuzzle<4>>(pattern, pdb_out, max_entries);
            if (pdb_domain == "rc")
                return build_pdb_domain<RubiksCube>(pattern, pdb_out, max_entries);
            throw std::runtime_error("unknown domain: " + pdb_domain);
        }
        if (bal->parsed()) {
            const BalanceReport r = predict_balance(b_nn, bal_n, t_pdb, t_nn, t_copy);
            std::cout << "fill_us " << r.fill_us << "\nprocess_us " << r.process_us << "\nratio "
                      << r.ratio << "\ndominant " << (r.fill_dominates ? "fill" : "process")
                      << "\n";
            return 0;
        }
        if (gen->parsed()) {
            if (gen_dom == "stp3")
                return gen_domain<TilePuzzle<3>>(gen_count, gen_min, gen_max, gen_seed, gen_out);
            if (gen_dom == "stp4")
                return gen_domain<TilePuzzle<4>>(gen_count, gen_min, gen_max, gen_seed, gen_out);
            if (gen_dom == "rc")
                return gen_domain<RubiksCube>(gen_count, gen_min, gen_max, gen_seed, gen_out);
            throw std::runtime_error("unknown domain: " + gen_dom);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
