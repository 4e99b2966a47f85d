// concal: consensus clustering with calibrated G and lambda.
//
//   concal simulate  --sizes 20,50,30,10,40 --p 10 --E 0.6 --out sim/
//   concal cluster   --input sim/data.tsv --method cosa --out run/
//   concal benchmark --scenario scenarios/five_clusters_e06.json
//   concal score     --truth sim/truth.tsv --estimate run/assignment.tsv

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "concal/benchmark.hpp"
#include "concal/concal.hpp"
#include "concal/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace concal;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct SimulateArgs {
    std::vector<int> sizes{20, 50, 30, 10, 40};
    int p = 10;
    int q = -1;  // -1: all attributes contribute
    double E = 0.6;
    std::string correlation = "independent";
    std::uint64_t seed = 1;
    std::string out = "simulation";
};

struct ClusterArgs {
    std::string input;
    std::string simulation;
    std::string out = "concal_out";
    std::string method = "unweighted";
    std::string algorithm = "hierarchical";
    std::string linkage = "complete";
    std::string consensus_linkage;
    std::string metric = "euclidean";
    std::string kernel = "squared";
    int K = 100;
    double tau = 0.5;
    std::uint64_t seed = 1;
    int G_min = 2;
    int G_max = 20;
    std::vector<int> G_list;
    std::vector<double> lambdas;
    std::string score = "consensus";
    bool silhouette = false;
    double pac_lower = 0.1;
    double pac_upper = 0.9;
    unsigned threads = 1;
    std::optional<bool> standardize;
    bool no_svg = false;
    bool dump = false;
};

struct BenchmarkArgs {
    std::string scenario;
    std::string out;
    int repeats = 0;
    unsigned threads = 1;
};

struct ScoreArgs {
    std::string truth;
    std::string estimate;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

int cmd_simulate(const SimulateArgs& a) {
    SimulationSpec spec;
    spec.cluster_sizes = a.sizes;
    spec.explained_variance = explained_variance_profile(a.p, a.q < 0 ? a.p : a.q, a.E);
    if (a.correlation == "block_graph")
        spec.correlation.kind = CorrelationKind::block_graph;
    else if (a.correlation != "independent")
        throw InputError("unknown correlation '" + a.correlation + "'");
    spec.seed = a.seed;
    const SimulatedDataset ds = simulate_dataset(spec);

    fs::create_directories(a.out);
    std::ostringstream data, truth;
    write_data(data, ds.data);
    write_labels(truth, ds.data.item_ids, ds.truth);
    write_file(fs::path(a.out) / "data.tsv", data.str());
    write_file(fs::path(a.out) / "truth.tsv", truth.str());

    json m;
    m["simulation"] = {{"cluster_sizes", a.sizes},
                       {"p", a.p},
                       {"q", a.q < 0 ? a.p : a.q},
                       {"explained_variance", a.E},
                       {"correlation", a.correlation},
                       {"seed", a.seed}};
    m["n"] = ds.data.n();
    m["contributing_attributes"] = ds.contributing;
    m["warnings"] = ds.warnings;
    m["files"] = {{"data", "data.tsv"}, {"truth", "truth.tsv"}};
    write_file(fs::path(a.out) / "manifest.json", m.dump(2) + "\n");
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << ds.data.n() << " x " << ds.data.p() << " data to " << a.out << '\n';
    return 0;
}

int cmd_cluster(const ClusterArgs& a) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    if (a.input.empty() == a.simulation.empty()) throw InputError("give exactly one of --input and --simulation");

    DataMatrix data;
    bool simulated = false;
    std::vector<std::string> warnings;
    if (!a.input.empty()) {
        data = read_data_file(a.input);
    } else {
        const SimulatedDataset ds = simulate_dataset(simulation_from_json(read_json_file(a.simulation)));
        data = ds.data;
        warnings = ds.warnings;
        simulated = true;
    }
    const bool standardized = a.standardize.value_or(!simulated);
    if (standardized) standardize(data);

    PipelineConfig cfg;
    cfg.method = parse_method(a.method);
    cfg.algorithm = parse_algorithm(a.algorithm);
    cfg.linkage = parse_linkage(a.linkage);
    if (!a.consensus_linkage.empty()) cfg.consensus_linkage = parse_linkage(a.consensus_linkage);
    if (a.metric == "euclidean")
        cfg.metric = DistanceMetric::euclidean;
    else if (a.metric == "manhattan")
        cfg.metric = DistanceMetric::manhattan;
    else
        throw InputError("unknown metric '" + a.metric + "'");
    if (a.kernel == "squared")
        cfg.kernel = AttributeKernel::squared_difference;
    else if (a.kernel == "absolute")
        cfg.kernel = AttributeKernel::absolute_difference;
    else
        throw InputError("unknown kernel '" + a.kernel + "'");
    cfg.K = a.K;
    cfg.tau = a.tau;
    cfg.seed = a.seed;
    cfg.G_grid = a.G_list.empty() ? integer_range(a.G_min, a.G_max) : a.G_list;
    cfg.lambda_grid = a.lambdas;
    const ScoreKind kind = parse_score_kind(a.score);
    cfg.compute_silhouette = a.silhouette || kind == ScoreKind::silhouette;
    cfg.pac_lower = a.pac_lower;
    cfg.pac_upper = a.pac_upper;
    cfg.threads = resolve_threads(a.threads);
    const auto t_read = clock::now();

    ConsensusRun run = run_consensus(data, cfg);
    run.warnings.insert(run.warnings.begin(), warnings.begin(), warnings.end());
    const auto t_run = clock::now();

    RunMeta meta{a.input.empty() ? a.simulation : a.input, standardized, kind};
    OutputOptions opts;
    opts.svg = !a.no_svg;
    opts.dump_matrices = a.dump;
    const json report = write_run_outputs(a.out, data, cfg, run, meta, opts);
    const auto t_write = clock::now();

    auto secs = [](auto d) { return std::chrono::duration<double>(d).count(); };
    json timings = {{"threads", cfg.threads},
                    {"seconds",
                     {{"input", secs(t_read - t0)}, {"consensus", secs(t_run - t_read)}, {"write", secs(t_write - t_run)}}}};
    write_file(fs::path(a.out) / "timings.json", timings.dump(2) + "\n");

    for (const auto& w : run.warnings) std::cerr << "warning: " << w << '\n';
    if (report["status"] == "ok")
        std::cout << "status ok: G=" << report["calibration"]["G"] << " lambda=" << report["calibration"]["lambda"]
                  << " " << a.score << "=" << report["calibration"]["score"] << '\n';
    else
        std::cout << "status no_stable_structure\n";
    return 0;
}

int cmd_benchmark(const BenchmarkArgs& a) {
    BenchmarkScenario sc = scenario_from_json(read_json_file(a.scenario));
    if (a.repeats > 0) sc.repeats = a.repeats;
    const auto records = run_benchmark(sc, resolve_threads(a.threads), [](const RepeatRecord& r) {
        std::cerr << "repeat " << r.repeat << ' ' << r.method << '/' << r.score << ": ";
        if (r.status == "ok")
            std::cerr << "G=" << r.G << " ARI=" << r.ari << '\n';
        else
            std::cerr << r.status << '\n';
    });
    const auto summary = summarize(records);
    std::ostringstream table;
    write_summary_table(table, summary);
    std::cout << table.str();
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        std::ostringstream reps;
        write_repeat_table(reps, records);
        write_file(fs::path(a.out) / "repeats.tsv", reps.str());
        write_file(fs::path(a.out) / "summary.tsv", table.str());
    }
    return 0;
}

int cmd_score(const ScoreArgs& a) {
    const ClusterAssignment truth = read_labels_file(a.truth);
    const ClusterAssignment est = read_labels_file(a.estimate);
    const PairConfusion pc = pair_confusion(truth, est);
    json j = {{"n", truth.n()},
              {"clusters_truth", truth.num_clusters},
              {"clusters_estimate", est.num_clusters},
              {"rand", rand_index(pc)},
              {"ari", adjusted_rand_index(pc)},
              {"jaccard", jaccard_index(pc)},
              {"pairs", {{"tp", pc.tp}, {"tn", pc.tn}, {"fp", pc.fp}, {"fn", pc.fn}}}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus clustering with calibrated number of clusters and weighting strength"};
    app.set_config("--config", "", "INI or TOML file; [cluster], [simulate] ... sections set subcommand options");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Write a simulated Gaussian-mixture data set");
    s->add_option("--sizes", sim.sizes, "Cluster sizes")->delimiter(',')->capture_default_str();
    s->add_option("--p", sim.p, "Number of attributes")->capture_default_str();
    s->add_option("--q", sim.q, "Number of contributing attributes (default: all)");
    s->add_option("--E", sim.E, "Explained variance of contributing attributes")->capture_default_str();
    s->add_option("--correlation", sim.correlation, "independent or block_graph")->capture_default_str();
    s->add_option("--seed", sim.seed)->capture_default_str();
    s->add_option("-o,--out", sim.out, "Output directory")->capture_default_str();

    ClusterArgs cl;
    auto* c = app.add_subcommand("cluster", "Consensus clustering over a (lambda, G) grid");
    c->add_option("-i,--input", cl.input, "Delimited data file (items in rows, ids in the first row and column)");
    c->add_option("--simulation", cl.simulation, "JSON simulation spec to cluster instead of --input");
    c->add_option("-o,--out", cl.out, "Output directory")->capture_default_str();
    c->add_option("--method", cl.method, "unweighted, sparcl or cosa")->capture_default_str();
    c->add_option("--algorithm", cl.algorithm, "hierarchical or pam")->capture_default_str();
    c->add_option("--linkage", cl.linkage, "complete, average or single")->capture_default_str();
    c->add_option("--consensus-linkage", cl.consensus_linkage, "Linkage on 1 - consensus (default: --linkage)");
    c->add_option("--metric", cl.metric, "Unweighted distance: euclidean or manhattan")->capture_default_str();
    c->add_option("--kernel", cl.kernel, "Per-attribute distance for weighting: squared or absolute")
        ->capture_default_str();
    c->add_option("-K,--subsamples", cl.K, "Number of subsamples")->capture_default_str();
    c->add_option("--tau", cl.tau, "Subsampling proportion")->capture_default_str();
    c->add_option("--seed", cl.seed, "Master seed")->capture_default_str();
    c->add_option("--G-min", cl.G_min)->capture_default_str();
    c->add_option("--G-max", cl.G_max)->capture_default_str();
    c->add_option("--G", cl.G_list, "Explicit G values (overrides --G-min/--G-max)")->delimiter(',');
    c->add_option("--lambda", cl.lambdas, "Lambda grid (default depends on --method)")->delimiter(',');
    c->add_option("--score", cl.score, "Calibration score: consensus, delta, pac or silhouette")->capture_default_str();
    c->add_flag("--silhouette", cl.silhouette, "Also compute silhouette for every cell");
    c->add_option("--pac-lower", cl.pac_lower)->capture_default_str();
    c->add_option("--pac-upper", cl.pac_upper)->capture_default_str();
    c->add_option("-t,--threads", cl.threads, "Worker threads (0: all cores)")->envname("CONCAL_THREADS")->capture_default_str();
    c->add_flag("--standardize,!--no-standardize", cl.standardize,
                "z-score attributes (default: on for --input, off for --simulation)");
    c->add_flag("--no-svg", cl.no_svg, "Skip the SVG plots");
    c->add_flag("--dump-matrices", cl.dump, "Write H, C and consensus matrices for every cell");

    BenchmarkArgs bm;
    auto* b = app.add_subcommand("benchmark", "Repeat simulation and clustering, report median [IQR] per method");
    b->add_option("-s,--scenario", bm.scenario, "Scenario JSON")->required();
    b->add_option("-o,--out", bm.out, "Directory for repeats.tsv and summary.tsv");
    b->add_option("--repeats", bm.repeats, "Override the scenario's repeat count");
    b->add_option("-t,--threads", bm.threads, "Worker threads (0: all cores)")->envname("CONCAL_THREADS")->capture_default_str();

    ScoreArgs sc;
    auto* k = app.add_subcommand("score", "Rand, adjusted Rand and Jaccard between two label files");
    k->add_option("--truth", sc.truth)->required();
    k->add_option("--estimate", sc.estimate)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*s) return cmd_simulate(sim);
        if (*c) return cmd_cluster(cl);
        if (*b) return cmd_benchmark(bm);
        if (*k) return cmd_score(sc);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
