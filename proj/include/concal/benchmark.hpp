#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "concal/calibration.hpp"
#include "concal/metrics.hpp"
#include "concal/pipeline.hpp"
#include "concal/simulate.hpp"

namespace concal {

// One method to run on every simulated dataset and the scores used to calibrate it.
// Method "baseline" is plain hierarchical clustering of the full data with G chosen by silhouette.
struct BenchmarkArm {
    std::string method = "unweighted";
    std::vector<ScoreKind> scores{ScoreKind::consensus};
    std::vector<double> lambda_grid;  // empty: method default
};

struct BenchmarkScenario {
    std::string name = "scenario";
    int repeats = 1;
    std::uint64_t seed = 1;
    SimulationSpec simulation;  // its seed is replaced per repeat
    PipelineConfig pipeline;    // method and lambda grid are replaced per arm
    std::vector<BenchmarkArm> arms{BenchmarkArm{}};
};

struct RepeatRecord {
    int repeat = 0;
    std::string method;
    std::string score;
    int G = 0;
    double lambda = 0.0;
    double rand = std::numeric_limits<double>::quiet_NaN();
    double ari = std::numeric_limits<double>::quiet_NaN();
    double jaccard = std::numeric_limits<double>::quiet_NaN();
    double weight_f1 = std::numeric_limits<double>::quiet_NaN();  // weighted methods with q < p
    double seconds = 0.0;
    std::string status = "ok";  // ok, no_stable_structure, or the error message
};

// {"cluster_sizes": [...], "p": .., "q": .., "explained_variance": 0.6 | [...],
//  "correlation": "independent" | "block_graph", "seed": ..}
inline SimulationSpec simulation_from_json(const nlohmann::json& sim) {
    SimulationSpec spec;
    spec.cluster_sizes = sim.at("cluster_sizes").get<std::vector<int>>();
    if (sim.contains("explained_variance") && sim.at("explained_variance").is_array()) {
        spec.explained_variance = sim.at("explained_variance").get<std::vector<double>>();
    } else {
        const int p = sim.at("p").get<int>();
        spec.explained_variance = explained_variance_profile(p, sim.value("q", p), sim.value("explained_variance", 0.6));
    }
    const std::string corr = sim.value("correlation", std::string("independent"));
    if (corr == "block_graph")
        spec.correlation.kind = CorrelationKind::block_graph;
    else if (corr != "independent")
        throw InputError("unknown correlation '" + corr + "'");
    spec.seed = sim.value("seed", spec.seed);
    spec.validate();
    return spec;
}

inline BenchmarkScenario scenario_from_json(const nlohmann::json& j) {
    BenchmarkScenario s;
    s.name = j.value("name", s.name);
    s.repeats = j.value("repeats", 1);
    s.seed = j.value("seed", std::uint64_t{1});
    if (s.repeats < 1) throw InputError("scenario: repeats must be positive");

    s.simulation = simulation_from_json(j.at("simulation"));

    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        s.pipeline.K = p.value("K", s.pipeline.K);
        s.pipeline.tau = p.value("tau", s.pipeline.tau);
        s.pipeline.G_grid = integer_range(p.value("G_min", 2), p.value("G_max", 20));
        if (p.contains("linkage")) s.pipeline.linkage = parse_linkage(p.at("linkage").get<std::string>());
        if (p.contains("algorithm")) s.pipeline.algorithm = parse_algorithm(p.at("algorithm").get<std::string>());
    }
    if (j.contains("arms")) {
        s.arms.clear();
        for (const auto& a : j.at("arms")) {
            BenchmarkArm arm;
            arm.method = a.value("method", arm.method);
            if (arm.method != "baseline") parse_method(arm.method);
            if (a.contains("scores")) {
                arm.scores.clear();
                for (const auto& k : a.at("scores")) arm.scores.push_back(parse_score_kind(k.get<std::string>()));
            }
            arm.lambda_grid = a.value("lambda_grid", std::vector<double>{});
            s.arms.push_back(arm);
        }
    }
    return s;
}

namespace detail {

// Sparse clustering ranks attributes by selection proportion with ties broken by
// median weight; COSA ranks by median weight. Returned as strictly decreasing keys.
inline std::vector<double> attribute_ranking(const std::vector<double>& median_weights,
                                             const std::vector<double>& selection) {
    if (selection.empty()) return median_weights;
    std::vector<int> order(median_weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        if (selection[ua] != selection[ub]) return selection[ua] > selection[ub];
        return median_weights[ua] > median_weights[ub];
    });
    std::vector<double> key(order.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        key[static_cast<std::size_t>(order[r])] = static_cast<double>(order.size() - r);
    return key;
}

inline void score_partition(RepeatRecord& rec, const ClusterAssignment& truth, const ClusterAssignment& est) {
    const PairConfusion pc = pair_confusion(truth, est);
    rec.rand = rand_index(pc);
    rec.ari = adjusted_rand_index(pc);
    rec.jaccard = jaccard_index(pc);
}

}  // namespace detail

// Runs every arm on `repeats` simulated datasets. Failures are recorded per row.
inline std::vector<RepeatRecord> run_benchmark(const BenchmarkScenario& sc, unsigned threads = 1,
                                               const std::function<void(const RepeatRecord&)>& on_record = {}) {
    using clock = std::chrono::steady_clock;
    std::vector<RepeatRecord> out;
    auto emit = [&](RepeatRecord rec) {
        if (on_record) on_record(rec);
        out.push_back(std::move(rec));
    };

    for (int r = 0; r < sc.repeats; ++r) {
        SimulationSpec spec = sc.simulation;
        spec.seed = derive_seed(sc.seed, static_cast<std::uint64_t>(2 * r));
        SimulatedDataset ds;
        try {
            ds = simulate_dataset(spec);
        } catch (const std::exception& e) {
            for (const auto& arm : sc.arms)
                for (ScoreKind k : arm.scores) {
                    RepeatRecord rec;
                    rec.repeat = r;
                    rec.method = arm.method;
                    rec.score = to_string(k);
                    rec.status = std::string("simulation failed: ") + e.what();
                    emit(rec);
                }
            continue;
        }
        const bool has_noise_attributes = static_cast<int>(ds.contributing.size()) < ds.data.p();

        for (const auto& arm : sc.arms) {
            RepeatRecord base;
            base.repeat = r;
            base.method = arm.method;
            const auto t0 = clock::now();

            if (arm.method == "baseline") {
                RepeatRecord rec = base;
                rec.score = "silhouette";
                try {
                    const BaselineRun b = run_baseline(ds.data, sc.pipeline.G_grid, sc.pipeline.linkage);
                    std::size_t best = 0;
                    double best_v = -std::numeric_limits<double>::infinity();
                    for (std::size_t g = 0; g < b.Gs.size(); ++g)
                        if (std::isfinite(b.silhouette[g]) && b.silhouette[g] > best_v) {
                            best_v = b.silhouette[g];
                            best = g;
                        }
                    rec.G = b.Gs[best];
                    detail::score_partition(rec, ds.truth, b.assignments[best]);
                } catch (const std::exception& e) {
                    rec.status = e.what();
                }
                rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
                emit(rec);
                continue;
            }

            PipelineConfig cfg = sc.pipeline;
            cfg.method = parse_method(arm.method);
            cfg.lambda_grid = arm.lambda_grid;
            cfg.seed = derive_seed(sc.seed, static_cast<std::uint64_t>(2 * r + 1));
            cfg.threads = threads;
            cfg.compute_silhouette =
                std::find(arm.scores.begin(), arm.scores.end(), ScoreKind::silhouette) != arm.scores.end();
            try {
                const ConsensusRun run = run_consensus(ds.data, cfg);
                const double secs = std::chrono::duration<double>(clock::now() - t0).count();
                for (ScoreKind k : arm.scores) {
                    RepeatRecord rec = base;
                    rec.score = to_string(k);
                    rec.seconds = secs;
                    const Calibration cal = calibrate(run.grid, k);
                    if (cal.status != CalibrationStatus::ok) {
                        rec.status = "no_stable_structure";
                        emit(rec);
                        continue;
                    }
                    rec.G = cal.G;
                    rec.lambda = cal.lambda;
                    detail::score_partition(rec, ds.truth, run.stable[run.cell_index(cal.lambda_index, cal.G_index)]);
                    const auto& w = run.median_weights[cal.lambda_index];
                    if (has_noise_attributes && !w.empty())
                        rec.weight_f1 = weighting_f1(
                            ds.contributing,
                            detail::attribute_ranking(w, run.selection_proportions[cal.lambda_index]),
                            static_cast<int>(ds.contributing.size()));
                    emit(rec);
                }
            } catch (const std::exception& e) {
                for (ScoreKind k : arm.scores) {
                    RepeatRecord rec = base;
                    rec.score = to_string(k);
                    rec.status = e.what();
                    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
                    emit(rec);
                }
            }
        }
    }
    return out;
}

struct SummaryStat {
    double median = std::numeric_limits<double>::quiet_NaN();
    double iqr = std::numeric_limits<double>::quiet_NaN();
};

struct BenchmarkSummary {
    std::string method;
    std::string score;
    int successes = 0;
    int failures = 0;
    SummaryStat G, rand, ari, jaccard, weight_f1, seconds;
};

inline SummaryStat summarize_values(const std::vector<double>& v) {
    SummaryStat s;
    if (v.empty()) return s;
    s.median = median(v);
    s.iqr = quantile(v, 0.75) - quantile(v, 0.25);
    return s;
}

// Median and IQR per (method, score) over successful repeats, in first-seen order.
inline std::vector<BenchmarkSummary> summarize(const std::vector<RepeatRecord>& records) {
    std::vector<BenchmarkSummary> out;
    std::vector<std::array<std::vector<double>, 6>> values;
    for (const auto& rec : records) {
        std::size_t idx = 0;
        while (idx < out.size() && !(out[idx].method == rec.method && out[idx].score == rec.score)) ++idx;
        if (idx == out.size()) {
            BenchmarkSummary row;
            row.method = rec.method;
            row.score = rec.score;
            out.push_back(row);
            values.emplace_back();
        }
        if (rec.status != "ok") {
            ++out[idx].failures;
            continue;
        }
        ++out[idx].successes;
        auto& v = values[idx];
        v[0].push_back(rec.G);
        v[1].push_back(rec.rand);
        v[2].push_back(rec.ari);
        v[3].push_back(rec.jaccard);
        if (std::isfinite(rec.weight_f1)) v[4].push_back(rec.weight_f1);
        v[5].push_back(rec.seconds);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].G = summarize_values(values[i][0]);
        out[i].rand = summarize_values(values[i][1]);
        out[i].ari = summarize_values(values[i][2]);
        out[i].jaccard = summarize_values(values[i][3]);
        out[i].weight_f1 = summarize_values(values[i][4]);
        out[i].seconds = summarize_values(values[i][5]);
    }
    return out;
}

inline void write_repeat_table(std::ostream& out, const std::vector<RepeatRecord>& records) {
    out << "repeat\tmethod\tscore\tG\tlambda\trand\tari\tjaccard\tweight_f1\tseconds\tstatus\n";
    for (const auto& r : records) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d\t%s\t%s\t%d\t%.6g\t%.6f\t%.6f\t%.6f\t%.6f\t%.3f\t", r.repeat, r.method.c_str(),
                      r.score.c_str(), r.G, r.lambda, r.rand, r.ari, r.jaccard, r.weight_f1, r.seconds);
        out << buf << r.status << '\n';
    }
}

// "median [IQR]" table with one row per (method, score).
inline void write_summary_table(std::ostream& out, const std::vector<BenchmarkSummary>& rows) {
    auto cell = [](const SummaryStat& s, const char* f) {
        if (!std::isfinite(s.median)) return std::string("-");
        char buf[64];
        std::snprintf(buf, sizeof buf, f, s.median, s.iqr);
        return std::string(buf);
    };
    out << "method\tscore\tok\tfailed\tG\tRand\tARI\tJaccard\tweight_F1\tseconds\n";
    for (const auto& r : rows)
        out << r.method << '\t' << r.score << '\t' << r.successes << '\t' << r.failures << '\t'
            << cell(r.G, "%.1f [%.1f]") << '\t' << cell(r.rand, "%.3f [%.3f]") << '\t' << cell(r.ari, "%.3f [%.3f]")
            << '\t' << cell(r.jaccard, "%.3f [%.3f]") << '\t' << cell(r.weight_f1, "%.3f [%.3f]") << '\t'
            << cell(r.seconds, "%.2f [%.2f]") << '\n';
}

}  // namespace concal
