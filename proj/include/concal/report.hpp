#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "concal/calibration.hpp"
#include "concal/io.hpp"
#include "concal/pipeline.hpp"
#include "concal/svg.hpp"

namespace concal {

struct OutputOptions {
    bool svg = true;
    bool dump_matrices = false;  // H, and C and Gamma for every cell
};

// Run facts that live outside PipelineConfig.
struct RunMeta {
    std::string input;
    bool standardized = false;
    ScoreKind score = ScoreKind::consensus;
};

// The calibrated cell's stable clusters, or a single cluster when nothing is stable.
inline ClusterAssignment selected_assignment(const ConsensusRun& run, const Calibration& cal) {
    if (cal.status == CalibrationStatus::ok) return run.stable[run.cell_index(cal.lambda_index, cal.G_index)];
    ClusterAssignment z;
    z.labels.assign(static_cast<std::size_t>(run.subsamples.n), 1);
    z.num_clusters = 1;
    return z;
}

inline std::size_t selected_cell(const ConsensusRun& run, const Calibration& cal) {
    return cal.status == CalibrationStatus::ok ? run.cell_index(cal.lambda_index, cal.G_index) : 0;
}

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json calibration_json(const Calibration& cal) {
    nlohmann::json j;
    j["status"] = cal.status == CalibrationStatus::ok ? "ok" : "no_stable_structure";
    if (cal.status == CalibrationStatus::ok) {
        j["lambda"] = cal.lambda;
        j["G"] = cal.G;
        j["score"] = cal.score;
    }
    return j;
}

inline std::vector<ScoreKind> computed_scores(const PipelineConfig& cfg) {
    std::vector<ScoreKind> out{ScoreKind::consensus, ScoreKind::delta, ScoreKind::pac};
    if (cfg.compute_silhouette) out.push_back(ScoreKind::silhouette);
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace detail

// One row per (lambda, G) cell with tallies and every score.
inline void write_score_table(std::ostream& out, const ScoreGrid& grid) {
    out << "lambda\tG\tX_w\tX_b\tN_w\tN_b\tconsensus\tarea\tdelta\tpac\tsilhouette\tweights_converged\n";
    for (const auto& c : grid.cells)
        out << format_double(c.lambda) << '\t' << c.G << '\t' << c.tallies.within_comembers << '\t'
            << c.tallies.between_comembers << '\t' << c.tallies.within_pairs << '\t' << c.tallies.between_pairs << '\t'
            << format_double(c.consensus) << '\t' << format_double(c.area) << '\t' << format_double(c.delta) << '\t'
            << format_double(c.pac) << '\t' << format_double(c.silhouette) << '\t' << format_double(c.weights_converged)
            << '\n';
}

// Deterministic report: no timings, no thread count.
inline nlohmann::json build_report(const DataMatrix& data, const PipelineConfig& cfg, const ConsensusRun& run,
                                   const RunMeta& meta) {
    using nlohmann::json;
    json r;
    json c;
    c["input"] = meta.input;
    c["standardized"] = meta.standardized;
    c["method"] = to_string(cfg.method);
    c["algorithm"] = to_string(cfg.algorithm);
    c["linkage"] = to_string(cfg.linkage);
    c["consensus_linkage"] = to_string(cfg.consensus_linkage.value_or(cfg.linkage));
    c["K"] = cfg.K;
    c["tau"] = cfg.tau;
    c["seed"] = cfg.seed;
    c["G_grid"] = cfg.G_grid;
    c["lambda_grid"] = run.grid.lambdas;
    c["score"] = to_string(meta.score);
    c["pac_bounds"] = {cfg.pac_lower, cfg.pac_upper};
    r["config"] = c;
    r["n"] = data.n();
    r["p"] = data.p();
    r["subsample_size"] = run.subsamples.subsample_size();

    const Calibration cal = calibrate(run.grid, meta.score);
    r["status"] = cal.status == CalibrationStatus::ok ? "ok" : "no_stable_structure";
    r["calibration"] = detail::calibration_json(cal);
    json all = json::object();
    for (ScoreKind k : detail::computed_scores(cfg)) all[to_string(k)] = detail::calibration_json(calibrate(run.grid, k));
    r["calibration_by_score"] = all;

    const ClusterAssignment z = selected_assignment(run, cal);
    r["assignment"] = z.labels;

    json cells = json::array();
    for (const auto& cell : run.grid.cells) {
        json jc;
        jc["lambda"] = cell.lambda;
        jc["G"] = cell.G;
        jc["X_w"] = cell.tallies.within_comembers;
        jc["X_b"] = cell.tallies.between_comembers;
        jc["N_w"] = cell.tallies.within_pairs;
        jc["N_b"] = cell.tallies.between_pairs;
        jc["consensus"] = detail::number_or_null(cell.consensus);
        jc["area"] = cell.area;
        jc["delta"] = detail::number_or_null(cell.delta);
        jc["pac"] = cell.pac;
        jc["silhouette"] = detail::number_or_null(cell.silhouette);
        jc["weights_converged"] = cell.weights_converged;
        cells.push_back(jc);
    }
    r["score_grid"] = cells;

    if (cfg.method != Method::unweighted) {
        json w = json::array();
        for (std::size_t l = 0; l < run.grid.lambdas.size(); ++l) {
            json jw;
            jw["lambda"] = run.grid.lambdas[l];
            jw["median_weights"] = run.median_weights[l];
            if (!run.selection_proportions[l].empty()) jw["selection_proportions"] = run.selection_proportions[l];
            w.push_back(jw);
        }
        r["weights"] = w;
        r["attribute_ids"] = data.attribute_ids;
    }
    r["warnings"] = run.warnings;
    return r;
}

// Writes every output file into `dir` and returns the report (also written as report.json).
inline nlohmann::json write_run_outputs(const std::filesystem::path& dir, const DataMatrix& data,
                                        const PipelineConfig& cfg, const ConsensusRun& run, const RunMeta& meta,
                                        const OutputOptions& opts = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json report = build_report(data, cfg, run, meta);
    const Calibration cal = calibrate(run.grid, meta.score);
    const ClusterAssignment z = selected_assignment(run, cal);
    const std::size_t cell = selected_cell(run, cal);
    const Eigen::MatrixXd gamma = run.gamma(cell);

    nlohmann::json files;
    {
        std::ostringstream s;
        write_labels(s, data.item_ids, z);
        detail::write_text(dir / "assignment.tsv", s.str());
        files["assignment"] = "assignment.tsv";
    }
    {
        std::ostringstream s;
        write_matrix(s, gamma, data.item_ids, data.item_ids);
        detail::write_text(dir / "gamma.tsv", s.str());
        files["gamma"] = "gamma.tsv";
    }
    {
        std::ostringstream s;
        write_score_table(s, run.grid);
        detail::write_text(dir / "scores.tsv", s.str());
        files["scores"] = "scores.tsv";
    }
    if (cfg.method != Method::unweighted) {
        std::vector<std::string> rows;
        RowMatrix W(static_cast<Eigen::Index>(run.grid.lambdas.size()), data.p());
        for (std::size_t l = 0; l < run.grid.lambdas.size(); ++l) {
            rows.push_back(format_double(run.grid.lambdas[l]));
            for (int m = 0; m < data.p(); ++m)
                W(static_cast<Eigen::Index>(l), m) =
                    run.median_weights[l].empty() ? 0.0 : run.median_weights[l][static_cast<std::size_t>(m)];
        }
        std::ostringstream s;
        write_matrix(s, W, rows, data.attribute_ids, "lambda");
        detail::write_text(dir / "median_weights.tsv", s.str());
        files["median_weights"] = "median_weights.tsv";
    }
    if (opts.svg) {
        std::ostringstream curve;
        write_calibration_svg(curve, run.grid, cal, meta.score);
        detail::write_text(dir / "calibration.svg", curve.str());
        files["calibration_svg"] = "calibration.svg";
        std::ostringstream heat;
        write_heatmap_svg(heat, gamma, z);
        detail::write_text(dir / "heatmap.svg", heat.str());
        files["heatmap_svg"] = "heatmap.svg";
    }
    if (opts.dump_matrices) {
        fs::create_directories(dir / "matrices");
        std::ostringstream h;
        write_matrix(h, run.subsamples.H, data.item_ids, data.item_ids);
        detail::write_text(dir / "matrices" / "H.tsv", h.str());
        for (std::size_t l = 0; l < run.grid.lambdas.size(); ++l)
            for (std::size_t g = 0; g < run.grid.Gs.size(); ++g) {
                const std::size_t idx = run.cell_index(l, g);
                const std::string tag = "l" + std::to_string(l) + "_G" + std::to_string(run.grid.Gs[g]);
                std::ostringstream cs, gs;
                write_matrix(cs, run.counts[idx], data.item_ids, data.item_ids);
                write_matrix(gs, run.gamma(idx), data.item_ids, data.item_ids);
                detail::write_text(dir / "matrices" / ("C_" + tag + ".tsv"), cs.str());
                detail::write_text(dir / "matrices" / ("gamma_" + tag + ".tsv"), gs.str());
            }
        files["matrices"] = "matrices/";
    }
    report["files"] = files;
    detail::write_text(dir / "report.json", report.dump(2) + "\n");
    return report;
}

}  // namespace concal
