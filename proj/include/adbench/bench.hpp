#pragma once

// Benchmark orchestration behind the `bench` subcommand.
//
// For every dataset: load → optional subsample → 7:3 split → preprocess
// (statistics from train only). For every model: fit, evaluate, then score
// every measure, run coverage + AUC, and emit per-cell artifacts under
// output_dir/<dataset>/<model>/<measure>/. AUC sums are min-max scaled
// within each (dataset, model) cell group; tables aggregate across models
// and datasets.
//
// Determinism: every stochastic component's seed derives from (config seed,
// dataset index, model index) via the documented mix function, iteration
// order is config order, and doubles are written via to_chars — two runs of
// the same config are byte-identical. A failure in one cell records a
// failed status and never disturbs completed cells. jobs > 1 parallelizes
// (dataset, model) units; results are identical to sequential runs because
// units share nothing mutable and artifacts are written by the coordinator.

#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "adbench/ad_measures.hpp"
#include "adbench/config.hpp"
#include "adbench/dataset.hpp"
#include "adbench/model_io.hpp"
#include "adbench/model_zoo.hpp"
#include "adbench/svg.hpp"
#include "adbench/synth.hpp"
#include "adbench/validation.hpp"

namespace adbench {

struct CellStatus {
    std::string dataset;
    std::string model;
    std::string measure;
    bool ok = false;
    std::string reason;
    double millis = 0.0;
    std::string artifact_dir;
};

struct RunManifest {
    std::string config_hash;
    std::vector<CellStatus> cells;

    bool all_ok() const {
        for (const auto& c : cells)
            if (!c.ok) return false;
        return true;
    }
    std::size_t failed_count() const {
        std::size_t n = 0;
        for (const auto& c : cells)
            if (!c.ok) ++n;
        return n;
    }
};

namespace bench_detail {

inline std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t d_idx, std::size_t m_idx) {
    return mix_seed(mix_seed(seed, d_idx + 1), m_idx + 1);
}

struct PreparedDataset {
    bool ok = false;
    std::string fail_reason;
    std::string name;
    Dataset train;
    Dataset test;
    // external ("train") contexts, fit once per dataset on demand
    std::shared_ptr<Gpr> gpr_ext;
    std::shared_ptr<const RandomForest> rf_ext;
    std::shared_ptr<const Bnn> bnn_ext;
};

// everything computed for one (dataset, model) unit, written out later
struct CellComputation {
    CellStatus status;
    AdScores scores;
    CoverageResult cov;
    AucResult auc;
    double rmse = 0.0, r2 = 0.0, e_avg = 0.0;
    std::string measure_dump;  // empty unless save_models
};

struct UnitResult {
    std::vector<CellComputation> cells;  // one per measure, config order
    std::string model_dump;              // empty unless save_models
    std::string model_fail;              // nonempty → model never fit
};

inline bool needs_external(const MeasureSpecConfig& s) {
    return s.context == "train" &&
           (s.kind == "gpr_var" || s.kind == "rf_sd" || s.kind == "bnn_sd");
}

inline PreparedDataset prepare_dataset(const RunConfig& cfg, std::size_t d_idx) {
    const auto& ds = cfg.datasets[d_idx];
    PreparedDataset out;
    out.name = ds.name;
    try {
        Dataset raw = load_csv(ds.path, ds.target, ds.name);
        if (ds.subsample) raw = subsample(raw, *ds.subsample, cfg.seed);
        if (raw.n_rows() < 10)
            throw DegenerateInputError("dataset has fewer than 10 rows");
        SplitDataset sp = split(raw, cfg.seed, cfg.train_fraction);
        out.train = preprocess(sp.train, cfg.preprocess, sp.train);
        out.test = preprocess(sp.test, cfg.preprocess, sp.train);

        for (const auto& ms : cfg.measures) {
            if (!needs_external(ms)) continue;
            const std::uint64_t ext_seed = mix_seed(cfg.seed, 0xE000 + d_idx);
            if (ms.kind == "gpr_var" && !out.gpr_ext) {
                auto g = std::make_shared<Gpr>();
                g->fit(out.train);
                out.gpr_ext = g;
            } else if (ms.kind == "rf_sd" && !out.rf_ext) {
                auto f = std::make_shared<RandomForest>(ForestParams{}, ext_seed);
                f->fit(out.train);
                out.rf_ext = f;
            } else if (ms.kind == "bnn_sd" && !out.bnn_ext) {
                auto b = std::make_shared<Bnn>(BnnParams{}, ext_seed);
                b->fit(out.train);
                out.bnn_ext = b;
            }
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.fail_reason = e.what();
    }
    return out;
}

inline UnitResult run_unit(const RunConfig& cfg, const PreparedDataset& prep, std::size_t d_idx,
                           std::size_t m_idx) {
    const auto& mspec = cfg.models[m_idx];
    UnitResult unit;
    unit.cells.resize(cfg.measures.size());
    for (std::size_t s_idx = 0; s_idx < cfg.measures.size(); ++s_idx) {
        auto& st = unit.cells[s_idx].status;
        st.dataset = prep.name;
        st.model = mspec.kind;
        st.measure = cfg.measures[s_idx].kind;
    }

    const std::uint64_t seed = cell_seed(cfg.seed, d_idx, m_idx);

    std::shared_ptr<Regressor> model;
    EvalReport eval;
    try {
        // a default-grid GPR fit is deterministic and seed-free, so the
        // dataset-level context model doubles as the cell model
        if (mspec.kind == "gpr" && mspec.hyperparameters.empty() && prep.gpr_ext)
            model = prep.gpr_ext;
        else
            model = make_regressor(mspec, seed);
        if (!model->is_fitted()) model->fit(prep.train);
        eval = evaluate(*model, prep.test);
    } catch (const std::exception& e) {
        unit.model_fail = e.what();
        for (auto& c : unit.cells) c.status.reason = std::string("model fit failed: ") + e.what();
        return unit;
    }
    const double e_avg = mean(eval.abs_errors);  // MAE, the AUC baseline
    const int window = cfg.window ? *cfg.window : default_window(prep.test.n_rows());

    // bagged ensembles of this model kind, shared by ensemble_sd and correll
    // and keyed by size in case measure specs disagree on n_members
    std::map<int, std::shared_ptr<const Ensemble>> bagged;
    auto get_bagged = [&](int n_members) {
        auto& slot = bagged[n_members];
        if (slot) return slot;
        auto e = std::make_shared<Ensemble>();
        Ensemble::Factory factory;
        if (mspec.kind == "gpr") {
            // members share the hyperparameters picked on the full train set
            const auto* g = dynamic_cast<const Gpr*>(model.get());
            const double gam = g->gamma(), alp = g->alpha();
            factory = [gam, alp](std::uint64_t) { return std::make_unique<Gpr>(gam, alp); };
        } else {
            factory = [&mspec](std::uint64_t s) { return make_regressor(mspec, s); };
        }
        e->fit(prep.train, n_members, mix_seed(seed, 0xBA66), factory);
        slot = e;
        return slot;
    };

    for (std::size_t s_idx = 0; s_idx < cfg.measures.size(); ++s_idx) {
        const auto& ms = cfg.measures[s_idx];
        auto& cell = unit.cells[s_idx];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const MeasureKind kind = measure_kind_from_string(ms.kind);
            MeasureOptions opt;
            opt.k_neighbors = ms.k;
            opt.leverage_intercept = ms.intercept;
            opt.n_samples = ms.n_samples;
            opt.seed = cfg.seed;

            MeasureContext ctx;
            switch (kind) {
                case MeasureKind::ensemble_sd:
                case MeasureKind::correll:
                    ctx.ensemble = get_bagged(ms.n_members);
                    break;
                case MeasureKind::gpr_var:
                    if (ms.context == "train") ctx.gpr = prep.gpr_ext;
                    else ctx.gpr = std::dynamic_pointer_cast<const Gpr>(model);
                    if (!ctx.gpr)
                        throw MissingModelContextError("gpr_var: model is " + mspec.kind +
                                                       ", not gpr");
                    break;
                case MeasureKind::rf_sd:
                    if (ms.context == "train") ctx.forest = prep.rf_ext;
                    else ctx.forest = std::dynamic_pointer_cast<const RandomForest>(model);
                    if (!ctx.forest)
                        throw MissingModelContextError("rf_sd: model is " + mspec.kind +
                                                       ", not random_forest");
                    break;
                case MeasureKind::bnn_sd:
                    if (ms.context == "train") ctx.bnn = prep.bnn_ext;
                    else ctx.bnn = std::dynamic_pointer_cast<const Bnn>(model);
                    if (!ctx.bnn)
                        throw MissingModelContextError("bnn_sd: model is " + mspec.kind +
                                                       ", not bnn");
                    break;
                default:
                    break;  // novelty measures need no context
            }

            const auto measure = fit_measure(kind, prep.train, opt, ctx);
            if (cfg.save_models) {
                std::ostringstream dump;
                ModelWriter::save_measure(*measure, dump);
                cell.measure_dump = dump.str();
            }
            cell.scores = measure->score_all(prep.test, eval);
            cell.scores.model_kind = mspec.kind;
            cell.cov = coverage(cell.scores, cfg.percentile);
            cell.auc = auc_deviation(cell.scores, window, e_avg);
            cell.rmse = eval.rmse;
            cell.r2 = eval.r2;
            cell.e_avg = e_avg;
            cell.status.ok = true;
        } catch (const std::exception& e) {
            cell.status.ok = false;
            cell.status.reason = e.what();
        }
        cell.status.millis =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    }

    // scaled AUC lives within this (dataset, model) cell group
    std::vector<AucResult*> group;
    for (auto& c : unit.cells)
        if (c.status.ok) group.push_back(&c.auc);
    if (!group.empty()) scale_auc(group);

    if (cfg.save_models) {
        std::ostringstream dump;
        ModelWriter::save(*model, dump);
        unit.model_dump = dump.str();
    }
    return unit;
}

inline void write_cell_artifacts(const RunConfig& cfg, CellComputation& cell) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(cfg.output_dir) / sanitize(cell.status.dataset) /
                         sanitize(cell.status.model) / sanitize(cell.status.measure);
    fs::create_directories(dir);
    cell.status.artifact_dir = dir.string();

    write_scores_csv(cell.scores, (dir / "scores.csv").string());
    if (!cell.measure_dump.empty()) {
        std::ofstream out(dir / "measure.dump", std::ios::binary);
        out << cell.measure_dump;
    }

    CsvTable cov;
    cov.header = {"pct_scale", "cum_err"};
    for (std::size_t i = 0; i < cell.cov.pct_scale.size(); ++i)
        cov.rows.push_back({format_double(cell.cov.pct_scale[i]), format_double(cell.cov.cum_err[i])});
    write_csv((dir / "coverage.csv").string(), cov);

    CsvTable auc;
    auc.header = {"pct_scale", "smoothed_err"};
    for (std::size_t i = 0; i < cell.auc.pct_scale.size(); ++i)
        auc.rows.push_back(
            {format_double(cell.auc.pct_scale[i]), format_double(cell.auc.smoothed[i])});
    write_csv((dir / "auc.csv").string(), auc);

    CsvTable met;
    met.header = {"threshold", "percentile", "coverage_pct", "raw_auc", "scaled_auc",
                  "e_avg",     "rmse",       "r2",           "window"};
    met.rows.push_back({format_double(cell.cov.threshold), format_double(cell.cov.percentile),
                        format_double(cell.cov.coverage_pct), format_double(cell.auc.raw_auc),
                        format_double(cell.auc.scaled_auc), format_double(cell.e_avg),
                        format_double(cell.rmse), format_double(cell.r2),
                        std::to_string(cell.auc.window)});
    write_csv((dir / "metrics.csv").string(), met);

    SvgPlot cp;
    cp.title = cell.status.dataset + " / " + cell.status.model + " / " + cell.status.measure;
    cp.x_label = "AD value percentage scale";
    cp.y_label = "cumulative mean absolute error";
    cp.x = cell.cov.pct_scale;
    cp.y = cell.cov.cum_err;
    cp.hline = cell.cov.threshold;
    cp.hline_label = "threshold";
    write_svg(cp, (dir / "coverage.svg").string());

    SvgPlot ap;
    ap.title = cp.title;
    ap.x_label = "AD value percentage scale";
    ap.y_label = "smoothed absolute error";
    ap.x = cell.auc.pct_scale;
    ap.y = cell.auc.smoothed;
    ap.hline = cell.e_avg;
    ap.hline_label = "avg error";
    write_svg(ap, (dir / "auc.svg").string());
}

}  // namespace bench_detail

inline RunManifest run_bench(const RunConfig& cfg, int jobs = 1) {
    namespace fs = std::filesystem;
    using namespace bench_detail;

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(fs::path(cfg.output_dir) / "config.json", std::ios::binary);
        out << serialize_config(cfg) << '\n';
    }

    // phase 1: datasets (load/split/preprocess + external measure contexts)
    std::vector<PreparedDataset> prepared(cfg.datasets.size());
    {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= prepared.size()) return;
                prepared[i] = prepare_dataset(cfg, i);
            }
        };
        if (jobs <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }
    }

    // phase 2: (dataset, model) units
    const std::size_t n_units = cfg.datasets.size() * cfg.models.size();
    std::vector<UnitResult> units(n_units);
    {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (;;) {
                const std::size_t u = next.fetch_add(1);
                if (u >= n_units) return;
                const std::size_t d_idx = u / cfg.models.size();
                const std::size_t m_idx = u % cfg.models.size();
                const auto& prep = prepared[d_idx];
                if (!prep.ok) {
                    auto& unit = units[u];
                    unit.cells.resize(cfg.measures.size());
                    for (std::size_t s = 0; s < cfg.measures.size(); ++s) {
                        auto& st = unit.cells[s].status;
                        st.dataset = prep.name;
                        st.model = cfg.models[m_idx].kind;
                        st.measure = cfg.measures[s].kind;
                        st.reason = "dataset preparation failed: " + prep.fail_reason;
                    }
                    continue;
                }
                units[u] = run_unit(cfg, prep, d_idx, m_idx);
            }
        };
        if (jobs <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }
    }

    // phase 3: single-writer artifact emission + aggregation
    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    std::vector<CellOutcome> outcomes;
    for (std::size_t u = 0; u < n_units; ++u) {
        auto& unit = units[u];
        const std::size_t d_idx = u / cfg.models.size();
        const std::size_t m_idx = u % cfg.models.size();
        if (cfg.save_models && !unit.model_dump.empty()) {
            const fs::path mdir = fs::path(cfg.output_dir) / sanitize(prepared[d_idx].name) /
                                  sanitize(cfg.models[m_idx].kind);
            fs::create_directories(mdir);
            std::ofstream out(mdir / "model.dump", std::ios::binary);
            out << unit.model_dump;
        }
        for (auto& cell : unit.cells) {
            if (cell.status.ok) {
                try {
                    write_cell_artifacts(cfg, cell);
                } catch (const std::exception& e) {
                    cell.status.ok = false;
                    cell.status.reason = std::string("artifact write failed: ") + e.what();
                }
            }
            CellOutcome oc;
            oc.dataset = cell.status.dataset;
            oc.model = cell.status.model;
            oc.measure = cell.status.measure;
            oc.ok = cell.status.ok;
            oc.fail_reason = cell.status.reason;
            if (cell.status.ok) {
                oc.coverage_pct = cell.cov.coverage_pct;
                oc.raw_auc = cell.auc.raw_auc;
                oc.scaled_auc = cell.auc.scaled_auc;
            }
            outcomes.push_back(oc);
            manifest.cells.push_back(cell.status);
        }
    }

    const auto [cov_table, auc_table] = aggregate(outcomes);
    const fs::path tdir = fs::path(cfg.output_dir) / "tables";
    fs::create_directories(tdir);
    write_csv((tdir / "coverage_table.csv").string(), table_to_csv(cov_table));
    write_csv((tdir / "auc_table.csv").string(), table_to_csv(auc_table));
    {
        std::ofstream out(tdir / "coverage_table.txt", std::ios::binary);
        out << table_to_text(cov_table);
    }
    {
        std::ofstream out(tdir / "auc_table.txt", std::ios::binary);
        out << table_to_text(auc_table);
    }

    {
        std::ofstream out(fs::path(cfg.output_dir) / "run_manifest.txt", std::ios::binary);
        out << "config_hash " << manifest.config_hash << '\n';
        for (const auto& c : manifest.cells) {
            out << c.dataset << '/' << c.model << '/' << c.measure << ' '
                << (c.ok ? "ok" : "failed(" + c.reason + ")") << " " << c.millis << "ms";
            if (!c.artifact_dir.empty()) out << ' ' << c.artifact_dir;
            out << '\n';
        }
    }
    return manifest;
}

// `tables` subcommand: re-aggregate from the scores.csv files of a previous
// run, recomputing coverage and AUC from the interchange records alone.
inline std::pair<BenchmarkTable, BenchmarkTable> reaggregate_tables(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const RunConfig cfg = load_config((fs::path(run_dir) / "config.json").string());

    std::vector<CellOutcome> outcomes;
    // group raw AUCs per (dataset, model) for min-max scaling
    std::map<std::string, std::vector<AucResult>> groups;
    std::map<std::string, std::vector<std::size_t>> group_rows;

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(run_dir))
        if (entry.is_regular_file() && entry.path().filename() == "scores.csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& f : files) {
        const AdScores scores = read_scores_csv(f.string());
        CellOutcome oc;
        oc.dataset = scores.dataset_name;
        oc.model = scores.model_kind;
        oc.measure = scores.measure_kind;
        try {
            const auto cov = coverage(scores, cfg.percentile);
            const int window =
                cfg.window ? *cfg.window : default_window(scores.values.size());
            const double e_avg = mean(scores.abs_errors);
            const auto auc = auc_deviation(scores, window, e_avg);
            oc.ok = true;
            oc.coverage_pct = cov.coverage_pct;
            oc.raw_auc = auc.raw_auc;
            const std::string key = oc.dataset + "\x1f" + oc.model;
            groups[key].push_back(auc);
            group_rows[key].push_back(outcomes.size());
        } catch (const std::exception& e) {
            oc.ok = false;
            oc.fail_reason = e.what();
        }
        outcomes.push_back(oc);
    }
    for (auto& [key, group] : groups) {
        std::vector<AucResult*> ptrs;
        for (auto& a : group) ptrs.push_back(&a);
        scale_auc(ptrs);
        for (std::size_t i = 0; i < group.size(); ++i)
            outcomes[group_rows[key][i]].scaled_auc = group[i].scaled_auc;
    }
    return aggregate(outcomes);
}

}  // namespace adbench
