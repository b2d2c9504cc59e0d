// adbench command line: bench / score / synth / tables.
//
// Exit codes: 0 = success (bench: all cells ok), 2 = bench finished with
// failed cells, 1 = config or I/O abort. Seed precedence for bench:
// --seed flag > AD_BENCH_SEED env > config file.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adbench/adbench.hpp"

namespace fs = std::filesystem;
using namespace adbench;

namespace {

int cmd_bench(const std::string& config_path, std::optional<std::uint64_t> seed_flag, int jobs,
              const std::string& output_override) {
    RunConfig cfg = load_config(config_path);
    if (const char* env = std::getenv("AD_BENCH_SEED")) cfg.seed = std::stoull(env);
    if (seed_flag) cfg.seed = *seed_flag;
    if (!output_override.empty()) cfg.output_dir = output_override;

    const RunManifest manifest = run_bench(cfg, jobs);
    std::cout << "config hash " << manifest.config_hash << "\n";
    for (const auto& c : manifest.cells)
        std::cout << (c.ok ? "  ok     " : "  failed ") << c.dataset << '/' << c.model << '/'
                  << c.measure << (c.ok ? "" : "  (" + c.reason + ")") << "\n";
    std::cout << manifest.cells.size() - manifest.failed_count() << "/" << manifest.cells.size()
              << " cells ok; artifacts in " << cfg.output_dir << "\n";
    return manifest.all_ok() ? 0 : 2;
}

int cmd_score(const std::string& model_path, const std::string& measure_path,
              const std::string& input_path, const std::string& out_path) {
    const auto model = ModelReader::load_file(model_path);
    const auto measure = ModelReader::load_measure_file(measure_path);

    // input: feature columns only, positional order matching the fit schema
    const CsvTable in = read_csv(input_path);
    if (in.header.size() != model->n_features())
        throw SchemaMismatchError("input has " + std::to_string(in.header.size()) +
                                  " columns, model expects " +
                                  std::to_string(model->n_features()));
    Matrix x(in.rows.size(), in.header.size());
    for (std::size_t r = 0; r < in.rows.size(); ++r)
        for (std::size_t c = 0; c < in.header.size(); ++c) {
            double v = 0.0;
            if (!parse_double(in.rows[r][c], v))
                throw InvalidInputError("non-numeric cell at row " + std::to_string(r));
            x(r, c) = v;
        }

    const auto pred = model->predict(x);
    CsvTable out;
    out.header = {"point_id", "prediction", "ad_value"};
    for (std::size_t r = 0; r < x.rows; ++r)
        out.rows.push_back({std::to_string(r), format_double(pred[r]),
                            format_double(measure->score_point(x.row(r), r))});
    if (out_path.empty() || out_path == "-") {
        std::cout << "point_id,prediction,ad_value\n";
        for (const auto& row : out.rows)
            std::cout << row[0] << ',' << row[1] << ',' << row[2] << "\n";
    } else {
        write_csv(out_path, out);
    }
    return 0;
}

int cmd_synth(const std::string& kind_str, std::size_t n, std::size_t n_test, double noise,
              bool extrapolate, std::uint64_t seed, const std::string& out_prefix) {
    const SynthKind kind = synth_kind_from_string(kind_str);
    if (n_test == 0) n_test = n;
    const Dataset train = make_synth(kind, n, noise, seed);
    const Dataset test = make_synth_test(kind, n_test, noise, mix_seed(seed, 0x7E57), extrapolate);
    write_csv(train, out_prefix + "_train.csv");
    write_csv(test, out_prefix + "_test.csv");
    std::cout << "wrote " << out_prefix << "_train.csv (" << train.n_rows() << " rows) and "
              << out_prefix << "_test.csv (" << test.n_rows() << " rows)\n";
    return 0;
}

int cmd_tables(const std::string& run_dir) {
    const auto [cov, auc] = reaggregate_tables(run_dir);
    const fs::path tdir = fs::path(run_dir) / "tables";
    fs::create_directories(tdir);
    write_csv((tdir / "coverage_table.csv").string(), table_to_csv(cov));
    write_csv((tdir / "auc_table.csv").string(), table_to_csv(auc));
    std::cout << table_to_text(cov) << "\n" << table_to_text(auc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"applicability-domain measure benchmark"};
    app.require_subcommand(1);

    auto* bench = app.add_subcommand("bench", "run a benchmark from a JSON config");
    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    int jobs = 1;
    std::string output_override;
    bench->add_option("-c,--config", config_path, "config JSON path")->required();
    bench->add_option("--seed", seed_flag, "override the config seed");
    bench->add_option("-j,--jobs", jobs, "parallel (dataset, model) units")->default_val(1);
    bench->add_option("-o,--output", output_override, "override config output_dir");

    auto* score = app.add_subcommand("score", "score new inputs with saved model+measure dumps");
    std::string model_path, measure_path, input_path, out_path;
    score->add_option("--model", model_path, "model dump path")->required();
    score->add_option("--measure", measure_path, "measure dump path")->required();
    score->add_option("--input", input_path, "feature CSV (positional schema)")->required();
    score->add_option("-o,--out", out_path, "output CSV ('-' = stdout)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic 1D dataset pair");
    std::string kind_str = "sine";
    std::size_t n = 200, n_test = 0;
    double noise = 0.05;
    bool extrapolate = false;
    std::uint64_t synth_seed = 1;
    std::string out_prefix = "synth";
    synth->add_option("--kind", kind_str, "sine | linear | step")->default_val("sine");
    synth->add_option("--n", n, "training rows")->default_val(200);
    synth->add_option("--n-test", n_test, "test rows (default = n)");
    synth->add_option("--noise", noise, "noise sd")->default_val(0.05);
    synth->add_flag("--extrapolate", extrapolate, "second half of test in x ∈ [2,3]");
    synth->add_option("--seed", synth_seed, "seed")->default_val(1);
    synth->add_option("-o,--out", out_prefix, "output prefix")->default_val("synth");

    auto* tables = app.add_subcommand("tables", "re-aggregate tables from scores.csv files");
    std::string run_dir;
    tables->add_option("--dir", run_dir, "benchmark output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) return cmd_bench(config_path, seed_flag, jobs, output_override);
        if (score->parsed()) return cmd_score(model_path, measure_path, input_path, out_path);
        if (synth->parsed())
            return cmd_synth(kind_str, n, n_test, noise, extrapolate, synth_seed, out_prefix);
        if (tables->parsed()) return cmd_tables(run_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
