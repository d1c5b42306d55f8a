#include "opmode/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opmode/config.hpp"
#include "opmode/eval.hpp"
#include "opmode/features.hpp"
#include "opmode/geolife.hpp"
#include "opmode/report.hpp"
#include "opmode/transition_graph.hpp"
#include "opmode/util.hpp"

namespace opmode {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// Distinguishes bad invocations (exit 2) from failures in the data (exit 1).
class UsageError : public Error {
public:
    using Error::Error;
};

struct CommonOptions {
    std::string config_path;
    std::string data_root;
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string distance;

    CLI::Option* config_opt = nullptr;
    CLI::Option* data_root_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* distance_opt = nullptr;

    void attach(CLI::App* cmd) {
        config_opt = cmd->add_option("--config", config_path, "run config JSON")
                         ->envname("OPMODE_CONFIG");
        data_root_opt = cmd->add_option("--data-root", data_root, "GeoLife dataset root")
                            ->envname("OPMODE_DATA_ROOT");
        out_opt = cmd->add_option("--out", out_dir, "output directory")
                      ->envname("OPMODE_OUT");
        seed_opt = cmd->add_option("--seed", seed, "random seed")->envname("OPMODE_SEED");
        jobs_opt = cmd->add_option("--jobs", jobs, "worker threads, 0 = all cores")
                       ->envname("OPMODE_JOBS");
        distance_opt =
            cmd->add_option("--distance", distance, "distance signal: euclidean | haversine")
                ->envname("OPMODE_DISTANCE");
    }

    // Flags override config values which override defaults.
    RunConfig resolve() const {
        RunConfig config;
        if (config_opt->count() > 0) {
            config = RunConfig::load(config_path);
        }
        if (data_root_opt->count() > 0) config.data_root = data_root;
        if (out_opt->count() > 0) config.out_dir = out_dir;
        if (seed_opt->count() > 0) config.seed = seed;
        if (jobs_opt->count() > 0) config.jobs = jobs;
        if (distance_opt->count() > 0) {
            const auto metric = distance_metric_from_string(distance);
            if (!metric) {
                throw UsageError("unknown distance metric \"" + distance + "\"");
            }
            config.distance = *metric;
        }
        return config;
    }
};

std::filesystem::path store_path(const RunConfig& config) {
    return config.out_dir / "trajectories.ndjson";
}

std::filesystem::path matrix_path(const RunConfig& config, int dimension, int delay) {
    return config.out_dir / ("features_D" + std::to_string(dimension) + "_tau" +
                             std::to_string(delay) + ".csv");
}

std::filesystem::path skips_path(const RunConfig& config, int dimension, int delay) {
    return config.out_dir / ("skips_D" + std::to_string(dimension) + "_tau" +
                             std::to_string(delay) + ".json");
}

std::vector<std::pair<int, int>> grid_pairs(const RunConfig& config) {
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> pairs;
    for (int dimension : config.dimensions) {
        for (int delay : config.delays) {
            if (seen.insert({dimension, delay}).second) {
                pairs.emplace_back(dimension, delay);
            }
        }
    }
    return pairs;
}

FeatureSpec full_spec(int dimension, int delay) {
    return FeatureSpec(EmbeddingParams(dimension, delay),
                       {Quantifier::entropy, Quantifier::complexity,
                        Quantifier::self_transition},
                       {Signal::latitude, Signal::longitude, Signal::distance});
}

// --- ingest -----------------------------------------------------------

int cmd_ingest(const RunConfig& config) {
    if (config.data_root.empty() || !std::filesystem::is_directory(config.data_root)) {
        throw UsageError("data root \"" + config.data_root.string() +
                         "\" is not a directory");
    }
    std::filesystem::create_directories(config.out_dir);

    const IngestResult result = ingest_directory(config.data_root, config.jobs);
    const IngestReport& report = result.report;

    if (report.users_processed == 0) {
        throw Error("no labeled users under " + config.data_root.string());
    }
    if (report.users_failed == report.users_processed) {
        throw Error("every labeled user failed to parse");
    }

    const auto store = store_path(config);
    auto tmp = store;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        write_trajectory_store(result.trajectories, out);
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, store);
    atomic_write_file(config.out_dir / "ingest_report.json", ingest_report_json(report));

    std::cout << "ingested " << report.total_trajectories << " trajectories from "
              << report.users_processed << " labeled users\n";
    for (Mode mode : kAllModes) {
        const auto it = report.trajectories_per_mode.find(mode);
        std::cout << "  " << to_string(mode) << ": "
                  << (it == report.trajectories_per_mode.end() ? 0 : it->second) << '\n';
    }
    std::size_t dropped_short = 0;
    for (const auto& [mode, count] : report.stats.dropped_short) dropped_short += count;
    std::cout << "dropped: " << dropped_short << " short, " << report.stats.dropped_other_mode
              << " other-mode; unlabeled points: " << report.stats.unlabeled_points << '\n';
    if (!report.parse_failures.empty()) {
        std::cout << "parse failures: " << report.parse_failures.size()
                  << " (see ingest_report.json)\n";
    }
    std::cout << "store: " << store.string() << '\n';
    return kExitOk;
}

// --- extract ----------------------------------------------------------

int cmd_extract(const RunConfig& config, const std::string& edge_dir) {
    const auto store = store_path(config);
    if (!std::filesystem::exists(store)) {
        throw UsageError("trajectory store not found at " + store.string() +
                         "; run ingest first");
    }
    std::ifstream in(store, std::ios::binary);
    const std::vector<Trajectory> trajectories = read_trajectory_store(in);
    std::filesystem::create_directories(config.out_dir);

    for (const auto& [dimension, delay] : grid_pairs(config)) {
        const FeatureSpec spec = full_spec(dimension, delay);
        std::string csv;
        SkipReport skips;
        try {
            BuildResult built = build_dataset(trajectories, spec, config.distance, config.jobs);
            std::ostringstream buffer;
            write_feature_csv(built.dataset, buffer);
            csv = std::move(buffer).str();
            skips = built.skips;
            std::cout << "features_D" << dimension << "_tau" << delay << ".csv: "
                      << built.dataset.vectors.size() << " rows, " << skips.total()
                      << " skipped\n";
        } catch (const EmptyDatasetError&) {
            csv = "traj_id,mode";
            for (const std::string& column : spec.column_names()) csv += "," + column;
            csv += "\n";
            for (const Trajectory& t : trajectories) ++skips.too_short[t.mode];
            std::cerr << "warning: D=" << dimension << " tau=" << delay
                      << ": every trajectory skipped\n";
        }
        atomic_write_file(matrix_path(config, dimension, delay), csv);
        atomic_write_file(skips_path(config, dimension, delay),
                          skip_report_json(skips, spec));

        if (!edge_dir.empty()) {
            std::filesystem::create_directories(edge_dir);
            const std::size_t need = min_signal_length(spec.params());
            for (const Trajectory& trajectory : trajectories) {
                const SignalBundle bundle = derive_signals(trajectory, config.distance);
                for (Signal signal : kAllSignals) {
                    const auto& series = signal == Signal::latitude    ? bundle.latitude
                                         : signal == Signal::longitude ? bundle.longitude
                                                                       : bundle.distance;
                    if (series.size() < need) continue;
                    const auto graph =
                        build_graph(extract_sequence(TimeSeries(series), spec.params()));
                    std::ostringstream buffer;
                    write_edge_list_csv(graph, buffer);
                    atomic_write_file(std::filesystem::path(edge_dir) /
                                          ("edges_" + trajectory.id + "_" +
                                           to_string(signal) + "_D" +
                                           std::to_string(dimension) + "_tau" +
                                           std::to_string(delay) + ".csv"),
                                      std::move(buffer).str());
                }
            }
        }
    }
    return kExitOk;
}

// --- evaluate ---------------------------------------------------------

int cmd_evaluate(const RunConfig& config) {
    std::map<std::pair<int, int>, FeatureMatrix> matrices;
    for (const auto& [dimension, delay] : grid_pairs(config)) {
        const auto path = matrix_path(config, dimension, delay);
        if (!std::filesystem::exists(path)) {
            throw UsageError("feature matrix not found at " + path.string() +
                             "; run extract first");
        }
        std::ifstream in(path, std::ios::binary);
        matrices.emplace(std::make_pair(dimension, delay), read_feature_csv(in));
    }

    std::filesystem::create_directories(config.out_dir);
    std::ofstream progress(config.out_dir / "results_progress.jsonl",
                           std::ios::binary | std::ios::trunc);

    const SweepGrid grid = config.grid();
    const std::vector<SweepResult> results =
        sweep(grid, matrices, config.jobs, [&](const SweepResult& result) {
            nlohmann::json line;
            line["D"] = result.report.dimension;
            line["tau"] = result.report.delay;
            line["features"] = result.report.quantifier_label;
            line["signals"] = result.report.signal_label;
            line["classifier"] = to_string(result.report.classifier);
            line["n"] = result.dataset_size;
            line["accuracy"] = result.report.accuracy.mean;
            progress << line.dump() << std::endl;
        });

    std::ostringstream csv;
    write_results_csv(results, csv);
    atomic_write_file(config.out_dir / "results.csv", std::move(csv).str());
    atomic_write_file(config.out_dir / "results.json", results_json(results));

    std::vector<const SweepResult*> ranked;
    for (const SweepResult& result : results) ranked.push_back(&result);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const SweepResult* a, const SweepResult* b) {
                         return a->report.accuracy.mean > b->report.accuracy.mean;
                     });
    std::cout << "evaluated " << results.size() << " grid cells; best:\n";
    char buf[64];
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) {
        const MetricReport& report = ranked[i]->report;
        std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", report.accuracy.mean,
                      report.accuracy.half_width);
        std::cout << "  D=" << report.dimension << " tau=" << report.delay << " "
                  << report.quantifier_label << " " << report.signal_label << " "
                  << to_string(report.classifier) << " [" << report.classes.size()
                  << " classes] accuracy " << buf << '\n';
    }
    std::cout << "results: " << (config.out_dir / "results.csv").string() << '\n';
    return kExitOk;
}

// --- report -----------------------------------------------------------

int cmd_report(const RunConfig& config) {
    const auto results_path = config.out_dir / "results.csv";
    if (!std::filesystem::exists(results_path)) {
        throw UsageError("results not found at " + results_path.string() +
                         "; run evaluate first");
    }
    std::ifstream in(results_path, std::ios::binary);
    const std::vector<ResultRow> rows = read_results_csv(in);

    atomic_write_file(config.out_dir / "accuracy_by_D.csv", accuracy_by_d_csv(rows));
    atomic_write_file(config.out_dir / "accuracy_by_tau.csv", accuracy_by_tau_csv(rows));
    std::cout << "wrote accuracy_by_D.csv, accuracy_by_tau.csv\n";

    for (const auto& entry : std::filesystem::directory_iterator(config.out_dir)) {
        int dimension = 0, delay = 0;
        const std::string name = entry.path().filename().string();
        if (std::sscanf(name.c_str(), "features_D%d_tau%d.csv", &dimension, &delay) != 2 ||
            name != "features_D" + std::to_string(dimension) + "_tau" +
                        std::to_string(delay) + ".csv") {
            continue;
        }
        std::ifstream matrix_in(entry.path(), std::ios::binary);
        const FeatureMatrix matrix = read_feature_csv(matrix_in);
        const auto out_path = config.out_dir / ("ce_plane_D" + std::to_string(dimension) +
                                                "_tau" + std::to_string(delay) + ".csv");
        atomic_write_file(out_path, ce_plane_csv(matrix));
        std::cout << "wrote " << out_path.filename().string() << '\n';
    }
    return kExitOk;
}

template <typename F>
int run_command(F&& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"ordinal-pattern transportation mode pipeline"};
    app.require_subcommand(1);

    CommonOptions ingest_opts, extract_opts, evaluate_opts, report_opts;
    std::string edge_dir;

    CLI::App* ingest = app.add_subcommand("ingest", "parse GeoLife data into a trajectory store");
    ingest_opts.attach(ingest);
    CLI::App* extract = app.add_subcommand("extract", "compute feature matrices per (D, tau)");
    extract_opts.attach(extract);
    extract->add_option("--edge-lists", edge_dir,
                        "also write per-trajectory transition edge lists to this directory");
    CLI::App* evaluate = app.add_subcommand("evaluate", "cross-validate classifiers over the grid");
    evaluate_opts.attach(evaluate);
    CLI::App* report = app.add_subcommand("report", "emit plot-ready CSVs from results");
    report_opts.attach(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (ingest->parsed()) {
        return run_command([&] { return cmd_ingest(ingest_opts.resolve()); });
    }
    if (extract->parsed()) {
        return run_command([&] { return cmd_extract(extract_opts.resolve(), edge_dir); });
    }
    if (evaluate->parsed()) {
        return run_command([&] { return cmd_evaluate(evaluate_opts.resolve()); });
    }
    return run_command([&] { return cmd_report(report_opts.resolve()); });
}

}  // namespace opmode
