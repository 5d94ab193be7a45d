#include "vfence/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <unistd.h>

#include "vfence/evalharness.hpp"
#include "vfence/io.hpp"

namespace vfence::cli {

namespace fs = std::filesystem;

namespace {

/// Collects output files under temporary names and renames them into place
/// only on commit(); anything uncommitted is removed on destruction.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    ~OutputSet()
    {
        std::error_code ec;
        for (const auto& f : files_) {
            fs::remove(f.temp, ec);
        }
    }

    std::ofstream open(const std::string& name)
    {
        fs::create_directories(dir_);
        const auto temp = dir_ / ("." + name + ".tmp-" + std::to_string(::getpid()));
        files_.push_back({temp, dir_ / name});
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + temp.string());
        }
        return out;
    }

    void commit()
    {
        for (const auto& f : files_) {
            fs::rename(f.temp, f.final);
        }
        files_.clear();
    }

private:
    struct Pending {
        fs::path temp;
        fs::path final;
    };
    fs::path dir_;
    std::vector<Pending> files_;
};

void close_checked(std::ofstream& out, const std::string& name)
{
    out.close();
    if (!out) {
        throw std::runtime_error("failed writing " + name);
    }
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides)
{
    Json doc = read_json_file(path);
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return run_config_from_json(doc, path, fs::path(path).parent_path());
}

Json metrics_document(const MetricsReport& metrics, std::uint64_t seed)
{
    Json doc = to_json(metrics);
    doc["seed"] = seed;
    doc["version"] = kVersion;
    return doc;
}

int simulate(const std::string& scenario_path, const std::string& config_path, const std::string& out_dir,
             std::optional<std::uint64_t> seed_override, const std::vector<std::string>& overrides)
{
    const ScenarioSpec scenario = scenario_from_json(read_json_file(scenario_path), scenario_path);
    const RunConfig config = load_run_config(config_path, overrides);
    const std::uint64_t seed = seed_override.value_or(scenario.seed);

    const ScenarioRun run = run_scenario(scenario, config.detector, config.pool, config.visual, seed);
    const MatchResult match = evaluate(run.detections, scenario, config.detector);
    const MetricsReport metrics = compute_metrics(match, config.histogram_edges_ft);

    OutputSet outputs(out_dir);
    {
        auto f = outputs.open("trace.csv");
        write_trace_csv(f, run.trace, seed);
        close_checked(f, "trace.csv");
    }
    {
        auto f = outputs.open("detections.csv");
        write_detections_csv(f, run.detections, seed);
        close_checked(f, "detections.csv");
    }
    {
        auto f = outputs.open("deterrents.csv");
        write_deterrents_csv(f, run.deterrents, seed);
        close_checked(f, "deterrents.csv");
    }
    {
        auto f = outputs.open("metrics.json");
        f << metrics_document(metrics, seed).dump(2) << '\n';
        close_checked(f, "metrics.json");
    }
    outputs.commit();
    return kExitOk;
}

int replay(const std::string& trace_path, const std::string& config_path, const std::string& out_dir,
           const std::vector<std::string>& overrides)
{
    std::ifstream in(trace_path);
    if (!in) {
        throw ParseError(trace_path, "cannot open file");
    }
    const LoadedTrace loaded = read_trace_csv(in, trace_path);
    const RunConfig config = load_run_config(config_path, overrides);
    const std::uint64_t seed = loaded.seed.value_or(0);

    const auto detections = run_trace(loaded.trace, config.detector);
    const auto deterrents = schedule_deterrents(detections, config.pool, config.visual, seed);

    OutputSet outputs(out_dir);
    {
        auto f = outputs.open("detections.csv");
        write_detections_csv(f, detections, seed);
        close_checked(f, "detections.csv");
    }
    {
        auto f = outputs.open("deterrents.csv");
        write_deterrents_csv(f, deterrents, seed);
        close_checked(f, "deterrents.csv");
    }
    outputs.commit();
    return kExitOk;
}

int tune(const std::string& suite_path, const std::string& grid_path, const std::string& out_dir,
         const std::optional<std::string>& config_path, unsigned threads)
{
    const auto suite = suite_from_json(read_json_file(suite_path), suite_path, fs::path(suite_path).parent_path());
    const ParamGrid grid = param_grid_from_json(read_json_file(grid_path), grid_path);
    RunConfig base;
    if (config_path) {
        base = load_run_config(*config_path, {});
    }

    std::vector<ScenarioSpec> specs;
    for (const auto& s : suite) {
        specs.push_back(s.spec);
    }
    const auto ranking = tune_parameters(grid, specs, base.detector, base.histogram_edges_ft, threads);
    const std::uint64_t seed = specs.front().seed;

    RunConfig best = base;
    best.detector = ranking.front().config;

    OutputSet outputs(out_dir);
    {
        auto f = outputs.open("ranking.csv");
        write_ranking_csv(f, ranking, seed);
        close_checked(f, "ranking.csv");
    }
    {
        auto f = outputs.open("best_config.json");
        f << to_json(best).dump(2) << '\n';
        close_checked(f, "best_config.json");
    }
    outputs.commit();
    return kExitOk;
}

int report(const std::vector<std::string>& paths, const std::optional<std::string>& out_dir, std::ostream& out)
{
    std::optional<MetricsReport> merged;
    std::uint64_t seed = 0;
    for (const auto& path : paths) {
        Json doc = read_json_file(path);
        if (doc.is_object()) {
            if (!merged && doc.contains("seed") && doc["seed"].is_number_unsigned()) {
                seed = doc["seed"].get<std::uint64_t>();
            }
            doc.erase("seed");
            doc.erase("version");
        }
        const MetricsReport m = metrics_from_json(doc, path);
        if (!merged) {
            merged = m;
        } else if (merged->histogram_edges_ft != m.histogram_edges_ft) {
            throw ParseError(path, "histogram.bin_edges_ft: bin edges differ from " + paths.front());
        } else {
            merged = merge(*merged, m);
        }
    }

    if (out_dir) {
        OutputSet outputs(*out_dir);
        {
            auto f = outputs.open("metrics_scalars.csv");
            write_metrics_scalars_csv(f, *merged, seed);
            close_checked(f, "metrics_scalars.csv");
        }
        {
            auto f = outputs.open("metrics_histogram.csv");
            write_metrics_histogram_csv(f, *merged, seed);
            close_checked(f, "metrics_histogram.csv");
        }
        outputs.commit();
    } else {
        write_metrics_scalars_csv(out, *merged, seed);
        out << '\n';
        write_metrics_histogram_csv(out, *merged, seed);
    }
    return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Headlight-triggered animal deterrent: simulation, replay, tuning and reporting", "vfence"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::string scenario_path;
    std::string config_path;
    std::string out_dir;
    std::string trace_path;
    std::string suite_path;
    std::string grid_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::vector<std::string> metrics_paths;
    std::optional<std::string> tune_config;
    std::optional<std::string> report_out;
    unsigned threads = 0;

    auto* sim = app.add_subcommand("simulate", "Synthesize a scenario trace and run the full pipeline");
    sim->add_option("--scenario", scenario_path, "Scenario document")->required();
    sim->add_option("--config", config_path, "Config document")->required();
    sim->add_option("--out", out_dir, "Output directory")->required();
    sim->add_option("--seed", seed, "Override the scenario seed");
    sim->add_option("--set", overrides, "Config override, dotted.key=value");

    auto* rep = app.add_subcommand("replay", "Run the detector over a recorded trace CSV");
    rep->add_option("--trace", trace_path, "Trace CSV")->required();
    rep->add_option("--config", config_path, "Config document")->required();
    rep->add_option("--out", out_dir, "Output directory")->required();
    rep->add_option("--set", overrides, "Config override, dotted.key=value");

    auto* tun = app.add_subcommand("tune", "Grid-search detector parameters over a scenario suite");
    tun->add_option("--suite", suite_path, "Suite document")->required();
    tun->add_option("--grid", grid_path, "Parameter grid document")->required();
    tun->add_option("--out", out_dir, "Output directory")->required();
    tun->add_option("--config", tune_config, "Base config document");
    tun->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* rpt = app.add_subcommand("report", "Merge metrics documents into plot-ready tables");
    rpt->add_option("metrics", metrics_paths, "Metrics documents")->required();
    rpt->add_option("--out", report_out, "Output directory (default: stdout)");

    std::vector<std::string> argv_store(args.begin(), args.end());
    std::reverse(argv_store.begin(), argv_store.end());
    try {
        app.parse(argv_store);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    try {
        if (sim->parsed()) {
            return simulate(scenario_path, config_path, out_dir, seed, overrides);
        }
        if (rep->parsed()) {
            return replay(trace_path, config_path, out_dir, overrides);
        }
        if (tun->parsed()) {
            return tune(suite_path, grid_path, out_dir, tune_config, threads);
        }
        return report(metrics_paths, report_out, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace vfence::cli
