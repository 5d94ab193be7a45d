#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vfence/detector.hpp"
#include "vfence/deterrent.hpp"
#include "vfence/evalharness.hpp"
#include "vfence/photometry.hpp"
#include "vfence/suite.hpp"

namespace vfence {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kMetricsSchema = "vfence-metrics/1";

using Json = nlohmann::ordered_json;

/// Detector, deterrent and reporting settings read from a config document.
struct RunConfig {
    DetectorConfig detector;
    SoundPool pool = default_sound_pool();
    VisualConfig visual;
    std::vector<double> histogram_edges_ft = default_histogram_edges();
};

// Shortest round-trip decimal rendering without exponent notation.
std::string format_decimal(double value);

Json read_json_file(const std::filesystem::path& path);

/// `where` names the source (usually the file path) in error messages.
ScenarioSpec scenario_from_json(const Json& doc, const std::string& where);
Json to_json(const ScenarioSpec& scenario);

DetectorConfig detector_config_from_json(const Json& doc, const std::string& where);
Json to_json(const DetectorConfig& config);

/// Manifest: {"sounds": [{"id", "file", "duration_s"}]}.
SoundPool sound_pool_from_json(const Json& doc, const std::string& where);
Json to_json(const SoundPool& pool);

/// {"detector": {...}, "deterrent": {"no_repeat", "sounds" | "manifest",
/// "visual": {...}}, "histogram_edges_ft": [...]}; every section optional.
/// Relative manifest paths resolve against `base_dir`.
RunConfig run_config_from_json(const Json& doc, const std::string& where,
                               const std::filesystem::path& base_dir = {});
Json to_json(const RunConfig& config);

/// Applies "dotted.key=value" to `doc`. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(Json& doc, std::string_view assignment);

ParamGrid param_grid_from_json(const Json& doc, const std::string& where);
Json to_json(const ParamGrid& grid);

/// {"scenarios": [{"name", "path"} | {"name", "scenario": {...}}]}.
std::vector<SuiteScenario> suite_from_json(const Json& doc, const std::string& where,
                                           const std::filesystem::path& base_dir = {});
Json to_json(const std::vector<SuiteScenario>& suite);

Json to_json(const MetricsReport& metrics);
/// Reads back the counts and sums; derived rates are recomputed.
MetricsReport metrics_from_json(const Json& doc, const std::string& where);

// CSV. Every file starts with "# seed=<N> version=<V>".

std::string provenance_line(std::uint64_t seed);

void write_trace_csv(std::ostream& out, const Trace& trace, std::uint64_t seed);

struct LoadedTrace {
    Trace trace;
    std::optional<std::uint64_t> seed;
};

/// Validates column count, channel names, nonnegative lux and per-channel
/// time order; errors name the 1-based line.
LoadedTrace read_trace_csv(std::istream& in, const std::string& where);

void write_detections_csv(std::ostream& out, const std::vector<DetectionEvent>& events, std::uint64_t seed);
std::vector<DetectionEvent> read_detections_csv(std::istream& in, const std::string& where);

void write_deterrents_csv(std::ostream& out, const std::vector<DeterrentEvent>& events, std::uint64_t seed);

void write_metrics_scalars_csv(std::ostream& out, const MetricsReport& metrics, std::uint64_t seed);
void write_metrics_histogram_csv(std::ostream& out, const MetricsReport& metrics, std::uint64_t seed);

void write_ranking_csv(std::ostream& out, const std::vector<TuneResult>& ranking, std::uint64_t seed);

}  // namespace vfence
