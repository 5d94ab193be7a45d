#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vfence/detector.hpp"
#include "vfence/deterrent.hpp"
#include "vfence/photometry.hpp"

namespace vfence {

/// Detections closer than this to the device leave an animal no time to react.
constexpr double kFailureDistanceFt = 60.0;

/// Light from a vehicle that has just passed still holds the fast IMA up
/// for about a second; events this soon after a pass-by are repeats.
constexpr double kPassbyGraceS = 2.0;

/// Ground truth for one vehicle, derived from constant-speed kinematics.
struct GroundTruthPass {
    std::size_t vehicle_index = 0;
    Channel channel = Channel::a;
    VehicleClass vehicle_class = VehicleClass::sedan_led;
    double speed_fps = 0.0;
    double t_enter = 0.0;      ///< start of the approach window
    double t_at_60ft = 0.0;
    double t_passby = 0.0;

    double distance_at(double t) const { return speed_fps * (t_passby - t); }
    bool in_window(double t) const { return t >= t_enter && t <= t_passby; }
    bool explains(double t) const { return t >= t_enter && t <= t_passby + kPassbyGraceS; }
};

std::vector<GroundTruthPass> ground_truth(const ScenarioSpec& scenario);

struct TriggerLead {
    double lead_time_s = 0.0;
    double distance_ft = 0.0;
};

/// Throws InvalidArgument if the event lies outside the pass's approach window.
TriggerLead trigger_lead(const DetectionEvent& event, const GroundTruthPass& pass);

struct TruePositive {
    std::size_t vehicle_index = 0;
    VehicleClass vehicle_class = VehicleClass::sedan_led;
    DetectionEvent event;
    double trigger_distance_ft = 0.0;
    double trigger_lead_s = 0.0;
};

struct LateDetection {
    std::size_t vehicle_index = 0;
    DetectionEvent event;
    double trigger_distance_ft = 0.0;
};

struct MatchResult {
    std::vector<TruePositive> true_positives;
    /// Every vehicle without a timely detection, in vehicle order.
    std::vector<std::size_t> false_negatives;
    std::vector<DetectionEvent> false_positives;
    /// Subset of the false negatives whose only detection came inside 60 ft.
    std::vector<LateDetection> late;
    /// Re-triggers during the approach (or just after the pass-by) of a
    /// vehicle that was already matched.
    std::vector<DetectionEvent> repeats;
    /// Negative-class denominator for the false-positive rate.
    std::size_t quiet_intervals = 0;
};

/// Each event, in time order, goes to the nearest not-yet-matched vehicle
/// on its channel whose approach window contains it. Matched vehicles
/// become true positives when the event came at >= 60 ft, false negatives
/// otherwise. Events only explained by an already-matched vehicle, or by a
/// vehicle that passed less than kPassbyGraceS ago, are repeats; all other
/// events are false positives.
MatchResult match_detections(std::span<const DetectionEvent> events, std::span<const GroundTruthPass> passes);

/// Per channel, the number of consecutive `slice_s` slices of [0, duration)
/// that overlap no approach window on that channel.
std::size_t count_quiet_intervals(std::span<const GroundTruthPass> passes, double duration_s, double slice_s);

std::vector<double> default_histogram_edges();

struct ClassStats {
    std::size_t count = 0;
    double sum_distance_ft = 0.0;

    std::optional<double> mean_distance_ft() const;
};

/// Aggregates kept as counts and sums so that reports merge exactly.
struct MetricsReport {
    std::size_t true_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t false_positives = 0;
    std::size_t quiet_intervals = 0;
    double sum_lead_time_s = 0.0;
    double sum_distance_ft = 0.0;
    std::array<ClassStats, kNumVehicleClasses> per_class{};
    /// Outer bins are open-ended: distances below the first edge land in
    /// the first bin, distances at or above the last edge in the last.
    std::vector<double> histogram_edges_ft;
    std::array<std::vector<std::size_t>, kNumVehicleClasses> histogram{};

    std::optional<double> recall() const;
    std::optional<double> precision() const;
    std::optional<double> false_positive_rate() const;
    std::optional<double> mean_trigger_time_s() const;
    std::optional<double> mean_trigger_distance_ft() const;
    std::size_t histogram_total() const;
};

void validate_histogram_edges(std::span<const double> edges);

MetricsReport compute_metrics(const MatchResult& match, std::span<const double> histogram_edges);

/// Sums counts; rates are recomputed from the summed counts. Throws
/// InvalidArgument when the histogram edges differ.
MetricsReport merge(const MetricsReport& lhs, const MetricsReport& rhs);

struct ScenarioRun {
    Trace trace;
    std::vector<DetectionEvent> detections;
    std::vector<DeterrentEvent> deterrents;
    std::vector<GroundTruthPass> passes;
};

/// Photometry -> detector -> deterrent, all randomness drawn from `seed`.
ScenarioRun run_scenario(const ScenarioSpec& scenario, const DetectorConfig& config, const SoundPool& pool,
                         const VisualConfig& visual, std::uint64_t seed);
ScenarioRun run_scenario(const ScenarioSpec& scenario, const DetectorConfig& config, const SoundPool& pool,
                         const VisualConfig& visual);

/// Matching plus quiet-interval count (slices sized by the config's holdoff).
MatchResult evaluate(std::span<const DetectionEvent> detections, const ScenarioSpec& scenario,
                     const DetectorConfig& config);

struct SuiteEvaluation {
    std::vector<MatchResult> matches;   ///< one per scenario
    MetricsReport metrics;              ///< merged over the suite
};

/// Runs the detector over precomputed traces of `suite`.
SuiteEvaluation evaluate_suite(std::span<const ScenarioSpec> suite, std::span<const Trace> traces,
                               const DetectorConfig& config, std::span<const double> histogram_edges);
SuiteEvaluation evaluate_suite(std::span<const ScenarioSpec> suite, const DetectorConfig& config,
                               std::span<const double> histogram_edges);

/// Axes left empty take the base config's value.
struct ParamGrid {
    std::optional<std::vector<double>> alpha_baseline;
    std::optional<std::vector<double>> alpha_instant;
    std::optional<std::vector<double>> trigger_ratio;
    std::optional<std::vector<double>> holdoff_s;

    /// Cartesian product in axis order (alpha_baseline outermost). The
    /// release ratio keeps the base config's fraction of the trigger excess.
    std::vector<DetectorConfig> expand(const DetectorConfig& base) const;
};

/// Grid the default config was selected from.
ParamGrid default_param_grid();

struct TuneResult {
    std::size_t grid_index = 0;
    DetectorConfig config;
    MetricsReport metrics;
};

/// Exhaustive grid evaluation, ranked: zero false positives first, then
/// recall descending, then mean trigger distance descending, then grid
/// order. Grid points are evaluated on `threads` workers (0 = hardware
/// concurrency); the ranking does not depend on the thread count.
std::vector<TuneResult> tune_parameters(const ParamGrid& grid, std::span<const ScenarioSpec> suite,
                                        const DetectorConfig& base, std::span<const double> histogram_edges,
                                        unsigned threads = 0);

}  // namespace vfence
