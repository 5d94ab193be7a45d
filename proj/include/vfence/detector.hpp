#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vfence/common.hpp"
#include "vfence/photometry.hpp"

namespace vfence {

/// Inertial moving average: value <- value * alpha + (1 - alpha) * sample.
/// alpha is the inertia; 0 follows the input exactly, 1 never moves.
class Ima {
public:
    Ima(double alpha, double initial);

    double value() const { return value_; }
    double alpha() const { return alpha_; }

    /// Throws InvalidArgument for a negative sample.
    Ima updated(double sample) const;
    void update(double sample) { *this = updated(sample); }

    friend bool operator==(const Ima&, const Ima&) = default;

private:
    double alpha_;
    double value_;
};

/// Defaults are the winner of default_param_grid() on the standard suite,
/// at 20 Hz (baseline time constant about 500 s, instant about 0.25 s).
struct DetectorConfig {
    double alpha_baseline = 0.9999;
    double alpha_instant = 0.8;
    double trigger_ratio = 1.5;
    double release_ratio = 1.15;
    double sensor_min_lux = 1.88e-4;
    double sensor_max_lux = 8.8e4;
    double holdoff_s = 5.0;
    double max_continuous_active_s = 30.0;
    /// When false, samples are used as-is and the ratio denominator is only
    /// guarded against zero.
    bool clamp_enabled = true;

    friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

void validate(const DetectorConfig& config);

double clamp_to_sensor_range(double lux, const DetectorConfig& config);

struct ChannelState {
    Ima baseline;
    Ima instant;
    std::optional<double> active_since;
    bool suppressed = false;
    std::optional<double> last_trigger_t;
    std::optional<double> last_t;

    double ratio(const DetectorConfig& config) const;

    friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

struct DetectorState {
    std::array<std::optional<ChannelState>, kNumChannels> channels;

    const ChannelState& channel(Channel c) const;

    friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

struct DetectionEvent {
    double t = 0.0;
    Channel channel = Channel::a;
    double ratio_at_trigger = 0.0;
    double instant_lux = 0.0;
    double baseline_lux = 0.0;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

/// Seeds both IMAs on both channels with the clamped first sample.
DetectorState init(const DetectorConfig& config, double first_sample);

/// Thrown by step when a channel's timestamps go backwards.
class OutOfOrderSample : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct StepResult {
    DetectorState state;
    std::optional<DetectionEvent> event;
};

/// One detector transition for one sample.
///
/// The sample is clamped to the sensor range, both IMAs of its channel are
/// updated, and r = instant / max(baseline, floor) is formed. An event is
/// emitted iff r >= trigger_ratio, the channel's holdoff has elapsed and the
/// channel is not suppressed. A channel whose ratio has stayed at or above
/// trigger_ratio for longer than max_continuous_active becomes suppressed
/// until r drops below release_ratio. A channel that has not seen a sample
/// yet is seeded by it and cannot trigger on it.
StepResult step(const DetectorState& state, const TraceSample& sample, const DetectorConfig& config);

/// In-place form of step used by the batch driver.
std::optional<DetectionEvent> step_in_place(DetectorState& state, const TraceSample& sample,
                                            const DetectorConfig& config);

/// Fold of step over the trace starting from `state` (updated in place).
/// Errors are rethrown with the sample index prepended.
std::vector<DetectionEvent> run_trace(std::span<const TraceSample> trace, const DetectorConfig& config,
                                      DetectorState& state);
std::vector<DetectionEvent> run_trace(std::span<const TraceSample> trace, const DetectorConfig& config);

}  // namespace vfence
