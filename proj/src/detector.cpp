#include "vfence/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vfence {

Ima::Ima(double alpha, double initial) : alpha_(alpha), value_(initial)
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidArgument("IMA inertia must be in [0, 1]");
    }
}

Ima Ima::updated(double sample) const
{
    if (!(sample >= 0.0)) {
        throw InvalidArgument("IMA sample must be >= 0");
    }
    Ima next = *this;
    next.value_ = value_ * alpha_ + (1.0 - alpha_) * sample;
    return next;
}

void validate(const DetectorConfig& c)
{
    auto in_unit = [](double a) { return a >= 0.0 && a <= 1.0; };
    if (!in_unit(c.alpha_baseline) || !in_unit(c.alpha_instant)) {
        throw InvalidArgument("alpha_baseline and alpha_instant must be in [0, 1]");
    }
    if (!(c.alpha_baseline > c.alpha_instant)) {
        throw InvalidArgument("alpha_baseline must exceed alpha_instant");
    }
    if (!(c.trigger_ratio > 1.0)) {
        throw InvalidArgument("trigger_ratio must be > 1");
    }
    if (!(c.release_ratio > 1.0 && c.release_ratio < c.trigger_ratio)) {
        throw InvalidArgument("release_ratio must be in (1, trigger_ratio)");
    }
    if (!(c.sensor_min_lux > 0.0 && c.sensor_min_lux < c.sensor_max_lux)) {
        throw InvalidArgument("sensor range must satisfy 0 < sensor_min_lux < sensor_max_lux");
    }
    if (!(c.holdoff_s >= 0.0)) {
        throw InvalidArgument("holdoff_s must be >= 0");
    }
    if (!(c.max_continuous_active_s > 0.0)) {
        throw InvalidArgument("max_continuous_active_s must be > 0");
    }
}

double clamp_to_sensor_range(double lux, const DetectorConfig& config)
{
    if (!(lux >= 0.0)) {
        throw InvalidArgument("lux reading must be >= 0");
    }
    return std::clamp(lux, config.sensor_min_lux, config.sensor_max_lux);
}

namespace {

double denominator_floor(const DetectorConfig& config)
{
    return config.clamp_enabled ? config.sensor_min_lux : std::numeric_limits<double>::min();
}

double condition(double lux, const DetectorConfig& config)
{
    if (config.clamp_enabled) {
        return clamp_to_sensor_range(lux, config);
    }
    if (!(lux >= 0.0)) {
        throw InvalidArgument("lux reading must be >= 0");
    }
    return lux;
}

ChannelState seeded_channel(const DetectorConfig& config, double level)
{
    return ChannelState{Ima(config.alpha_baseline, level), Ima(config.alpha_instant, level),
                        std::nullopt, false, std::nullopt, std::nullopt};
}

}  // namespace

double ChannelState::ratio(const DetectorConfig& config) const
{
    return instant.value() / std::max(baseline.value(), denominator_floor(config));
}

const ChannelState& DetectorState::channel(Channel c) const
{
    const auto& ch = channels[channel_index(c)];
    if (!ch) {
        throw InvalidArgument("channel " + std::string(to_string(c)) + " has not been initialized");
    }
    return *ch;
}

DetectorState init(const DetectorConfig& config, double first_sample)
{
    const double level = condition(first_sample, config);
    DetectorState s;
    for (auto& ch : s.channels) {
        ch = seeded_channel(config, level);
    }
    return s;
}

std::optional<DetectionEvent> step_in_place(DetectorState& state, const TraceSample& sample,
                                            const DetectorConfig& config)
{
    const double x = condition(sample.lux, config);
    auto& slot = state.channels[channel_index(sample.channel)];
    if (!slot) {
        slot = seeded_channel(config, x);
        slot->last_t = sample.t;
        return std::nullopt;
    }

    ChannelState& ch = *slot;
    if (ch.last_t && sample.t < *ch.last_t) {
        throw OutOfOrderSample("sample at t=" + std::to_string(sample.t) + " on channel " +
                               std::string(to_string(sample.channel)) +
                               " precedes previous sample at t=" + std::to_string(*ch.last_t));
    }
    ch.last_t = sample.t;

    ch.baseline.update(x);
    ch.instant.update(x);
    const double r = ch.ratio(config);

    if (r >= config.trigger_ratio) {
        if (!ch.active_since) {
            ch.active_since = sample.t;
        }
        if (sample.t - *ch.active_since > config.max_continuous_active_s) {
            ch.suppressed = true;
        }
    } else {
        ch.active_since.reset();
        if (ch.suppressed && r < config.release_ratio) {
            ch.suppressed = false;
        }
    }

    if (r < config.trigger_ratio || ch.suppressed) {
        return std::nullopt;
    }
    if (ch.last_trigger_t && sample.t - *ch.last_trigger_t < config.holdoff_s) {
        return std::nullopt;
    }
    ch.last_trigger_t = sample.t;
    return DetectionEvent{sample.t, sample.channel, r, ch.instant.value(), ch.baseline.value()};
}

StepResult step(const DetectorState& state, const TraceSample& sample, const DetectorConfig& config)
{
    StepResult out{state, std::nullopt};
    out.event = step_in_place(out.state, sample, config);
    return out;
}

std::vector<DetectionEvent> run_trace(std::span<const TraceSample> trace, const DetectorConfig& config,
                                      DetectorState& state)
{
    validate(config);
    std::vector<DetectionEvent> events;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        try {
            if (auto ev = step_in_place(state, trace[i], config)) {
                events.push_back(*ev);
            }
        } catch (const OutOfOrderSample& e) {
            throw OutOfOrderSample("sample " + std::to_string(i) + ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return events;
}

std::vector<DetectionEvent> run_trace(std::span<const TraceSample> trace, const DetectorConfig& config)
{
    DetectorState state;
    return run_trace(trace, config, state);
}

}  // namespace vfence
