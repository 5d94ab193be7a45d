#include "vfence/photometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace vfence {

namespace {

constexpr std::array<std::string_view, kNumVehicleClasses> kClassNames = {
    "sedan_led", "sedan_incandescent", "suv", "bus", "semi"};

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

std::string_view to_string(VehicleClass c)
{
    return kClassNames[static_cast<std::size_t>(c)];
}

VehicleClass vehicle_class_from_string(std::string_view s)
{
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == s) {
            return static_cast<VehicleClass>(i);
        }
    }
    throw InvalidArgument("unknown vehicle class '" + std::string(s) + "'");
}

// Intensities are the effective candela a roadside sensor sees from the
// low-beam pattern, not the on-axis peak of the lamp. They were fitted once
// against the standard suite with the default detector config (see README).
VehicleSpec default_vehicle(VehicleClass c)
{
    VehicleSpec v;
    v.vehicle_class = c;
    v.beam_half_angle_deg = 35.0;
    v.beam_falloff_exponent = 2.0;
    v.speed_mph = 45.0;
    switch (c) {
    case VehicleClass::sedan_led:
        v.luminous_intensity_cd = 1440.0;
        v.headlight_height_ft = 2.2;
        break;
    case VehicleClass::sedan_incandescent:
        v.luminous_intensity_cd = 1000.0;
        v.headlight_height_ft = 2.2;
        break;
    case VehicleClass::suv:
        v.luminous_intensity_cd = 1680.0;
        v.headlight_height_ft = 2.8;
        break;
    case VehicleClass::bus:
        v.luminous_intensity_cd = 6240.0;
        v.headlight_height_ft = 3.8;
        v.beam_half_angle_deg = 40.0;
        v.speed_mph = 35.0;
        break;
    case VehicleClass::semi:
        v.luminous_intensity_cd = 6240.0;
        v.headlight_height_ft = 4.0;
        v.beam_half_angle_deg = 40.0;
        v.speed_mph = 35.0;
        break;
    }
    return v;
}

void validate(const VehicleSpec& v)
{
    if (!(v.luminous_intensity_cd > 0.0)) {
        throw InvalidArgument("luminous_intensity_cd must be > 0");
    }
    if (!(v.speed_mph > 0.0)) {
        throw InvalidArgument("speed_mph must be > 0");
    }
    if (!(v.beam_half_angle_deg > 0.0 && v.beam_half_angle_deg < 90.0)) {
        throw InvalidArgument("beam_half_angle_deg must be in (0, 90)");
    }
    if (!(v.beam_falloff_exponent >= 0.0)) {
        throw InvalidArgument("beam_falloff_exponent must be >= 0");
    }
    if (!(v.headlight_height_ft >= 0.0)) {
        throw InvalidArgument("headlight_height_ft must be >= 0");
    }
    if (!(v.entry_distance_ft > 0.0)) {
        throw InvalidArgument("entry_distance_ft must be > 0");
    }
    if (!(v.entry_time_s >= 0.0)) {
        throw InvalidArgument("entry_time_s must be >= 0");
    }
}

void validate(const RoadGeometry& g)
{
    if (g.num_lanes < 1) {
        throw InvalidArgument("num_lanes must be >= 1");
    }
    if (!(g.lane_width_ft > 0.0)) {
        throw InvalidArgument("lane_width_ft must be > 0");
    }
    if (!(g.device_height_ft > 0.0)) {
        throw InvalidArgument("device_height_ft must be > 0");
    }
    if (!(g.divider_height_ft >= 0.0)) {
        throw InvalidArgument("divider_height_ft must be >= 0");
    }
    if (g.divider_position < 0 || g.divider_position > g.num_lanes) {
        throw InvalidArgument("divider_position must be a lane boundary in [0, num_lanes]");
    }
    if (!std::isfinite(g.device_lateral_offset_ft)) {
        throw InvalidArgument("device_lateral_offset_ft must be finite");
    }
}

void validate(const AmbientModel& m)
{
    if (!(m.base_night_lux >= 0.0)) {
        throw InvalidArgument("base_night_lux must be >= 0");
    }
    if (!(m.streetlight_lux >= 0.0)) {
        throw InvalidArgument("streetlight_lux must be >= 0");
    }
    if (!(m.noise_sigma >= 0.0)) {
        throw InvalidArgument("noise_sigma must be >= 0");
    }
    if (!(m.sample_rate_hz > 0.0)) {
        throw InvalidArgument("sample_rate_hz must be > 0");
    }
}

void validate(const ScenarioSpec& s)
{
    validate(s.geometry);
    validate(s.ambient);
    if (!(s.duration_s > 0.0)) {
        throw InvalidArgument("duration_s must be > 0");
    }
    for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
        const auto& v = s.vehicles[i];
        const std::string where = "vehicles[" + std::to_string(i) + "]: ";
        try {
            validate(v);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where + e.what());
        }
        if (v.lane_index < 0 || v.lane_index >= s.geometry.num_lanes) {
            throw InvalidArgument(where + "lane_index " + std::to_string(v.lane_index) +
                                  " is off the road (num_lanes = " +
                                  std::to_string(s.geometry.num_lanes) + ")");
        }
        if (v.passby_time() > s.duration_s) {
            throw InvalidArgument(where + "passes the device after duration_s ends");
        }
    }
}

double illuminance_at(const VehicleSpec& vehicle, double vehicle_distance_ft,
                      const RoadGeometry& geometry)
{
    if (!(vehicle_distance_ft > 0.0)) {
        throw InvalidArgument("illuminance_at: vehicle distance must be > 0");
    }

    const double lane_y = geometry.lane_center_ft(vehicle.lane_index);
    const double device_y = geometry.device_y_ft();

    if (geometry.divider_height_ft > 0.0) {
        const double divider_y = geometry.divider_position * geometry.lane_width_ft;
        const bool between = (device_y < divider_y && divider_y < lane_y) ||
                             (lane_y < divider_y && divider_y < device_y);
        const bool below = vehicle.headlight_height_ft < geometry.divider_height_ft &&
                           geometry.device_height_ft < geometry.divider_height_ft;
        if (between && below) {
            return 0.0;
        }
    }

    const double dx = vehicle_distance_ft;
    const double dy = lane_y - device_y;
    const double dz = geometry.device_height_ft - vehicle.headlight_height_ft;
    const double d_ft = std::sqrt(dx * dx + dy * dy + dz * dz);

    const double cos_theta = dx / d_ft;
    if (cos_theta < std::cos(deg_to_rad(vehicle.beam_half_angle_deg))) {
        return 0.0;
    }
    const double gain = std::pow(cos_theta, vehicle.beam_falloff_exponent);
    const double d_m = d_ft * kFeetToMeters;
    return vehicle.luminous_intensity_cd * gain / (d_m * d_m);
}

double headlight_contribution(const VehicleSpec& vehicle, double t, const RoadGeometry& geometry)
{
    if (t < vehicle.entry_time_s) {
        return 0.0;
    }
    const double x = vehicle.distance_at(t);
    if (x <= 0.0) {
        return 0.0;
    }
    return illuminance_at(vehicle, x, geometry);
}

double ambient_lux(const AmbientModel& model, double t, Rng& rng)
{
    if (!(t >= 0.0)) {
        throw InvalidArgument("ambient_lux: t must be >= 0");
    }
    const double level = model.noise_free_lux();
    if (model.noise_sigma == 0.0) {
        return level;
    }
    const double s = model.noise_sigma;
    return level * std::exp(s * rng.normal() - 0.5 * s * s);
}

std::size_t sample_count(const AmbientModel& model, double duration_s)
{
    // Guard against k / rate landing a hair past duration through rounding.
    return static_cast<std::size_t>(std::floor(duration_s * model.sample_rate_hz + 1e-9)) + 1;
}

Trace synthesize_trace(const ScenarioSpec& scenario, std::uint64_t seed)
{
    validate(scenario);

    std::array<Rng, kNumChannels> rngs = {Rng(mix_seed(seed, streams::kAmbientA)),
                                          Rng(mix_seed(seed, streams::kAmbientB))};

    // Bucket vehicles by channel, sorted by entry time, so each instant
    // only visits vehicles that can currently be lit.
    std::array<std::vector<const VehicleSpec*>, kNumChannels> by_channel;
    for (const auto& v : scenario.vehicles) {
        by_channel[channel_index(v.direction)].push_back(&v);
    }
    for (auto& list : by_channel) {
        std::stable_sort(list.begin(), list.end(), [](const VehicleSpec* l, const VehicleSpec* r) {
            return l->entry_time_s < r->entry_time_s;
        });
    }

    const std::size_t n = sample_count(scenario.ambient, scenario.duration_s);
    Trace trace;
    trace.reserve(n * kNumChannels);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / scenario.ambient.sample_rate_hz;
        for (int c = 0; c < kNumChannels; ++c) {
            double lux = ambient_lux(scenario.ambient, t, rngs[c]);
            for (const VehicleSpec* v : by_channel[c]) {
                if (v->entry_time_s > t) {
                    break;
                }
                lux += headlight_contribution(*v, t, scenario.geometry);
            }
            trace.push_back({t, static_cast<Channel>(c), lux});
        }
    }
    return trace;
}

}  // namespace vfence
