#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "vfence/common.hpp"
#include "vfence/rng.hpp"

namespace vfence {

enum class VehicleClass : std::uint8_t { sedan_led, sedan_incandescent, suv, bus, semi };

constexpr int kNumVehicleClasses = 5;

std::string_view to_string(VehicleClass c);
VehicleClass vehicle_class_from_string(std::string_view s);

/// A single vehicle's headlight pair, modelled as one point source at the
/// headlight midpoint aimed along the direction of travel.
struct VehicleSpec {
    VehicleClass vehicle_class = VehicleClass::sedan_led;
    double luminous_intensity_cd = 0.0;
    double headlight_height_ft = 0.0;
    double beam_half_angle_deg = 0.0;
    double beam_falloff_exponent = 0.0;
    double speed_mph = 45.0;
    int lane_index = 0;               ///< 0 is the lane nearest the device
    Channel direction = Channel::a;   ///< channel whose sensor faces this vehicle's approach
    double entry_time_s = 0.0;
    double entry_distance_ft = 2000.0;

    double speed_fps() const { return mph_to_fps(speed_mph); }
    /// Longitudinal distance to the device at time t; negative once passed.
    double distance_at(double t) const { return entry_distance_ft - speed_fps() * (t - entry_time_s); }
    double passby_time() const { return entry_time_s + entry_distance_ft / speed_fps(); }
};

/// Vehicle populated with the class's default photometric parameters.
VehicleSpec default_vehicle(VehicleClass c);

/// Lateral coordinates: the near road edge is y = 0, lanes extend towards
/// +y, and the device sits at y = -device_lateral_offset_ft. A negative
/// offset places the device on the road surface (e.g. in a median).
struct RoadGeometry {
    int num_lanes = 4;
    double lane_width_ft = 12.0;
    double divider_height_ft = 0.0;   ///< 0 = no divider
    int divider_position = 2;         ///< lane boundary index, 0..num_lanes
    double device_lateral_offset_ft = 6.0;
    double device_height_ft = 3.5;

    double lane_center_ft(int lane) const { return (lane + 0.5) * lane_width_ft; }
    double device_y_ft() const { return -device_lateral_offset_ft; }
};

struct AmbientModel {
    double base_night_lux = 0.02;
    double streetlight_lux = 0.0;
    double noise_sigma = 0.0;        ///< lognormal sigma of the multiplicative noise
    double sample_rate_hz = 20.0;

    double noise_free_lux() const { return base_night_lux + streetlight_lux; }
};

struct ScenarioSpec {
    RoadGeometry geometry;
    AmbientModel ambient;
    std::vector<VehicleSpec> vehicles;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
};

struct TraceSample {
    double t = 0.0;
    Channel channel = Channel::a;
    double lux = 0.0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

using Trace = std::vector<TraceSample>;

void validate(const VehicleSpec& v);
void validate(const RoadGeometry& g);
void validate(const AmbientModel& m);
/// Also rejects vehicles placed off the road and durations that end before
/// some vehicle has passed the device.
void validate(const ScenarioSpec& s);

/// Illuminance (lux) at the device from one vehicle `vehicle_distance_ft`
/// ahead of it along the road:
///
///     E = I * max(0, cos theta)^p / d^2     (theta <= half angle, else 0)
///
/// with d the 3-D headlight-to-sensor distance in metres and theta the
/// angle between the beam axis (direction of travel) and the sensor.
/// Zero when a divider taller than both headlight and sensor lies between
/// them. Throws InvalidArgument for vehicle_distance_ft <= 0.
double illuminance_at(const VehicleSpec& vehicle, double vehicle_distance_ft,
                      const RoadGeometry& geometry);

/// Like illuminance_at, but returns 0 for a vehicle that has not yet
/// entered or has already passed the device.
double headlight_contribution(const VehicleSpec& vehicle, double t, const RoadGeometry& geometry);

/// Ambient level perturbed by mean-preserving lognormal noise,
/// (base + streetlight) * exp(sigma * z - sigma^2 / 2).
double ambient_lux(const AmbientModel& model, double t, Rng& rng);

/// Number of sample instants per channel covering [0, duration].
std::size_t sample_count(const AmbientModel& model, double duration_s);

/// Both channels, interleaved (a then b) at each instant t_k = k / rate.
/// Identical scenario and seed produce a bit-identical trace.
Trace synthesize_trace(const ScenarioSpec& scenario, std::uint64_t seed);
inline Trace synthesize_trace(const ScenarioSpec& scenario) { return synthesize_trace(scenario, scenario.seed); }

}  // namespace vfence
