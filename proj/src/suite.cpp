#include "vfence/suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vfence/rng.hpp"

namespace vfence {

namespace {

RoadGeometry highway_geometry()
{
    RoadGeometry g;
    g.num_lanes = 4;
    g.lane_width_ft = 12.0;
    g.divider_height_ft = 0.0;
    g.divider_position = 2;
    g.device_lateral_offset_ft = 6.0;
    g.device_height_ft = 3.5;
    return g;
}

AmbientModel dark_ambient()
{
    return AmbientModel{0.1, 0.0, 0.08, 20.0};
}

AmbientModel streetlit_ambient()
{
    return AmbientModel{0.1, 0.1, 0.05, 20.0};
}

VehicleSpec make_vehicle(VehicleClass cls, Channel channel, double passby_s, double entry_distance_ft,
                         double intensity_sigma, Rng& rng)
{
    VehicleSpec v = default_vehicle(cls);
    v.direction = channel;
    const bool heavy = cls == VehicleClass::bus || cls == VehicleClass::semi;
    v.speed_mph = heavy ? rng.uniform(33.0, 37.0) : rng.uniform(42.0, 48.0);
    // Traffic towards channel a uses the near lanes, towards b the far ones.
    const int side = channel == Channel::a ? 0 : 2;
    v.lane_index = side + static_cast<int>(rng.below(2));
    if (intensity_sigma > 0.0) {
        v.luminous_intensity_cd *= std::exp(intensity_sigma * rng.normal() - 0.5 * intensity_sigma * intensity_sigma);
    }
    v.entry_distance_ft = entry_distance_ft;
    v.entry_time_s = passby_s - entry_distance_ft / v.speed_fps();
    return v;
}

std::vector<VehicleClass> class_mix(int n, const StandardSuiteOptions& o, int incandescent, Rng& rng)
{
    const auto count = [n](double share) { return static_cast<int>(std::lround(share * n)); };
    std::vector<VehicleClass> classes;
    classes.insert(classes.end(), incandescent, VehicleClass::sedan_incandescent);
    classes.insert(classes.end(), count(o.bus_share), VehicleClass::bus);
    classes.insert(classes.end(), count(o.semi_share), VehicleClass::semi);
    classes.insert(classes.end(), count(o.suv_share), VehicleClass::suv);
    while (static_cast<int>(classes.size()) < n) {
        classes.push_back(VehicleClass::sedan_led);
    }
    classes.resize(static_cast<std::size_t>(n));
    // Fisher-Yates with the portable integer draw.
    for (std::size_t i = classes.size(); i > 1; --i) {
        std::swap(classes[i - 1], classes[static_cast<std::size_t>(rng.below(i))]);
    }
    return classes;
}

/// Appends `classes` as free-flowing traffic; returns the last passby per channel.
std::array<double, kNumChannels> add_traffic(ScenarioSpec& s, const std::vector<VehicleClass>& classes,
                                             std::array<double, kNumChannels> last_passby,
                                             const StandardSuiteOptions& o, Rng& rng)
{
    for (VehicleClass cls : classes) {
        const auto channel = rng.bernoulli(0.5) ? Channel::a : Channel::b;
        double& last = last_passby[channel_index(channel)];
        // Exponential extra headway by inversion.
        last += o.min_headway_s - o.mean_extra_headway_s * std::log(1.0 - rng.uniform());
        const double sigma = cls == VehicleClass::sedan_incandescent ? o.incandescent_sigma : o.intensity_sigma;
        s.vehicles.push_back(make_vehicle(cls, channel, last, o.entry_distance_ft, sigma, rng));
    }
    return last_passby;
}

double latest_passby(const ScenarioSpec& s)
{
    double t = 0.0;
    for (const auto& v : s.vehicles) {
        t = std::max(t, v.passby_time());
    }
    return t;
}

}  // namespace

CaravanLayout append_caravan(ScenarioSpec& s, Channel channel, double first_passby_s)
{
    // Heavy vehicles nose to tail, then three semis in the farthest lane.
    constexpr std::array kLead = {VehicleClass::suv, VehicleClass::bus, VehicleClass::suv, VehicleClass::semi,
                                  VehicleClass::suv, VehicleClass::bus, VehicleClass::suv, VehicleClass::semi};
    constexpr double kLeadHeadway = 4.0;
    constexpr double kSemiHeadway = 4.0;
    constexpr double kCaravanMph = 25.0;

    CaravanLayout layout;
    layout.first_vehicle = s.vehicles.size();
    const int far_lane = s.geometry.num_lanes - 1;

    double passby = first_passby_s;
    auto add = [&](VehicleClass cls, int lane) {
        VehicleSpec v = default_vehicle(cls);
        v.direction = channel;
        v.speed_mph = kCaravanMph;
        v.lane_index = lane;
        v.entry_distance_ft = 800.0;
        v.entry_time_s = passby - v.entry_distance_ft / v.speed_fps();
        s.vehicles.push_back(v);
    };

    layout.caravan_start_s = first_passby_s - 800.0 / mph_to_fps(kCaravanMph);
    for (VehicleClass cls : kLead) {
        add(cls, far_lane);
        passby += kLeadHeadway;
    }
    for (int i = 0; i < 3; ++i) {
        add(VehicleClass::semi, far_lane);
        passby += kSemiHeadway;
    }
    layout.trailing_semis = 3;
    layout.caravan_end_s = passby - kSemiHeadway;
    return layout;
}

std::vector<SuiteScenario> standard_suite(const StandardSuiteOptions& o)
{
    Rng rng(mix_seed(o.seed, streams::kSuiteLayout));
    const int n = o.vehicles_per_scenario;
    const int incandescent = static_cast<int>(std::lround(o.incandescent_share * n));
    std::vector<SuiteScenario> suite;

    {
        ScenarioSpec dark;
        dark.geometry = highway_geometry();
        dark.ambient = dark_ambient();
        dark.seed = mix_seed(o.seed, 100);
        add_traffic(dark, class_mix(n, o, incandescent, rng), {30.0, 30.0}, o, rng);
        dark.duration_s = std::ceil(latest_passby(dark)) + 30.0;
        suite.push_back({"dark", std::move(dark)});
    }

    {
        // Regular traffic, then the caravan on b, then two vehicles on b
        // once the detector has released.
        constexpr int kCaravanSize = 11;
        constexpr int kAfter = 2;
        ScenarioSpec lit;
        lit.geometry = highway_geometry();
        lit.ambient = streetlit_ambient();
        lit.seed = mix_seed(o.seed, 101);
        const int regular = n - kCaravanSize - kAfter;
        auto last = add_traffic(lit, class_mix(regular, o, incandescent, rng), {30.0, 30.0}, o, rng);

        const double caravan_first_passby = last[channel_index(Channel::b)] + 120.0;
        const auto layout = append_caravan(lit, Channel::b, caravan_first_passby);

        std::array<double, kNumChannels> after = {last[0], layout.caravan_end_s + 240.0};
        for (int i = 0; i < kAfter; ++i) {
            double& t = after[channel_index(Channel::b)];
            lit.vehicles.push_back(make_vehicle(VehicleClass::sedan_led, Channel::b, t, o.entry_distance_ft,
                                                o.intensity_sigma, rng));
            t += o.min_headway_s + o.mean_extra_headway_s;
        }
        lit.duration_s = std::ceil(latest_passby(lit)) + 30.0;
        suite.push_back({"streetlit", std::move(lit)});
    }
    return suite;
}

ScenarioSpec caravan_scenario(std::uint64_t seed)
{
    ScenarioSpec s;
    s.geometry = highway_geometry();
    s.ambient = dark_ambient();
    s.seed = seed;
    const auto layout = append_caravan(s, Channel::b, 45.0);

    VehicleSpec after = default_vehicle(VehicleClass::sedan_led);
    after.direction = Channel::b;
    after.lane_index = 2;
    after.entry_time_s = layout.caravan_end_s + 200.0;
    s.vehicles.push_back(after);
    s.duration_s = std::ceil(after.passby_time()) + 20.0;
    return s;
}

}  // namespace vfence
