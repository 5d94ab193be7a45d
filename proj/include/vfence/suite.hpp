#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vfence/photometry.hpp"

namespace vfence {

/// A named scenario within a suite.
struct SuiteScenario {
    std::string name;
    ScenarioSpec spec;
};

struct StandardSuiteOptions {
    std::uint64_t seed = 20211;
    int vehicles_per_scenario = 100;
    /// Share of incandescent-headlight vehicles in each scenario.
    double incandescent_share = 0.14;
    double bus_share = 0.04;
    double semi_share = 0.08;
    double suv_share = 0.24;
    /// Spread of per-vehicle headlight output (lamp age, aim, dirt).
    double intensity_sigma = 0.15;
    /// Old halogen and incandescent lamps vary far more (yellowed lenses, aim).
    double incandescent_sigma = 0.8;
    double min_headway_s = 30.0;
    double mean_extra_headway_s = 20.0;
    double entry_distance_ft = 800.0;
};

/// Four-lane highway night traffic: one scenario in the dark and one under
/// street lights. The street-lit scenario ends with a caravan on channel b
/// trailed by three semis in the farthest lane.
std::vector<SuiteScenario> standard_suite(const StandardSuiteOptions& options = {});

/// Bright caravan long enough to saturate the detector, followed by a quiet
/// gap and a single sedan. Used to exercise suppression and release.
ScenarioSpec caravan_scenario(std::uint64_t seed = 7);

struct CaravanLayout {
    double caravan_start_s = 0.0;   ///< entry of the first caravan vehicle
    double caravan_end_s = 0.0;     ///< passby of the last caravan vehicle
    std::size_t first_vehicle = 0;  ///< index of the first caravan vehicle
    std::size_t trailing_semis = 0; ///< semis at the tail of the caravan
};

/// Appends a slow heavy-vehicle caravan in the farthest lane of `channel`,
/// its first vehicle passing the device at `first_passby_s`.
CaravanLayout append_caravan(ScenarioSpec& scenario, Channel channel, double first_passby_s);

}  // namespace vfence
