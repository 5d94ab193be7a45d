#include "vfence/io.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <sstream>

using namespace vfence;

namespace {

ScenarioSpec sample_scenario()
{
    ScenarioSpec s;
    s.geometry.divider_height_ft = 3.0;
    s.ambient.streetlight_lux = 0.5;
    s.ambient.noise_sigma = 0.05;
    VehicleSpec v = default_vehicle(VehicleClass::semi);
    v.lane_index = 2;
    v.direction = Channel::b;
    v.entry_time_s = 12.25;
    s.vehicles.push_back(v);
    s.vehicles.push_back(default_vehicle(VehicleClass::sedan_incandescent));
    s.duration_s = 90.0;
    s.seed = 42;
    return s;
}

std::string message_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const ParseError& e) {
        return e.what();
    }
    return "<no ParseError>";
}

MetricsReport sample_metrics()
{
    MatchResult m;
    m.true_positives.push_back({0, VehicleClass::bus, {}, 300.0, 4.0});
    m.true_positives.push_back({1, VehicleClass::sedan_led, {}, 231.0, 3.5});
    m.false_negatives.push_back(2);
    m.quiet_intervals = 9;
    return compute_metrics(m, default_histogram_edges());
}

}  // namespace

TEST(FormatDecimal, ShortestRoundTripWithoutExponent)
{
    EXPECT_EQ(format_decimal(0.1), "0.1");
    EXPECT_EQ(format_decimal(1e6), "1000000");
    EXPECT_EQ(format_decimal(1.88e-4), "0.000188");
    EXPECT_EQ(format_decimal(-2.5), "-2.5");
    for (double x : {0.3, 1.0 / 3.0, 123456.789, 1e-9}) {
        EXPECT_EQ(std::stod(format_decimal(x)), x);
    }
}

TEST(ScenarioJson, RoundTrip)
{
    const ScenarioSpec s = sample_scenario();
    const Json doc = to_json(s);
    const ScenarioSpec back = scenario_from_json(doc, "s.json");
    EXPECT_EQ(to_json(back), doc);
    ASSERT_EQ(back.vehicles.size(), 2u);
    EXPECT_EQ(back.vehicles[0].vehicle_class, VehicleClass::semi);
    EXPECT_EQ(back.vehicles[0].direction, Channel::b);
    EXPECT_EQ(back.vehicles[0].entry_time_s, 12.25);
    EXPECT_EQ(back.seed, 42u);
}

TEST(ScenarioJson, ClassDefaultsFillOmittedFields)
{
    const Json doc = Json::parse(R"({"duration_s": 120, "vehicles": [{"class": "bus"}]})");
    const ScenarioSpec s = scenario_from_json(doc, "s.json");
    const VehicleSpec bus = default_vehicle(VehicleClass::bus);
    ASSERT_EQ(s.vehicles.size(), 1u);
    EXPECT_EQ(s.vehicles[0].luminous_intensity_cd, bus.luminous_intensity_cd);
    EXPECT_EQ(s.vehicles[0].speed_mph, bus.speed_mph);
    EXPECT_EQ(s.vehicles[0].direction, Channel::a);
}

TEST(ScenarioJson, ErrorsNameFieldPath)
{
    Json doc = to_json(sample_scenario());
    doc["vehicles"][1]["speed_mph"] = -3.0;
    const auto msg = message_of([&] { scenario_from_json(doc, "bad.json"); });
    EXPECT_NE(msg.find("bad.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("vehicles[1].speed_mph"), std::string::npos) << msg;

    doc = to_json(sample_scenario());
    doc["ambient"]["colour"] = "amber";
    EXPECT_NE(message_of([&] { scenario_from_json(doc, "x"); }).find("ambient.colour: unknown field"),
              std::string::npos);

    doc = to_json(sample_scenario());
    doc.erase("duration_s");
    EXPECT_NE(message_of([&] { scenario_from_json(doc, "x"); }).find("duration_s: missing required field"),
              std::string::npos);

    doc = to_json(sample_scenario());
    doc["vehicles"][0]["class"] = "tractor";
    EXPECT_NE(message_of([&] { scenario_from_json(doc, "x"); }).find("vehicles[0].class"), std::string::npos);

    doc = to_json(sample_scenario());
    doc["geometry"]["num_lanes"] = 2.5;
    EXPECT_NE(message_of([&] { scenario_from_json(doc, "x"); }).find("geometry.num_lanes: expected an integer"),
              std::string::npos);

    EXPECT_THROW(scenario_from_json(Json::array(), "x"), ParseError);
}

TEST(DetectorConfigJson, RoundTripAndValidation)
{
    DetectorConfig c;
    c.alpha_baseline = 0.9995;
    c.trigger_ratio = 2.5;
    c.clamp_enabled = false;
    EXPECT_EQ(detector_config_from_json(to_json(c), "c"), c);
    EXPECT_EQ(detector_config_from_json(Json::object(), "c"), DetectorConfig{});

    Json bad = to_json(c);
    bad["alpha_instant"] = 1.5;
    EXPECT_THROW(detector_config_from_json(bad, "c"), ParseError);
    bad = to_json(c);
    bad["clamp_enabled"] = 1;
    EXPECT_NE(message_of([&] { detector_config_from_json(bad, "c"); }).find("clamp_enabled"), std::string::npos);
}

TEST(RunConfigJson, RoundTripWithVisualOverride)
{
    RunConfig rc;
    rc.detector.holdoff_s = 7.0;
    rc.visual.duration_s = 6.0;
    rc.pool.no_repeat = false;
    rc.histogram_edges_ft = {0, 100, 400};
    const RunConfig back = run_config_from_json(to_json(rc), "r");
    EXPECT_EQ(back.detector, rc.detector);
    EXPECT_EQ(back.visual.duration_s, 6.0);
    EXPECT_FALSE(back.pool.no_repeat);
    EXPECT_EQ(back.pool.sounds, rc.pool.sounds);
    EXPECT_EQ(back.histogram_edges_ft, rc.histogram_edges_ft);
    EXPECT_EQ(to_json(back), to_json(rc));
}

TEST(RunConfigJson, RejectsBadSections)
{
    Json doc = Json::parse(R"({"deterrent": {"sounds": [], "manifest": "m.json"}})");
    EXPECT_THROW(run_config_from_json(doc, "r"), ParseError);
    doc = Json::parse(R"({"deterrent": {"sounds": []}})");
    EXPECT_THROW(run_config_from_json(doc, "r"), ParseError);
    doc = Json::parse(R"({"histogram_edges_ft": [100, 50]})");
    EXPECT_NE(message_of([&] { run_config_from_json(doc, "r"); }).find("histogram_edges_ft"), std::string::npos);
    doc = Json::parse(R"({"deterrent": {"visual": {"blink_hz": 0}}})");
    EXPECT_THROW(run_config_from_json(doc, "r"), ParseError);
    doc = Json::parse(R"({"deterrent": {"sounds": [{"id": "a"}]}})");
    EXPECT_NE(message_of([&] { run_config_from_json(doc, "r"); }).find("deterrent.sounds[0].duration_s"),
              std::string::npos);
}

TEST(SoundPoolJson, RoundTrip)
{
    const SoundPool pool = default_sound_pool();
    EXPECT_EQ(sound_pool_from_json(to_json(pool), "m").sounds, pool.sounds);
}

TEST(ApplyOverride, SetsNestedValues)
{
    Json doc = Json::parse(R"({"detector": {"trigger_ratio": 2.0}})");
    apply_override(doc, "detector.trigger_ratio=3.5");
    apply_override(doc, "detector.clamp_enabled=false");
    apply_override(doc, "deterrent.visual.wavelength_nm=505");
    apply_override(doc, "label=night run");
    EXPECT_EQ(doc["detector"]["trigger_ratio"], 3.5);
    EXPECT_EQ(doc["detector"]["clamp_enabled"], false);
    EXPECT_EQ(doc["deterrent"]["visual"]["wavelength_nm"], 505);
    EXPECT_EQ(doc["label"], "night run");
    const RunConfig rc = run_config_from_json(Json{{"detector", doc["detector"]}}, "r");
    EXPECT_EQ(rc.detector.trigger_ratio, 3.5);
}

TEST(ApplyOverride, RejectsMalformed)
{
    Json doc = Json::parse(R"({"detector": 1})");
    EXPECT_THROW(apply_override(doc, "no_equals"), ParseError);
    EXPECT_THROW(apply_override(doc, "=3"), ParseError);
    EXPECT_THROW(apply_override(doc, "a..b=3"), ParseError);
    EXPECT_THROW(apply_override(doc, "detector.trigger_ratio=3"), ParseError);
}

TEST(ParamGridJson, RoundTripAndEmptyRejected)
{
    const ParamGrid g = default_param_grid();
    const ParamGrid back = param_grid_from_json(to_json(g), "g");
    EXPECT_EQ(back.alpha_baseline, g.alpha_baseline);
    EXPECT_EQ(back.alpha_instant, g.alpha_instant);
    EXPECT_EQ(back.trigger_ratio, g.trigger_ratio);
    EXPECT_EQ(back.holdoff_s, g.holdoff_s);

    EXPECT_NE(message_of([] { param_grid_from_json(Json::object(), "g.json"); }).find("parameter grid is empty"),
              std::string::npos);
    EXPECT_NE(message_of([] { param_grid_from_json(Json::parse(R"({"trigger_ratio": []})"), "g"); })
                  .find("trigger_ratio: parameter grid axis is empty"),
              std::string::npos);
}

TEST(SuiteJson, InlineRoundTripAndErrors)
{
    std::vector<SuiteScenario> suite = {{"one", sample_scenario()}, {"two", sample_scenario()}};
    suite[1].spec.seed = 7;
    const auto back = suite_from_json(to_json(suite), "suite.json");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].name, "two");
    EXPECT_EQ(to_json(back), to_json(suite));

    EXPECT_THROW(suite_from_json(Json::parse(R"({"scenarios": []})"), "s"), ParseError);
    EXPECT_THROW(suite_from_json(Json::parse(R"({"scenarios": [{"name": "x"}]})"), "s"), ParseError);
    const auto msg = message_of([] {
        suite_from_json(Json::parse(R"({"scenarios": [{"path": "does_not_exist.json"}]})"), "s", "/nonexistent");
    });
    EXPECT_NE(msg.find("cannot open file"), std::string::npos) << msg;
}

TEST(MetricsJson, RoundTripPreservesCountsAndRates)
{
    const MetricsReport m = sample_metrics();
    const Json doc = to_json(m);
    EXPECT_EQ(doc["schema"], std::string(kMetricsSchema));
    EXPECT_EQ(doc["counts"]["true_positives"], 2);
    const MetricsReport back = metrics_from_json(doc, "m");
    EXPECT_EQ(to_json(back), doc);
    EXPECT_EQ(back.recall(), m.recall());
    EXPECT_EQ(back.histogram, m.histogram);
}

TEST(MetricsJson, RejectsInconsistentDocuments)
{
    Json doc = to_json(sample_metrics());
    doc["schema"] = "other/1";
    EXPECT_THROW(metrics_from_json(doc, "m"), ParseError);
    doc = to_json(sample_metrics());
    doc["histogram"]["counts"]["bus"].push_back(1);
    EXPECT_NE(message_of([&] { metrics_from_json(doc, "m"); }).find("histogram.counts.bus"), std::string::npos);
    doc = to_json(sample_metrics());
    doc["counts"]["false_positives"] = -1;
    EXPECT_THROW(metrics_from_json(doc, "m"), ParseError);
}

TEST(TraceCsv, RoundTripKeepsSeedAndValues)
{
    const Trace trace = {{0.0, Channel::a, 0.02}, {0.0, Channel::b, 0.021}, {0.05, Channel::a, 1.0 / 3.0}};
    std::stringstream ss;
    write_trace_csv(ss, trace, 99);
    EXPECT_EQ(ss.str().rfind("# seed=99 version=1.0.0\nt_s,channel,lux\n", 0), 0u);
    const LoadedTrace back = read_trace_csv(ss, "t.csv");
    EXPECT_EQ(back.trace, trace);
    EXPECT_EQ(back.seed, 99u);
}

TEST(TraceCsv, ErrorsNameTheLine)
{
    auto msg_for = [](const std::string& body) {
        std::istringstream in("# seed=1 version=1.0.0\nt_s,channel,lux\n" + body);
        return message_of([&] { read_trace_csv(in, "t.csv"); });
    };
    EXPECT_NE(msg_for("0,a,0.1\n1,a\n").find("t.csv: line 4: expected 3 columns"), std::string::npos);
    EXPECT_NE(msg_for("0,a,0.1\n1,c,0.1\n").find("line 4: column channel"), std::string::npos);
    EXPECT_NE(msg_for("0,a,x\n").find("line 3: column lux: 'x' is not a number"), std::string::npos);
    EXPECT_NE(msg_for("0,a,-1\n").find("line 3: column lux: negative"), std::string::npos);
    EXPECT_NE(msg_for("1,a,0.1\n2,b,0.1\n0.5,a,0.1\n").find("line 5: timestamp 0.5 precedes"), std::string::npos);

    std::istringstream wrong_header("time,channel,lux\n");
    EXPECT_NE(message_of([&] { read_trace_csv(wrong_header, "t.csv"); }).find("line 1: expected header"),
              std::string::npos);
    std::istringstream empty("");
    EXPECT_THROW(read_trace_csv(empty, "t.csv"), ParseError);
}

TEST(TraceCsv, ChannelsOrderedIndependentlyAndNoSeedAllowed)
{
    std::istringstream in("t_s,channel,lux\r\n1,a,0.1\r\n0.5,b,0.1\r\n\r\n2,a,0.2\r\n");
    const LoadedTrace back = read_trace_csv(in, "t.csv");
    EXPECT_EQ(back.trace.size(), 3u);
    EXPECT_FALSE(back.seed.has_value());
}

TEST(DetectionsCsv, RoundTrip)
{
    const std::vector<DetectionEvent> events = {{3.25, Channel::a, 2.5, 0.5, 0.2},
                                                {40.0, Channel::b, 1.75, 0.35, 0.2}};
    std::stringstream ss;
    write_detections_csv(ss, events, 5);
    EXPECT_EQ(read_detections_csv(ss, "d.csv"), events);

    std::istringstream bad("t_s,channel,ratio,instant_lux,baseline_lux\n1,a,2\n");
    EXPECT_NE(message_of([&] { read_detections_csv(bad, "d.csv"); }).find("line 2"), std::string::npos);
}

TEST(OtherCsv, HeadersAndRows)
{
    std::ostringstream det;
    write_deterrents_csv(det, {{1.5, "wolf_howl", 520.0, 2.0, 4.0}}, 3);
    EXPECT_EQ(det.str(), "# seed=3 version=1.0.0\nt_s,sound_id,wavelength_nm,blink_hz,duration_s\n"
                         "1.5,wolf_howl,520,2,4\n");

    const MetricsReport m = sample_metrics();
    std::ostringstream scalars;
    write_metrics_scalars_csv(scalars, m, 0);
    EXPECT_NE(scalars.str().find("\ntrue_positives,2\n"), std::string::npos);
    EXPECT_NE(scalars.str().find("\nfalse_positive_rate,0\n"), std::string::npos);
    EXPECT_NE(scalars.str().find("\nmean_distance_ft.suv,\n"), std::string::npos);
    EXPECT_NE(scalars.str().find("\nmean_distance_ft.bus,300\n"), std::string::npos);

    std::ostringstream hist;
    write_metrics_histogram_csv(hist, m, 0);
    std::size_t rows = 0;
    std::string line;
    std::istringstream lines(hist.str());
    while (std::getline(lines, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 2 + kNumVehicleClasses * (m.histogram_edges_ft.size() - 1));

    std::ostringstream ranking;
    write_ranking_csv(ranking, {TuneResult{4, DetectorConfig{}, m}}, 0);
    EXPECT_NE(ranking.str().find("\n1,4,0.9999,0.8,1.5,1.15,5,2,1,0,"), std::string::npos) << ranking.str();
}
