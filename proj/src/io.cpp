#include "vfence/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace vfence {

std::string format_decimal(double value)
{
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (res.ec != std::errc{}) {
        throw InvalidArgument("cannot format value");
    }
    return std::string(buf, res.ptr);
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), "cannot open file");
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), std::string("malformed JSON (") + e.what() + ")");
    }
}

namespace {

/// Field access on one JSON object with the path kept for error messages.
/// Keys that are never read are reported as unknown by finish().
class Fields {
public:
    Fields(const Json& doc, std::string where, std::string path)
        : doc_(doc), where_(std::move(where)), path_(std::move(path))
    {
        if (!doc_.is_object()) {
            fail("", "expected an object");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ParseError(where_, location(key) + ": " + what);
    }

    std::string location(const std::string& key) const
    {
        if (key.empty()) {
            return path_.empty() ? "<root>" : path_;
        }
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    const Json& raw(const std::string& key)
    {
        used_.insert(key);
        if (!doc_.contains(key)) {
            fail(key, "missing required field");
        }
        return doc_.at(key);
    }

    double number(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_number()) {
            fail(key, "expected a number");
        }
        return v.get<double>();
    }

    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_number_integer()) {
            fail(key, "expected an integer");
        }
        return v.get<std::int64_t>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(key, "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = raw(key);
        if (!v.is_boolean()) {
            fail(key, "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_string()) {
            fail(key, "expected a string");
        }
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_array()) {
            fail(key, "expected an array of numbers");
        }
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) {
                fail(key, "expected an array of numbers");
            }
            out.push_back(x.get<double>());
        }
        return out;
    }

    const Json& array(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_array()) {
            fail(key, "expected an array");
        }
        return v;
    }

    Fields object(const std::string& key)
    {
        const Json& v = raw(key);
        return Fields(v, where_, location(key));
    }

    void finish() const
    {
        for (const auto& item : doc_.items()) {
            if (!used_.contains(item.key())) {
                fail(item.key(), "unknown field");
            }
        }
    }

    /// Runs a domain validator and reports its failure at this object's path.
    template <class Fn>
    void check(Fn&& fn) const
    {
        try {
            fn();
        } catch (const InvalidArgument& e) {
            fail("", e.what());
        }
    }

    const std::string& where() const { return where_; }

private:
    const Json& doc_;
    std::string where_;
    std::string path_;
    std::set<std::string> used_;
};

std::string element_path(const Fields& parent, const std::string& key, std::size_t i)
{
    return parent.location(key) + "[" + std::to_string(i) + "]";
}

Channel direction_from_string(std::string_view s)
{
    if (s == "a" || s == "toward_channel_a") {
        return Channel::a;
    }
    if (s == "b" || s == "toward_channel_b") {
        return Channel::b;
    }
    throw InvalidArgument("direction must be one of a, b, toward_channel_a, toward_channel_b");
}

VehicleSpec vehicle_from_json(Fields& f)
{
    VehicleClass cls;
    try {
        cls = vehicle_class_from_string(f.string("class"));
    } catch (const InvalidArgument& e) {
        f.fail("class", e.what());
    }
    VehicleSpec v = default_vehicle(cls);
    v.luminous_intensity_cd = f.number("luminous_intensity_cd", v.luminous_intensity_cd);
    v.headlight_height_ft = f.number("headlight_height_ft", v.headlight_height_ft);
    v.beam_half_angle_deg = f.number("beam_half_angle_deg", v.beam_half_angle_deg);
    v.beam_falloff_exponent = f.number("beam_falloff_exponent", v.beam_falloff_exponent);
    v.speed_mph = f.number("speed_mph", v.speed_mph);
    v.lane_index = static_cast<int>(f.integer("lane", 0));
    try {
        v.direction = direction_from_string(f.has("direction") ? f.string("direction") : "a");
    } catch (const InvalidArgument& e) {
        f.fail("direction", e.what());
    }
    v.entry_time_s = f.number("entry_time_s", 0.0);
    v.entry_distance_ft = f.number("entry_distance_ft", v.entry_distance_ft);
    f.finish();

    // Report the first offending field by name.
    if (!(v.speed_mph > 0.0)) f.fail("speed_mph", "must be > 0");
    if (!(v.luminous_intensity_cd > 0.0)) f.fail("luminous_intensity_cd", "must be > 0");
    if (!(v.beam_half_angle_deg > 0.0 && v.beam_half_angle_deg < 90.0)) f.fail("beam_half_angle_deg", "must be in (0, 90)");
    if (!(v.entry_distance_ft > 0.0)) f.fail("entry_distance_ft", "must be > 0");
    if (!(v.entry_time_s >= 0.0)) f.fail("entry_time_s", "must be >= 0");
    f.check([&] { validate(v); });
    return v;
}

}  // namespace

ScenarioSpec scenario_from_json(const Json& doc, const std::string& where)
{
    Fields root(doc, where, "");
    ScenarioSpec s;

    if (root.has("geometry")) {
        Fields g = root.object("geometry");
        s.geometry.num_lanes = static_cast<int>(g.integer("num_lanes", s.geometry.num_lanes));
        s.geometry.lane_width_ft = g.number("lane_width_ft", s.geometry.lane_width_ft);
        s.geometry.divider_height_ft = g.number("divider_height_ft", s.geometry.divider_height_ft);
        s.geometry.divider_position = static_cast<int>(g.integer("divider_position", s.geometry.divider_position));
        s.geometry.device_lateral_offset_ft = g.number("device_lateral_offset_ft", s.geometry.device_lateral_offset_ft);
        s.geometry.device_height_ft = g.number("device_height_ft", s.geometry.device_height_ft);
        g.finish();
        g.check([&] { validate(s.geometry); });
    }

    if (root.has("ambient")) {
        Fields a = root.object("ambient");
        s.ambient.base_night_lux = a.number("base_night_lux", s.ambient.base_night_lux);
        s.ambient.streetlight_lux = a.number("streetlight_lux", s.ambient.streetlight_lux);
        s.ambient.noise_sigma = a.number("noise_sigma", s.ambient.noise_sigma);
        s.ambient.sample_rate_hz = a.number("sample_rate_hz", s.ambient.sample_rate_hz);
        a.finish();
        a.check([&] { validate(s.ambient); });
    }

    if (root.has("vehicles")) {
        const Json& list = root.array("vehicles");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Fields vf(list[i], where, element_path(root, "vehicles", i));
            s.vehicles.push_back(vehicle_from_json(vf));
        }
    }

    s.duration_s = root.number("duration_s");
    s.seed = root.seed("seed", 0);
    root.finish();
    root.check([&] { validate(s); });
    return s;
}

Json to_json(const ScenarioSpec& s)
{
    Json doc;
    doc["geometry"] = {
        {"num_lanes", s.geometry.num_lanes},
        {"lane_width_ft", s.geometry.lane_width_ft},
        {"divider_height_ft", s.geometry.divider_height_ft},
        {"divider_position", s.geometry.divider_position},
        {"device_lateral_offset_ft", s.geometry.device_lateral_offset_ft},
        {"device_height_ft", s.geometry.device_height_ft},
    };
    doc["ambient"] = {
        {"base_night_lux", s.ambient.base_night_lux},
        {"streetlight_lux", s.ambient.streetlight_lux},
        {"noise_sigma", s.ambient.noise_sigma},
        {"sample_rate_hz", s.ambient.sample_rate_hz},
    };
    Json vehicles = Json::array();
    for (const auto& v : s.vehicles) {
        vehicles.push_back({
            {"class", to_string(v.vehicle_class)},
            {"luminous_intensity_cd", v.luminous_intensity_cd},
            {"headlight_height_ft", v.headlight_height_ft},
            {"beam_half_angle_deg", v.beam_half_angle_deg},
            {"beam_falloff_exponent", v.beam_falloff_exponent},
            {"speed_mph", v.speed_mph},
            {"lane", v.lane_index},
            {"direction", to_string(v.direction)},
            {"entry_time_s", v.entry_time_s},
            {"entry_distance_ft", v.entry_distance_ft},
        });
    }
    doc["vehicles"] = std::move(vehicles);
    doc["duration_s"] = s.duration_s;
    doc["seed"] = s.seed;
    return doc;
}

namespace {

DetectorConfig detector_from_fields(Fields& f)
{
    DetectorConfig c;
    c.alpha_baseline = f.number("alpha_baseline", c.alpha_baseline);
    c.alpha_instant = f.number("alpha_instant", c.alpha_instant);
    c.trigger_ratio = f.number("trigger_ratio", c.trigger_ratio);
    c.release_ratio = f.number("release_ratio", c.release_ratio);
    c.sensor_min_lux = f.number("sensor_min_lux", c.sensor_min_lux);
    c.sensor_max_lux = f.number("sensor_max_lux", c.sensor_max_lux);
    c.holdoff_s = f.number("holdoff_s", c.holdoff_s);
    c.max_continuous_active_s = f.number("max_continuous_active_s", c.max_continuous_active_s);
    c.clamp_enabled = f.boolean("clamp_enabled", c.clamp_enabled);
    f.finish();
    f.check([&] { validate(c); });
    return c;
}

SoundPool sound_pool_from_fields(Fields& f, const std::string& key)
{
    SoundPool pool;
    const Json& list = f.array(key);
    for (std::size_t i = 0; i < list.size(); ++i) {
        Fields sf(list[i], f.where(), element_path(f, key, i));
        Sound s;
        s.id = sf.string("id");
        s.file = sf.has("file") ? sf.string("file") : s.id;
        s.duration_s = sf.number("duration_s");
        sf.finish();
        pool.sounds.push_back(std::move(s));
    }
    f.check([&] { validate(pool); });
    return pool;
}

}  // namespace

DetectorConfig detector_config_from_json(const Json& doc, const std::string& where)
{
    Fields f(doc, where, "");
    return detector_from_fields(f);
}

Json to_json(const DetectorConfig& c)
{
    return {
        {"alpha_baseline", c.alpha_baseline},
        {"alpha_instant", c.alpha_instant},
        {"trigger_ratio", c.trigger_ratio},
        {"release_ratio", c.release_ratio},
        {"sensor_min_lux", c.sensor_min_lux},
        {"sensor_max_lux", c.sensor_max_lux},
        {"holdoff_s", c.holdoff_s},
        {"max_continuous_active_s", c.max_continuous_active_s},
        {"clamp_enabled", c.clamp_enabled},
    };
}

SoundPool sound_pool_from_json(const Json& doc, const std::string& where)
{
    Fields f(doc, where, "");
    SoundPool pool = sound_pool_from_fields(f, "sounds");
    f.finish();
    return pool;
}

Json to_json(const SoundPool& pool)
{
    Json list = Json::array();
    for (const auto& s : pool.sounds) {
        list.push_back({{"id", s.id}, {"file", s.file}, {"duration_s", s.duration_s}});
    }
    return {{"sounds", std::move(list)}};
}

RunConfig run_config_from_json(const Json& doc, const std::string& where, const std::filesystem::path& base_dir)
{
    Fields root(doc, where, "");
    RunConfig rc;
    if (root.has("detector")) {
        Fields d = root.object("detector");
        rc.detector = detector_from_fields(d);
    }
    if (root.has("deterrent")) {
        Fields d = root.object("deterrent");
        if (d.has("sounds") && d.has("manifest")) {
            d.fail("manifest", "give either sounds or manifest, not both");
        }
        if (d.has("sounds")) {
            rc.pool = sound_pool_from_fields(d, "sounds");
        } else if (d.has("manifest")) {
            const auto path = base_dir / d.string("manifest");
            rc.pool = sound_pool_from_json(read_json_file(path), path.string());
        }
        rc.pool.no_repeat = d.boolean("no_repeat", true);
        if (d.has("visual")) {
            Fields v = d.object("visual");
            rc.visual.wavelength_nm = v.number("wavelength_nm", rc.visual.wavelength_nm);
            rc.visual.blink_hz = v.number("blink_hz", rc.visual.blink_hz);
            if (v.has("duration_s")) {
                rc.visual.duration_s = v.number("duration_s");
            }
            v.finish();
            v.check([&] { validate(rc.visual); });
        }
        d.finish();
    }
    if (root.has("histogram_edges_ft")) {
        rc.histogram_edges_ft = root.numbers("histogram_edges_ft");
        try {
            validate_histogram_edges(rc.histogram_edges_ft);
        } catch (const InvalidArgument& e) {
            root.fail("histogram_edges_ft", e.what());
        }
    }
    root.finish();
    return rc;
}

Json to_json(const RunConfig& rc)
{
    Json visual = {{"wavelength_nm", rc.visual.wavelength_nm}, {"blink_hz", rc.visual.blink_hz}};
    if (rc.visual.duration_s) {
        visual["duration_s"] = *rc.visual.duration_s;
    }
    Json deterrent = {{"no_repeat", rc.pool.no_repeat}, {"sounds", to_json(rc.pool)["sounds"]}, {"visual", visual}};
    return {
        {"detector", to_json(rc.detector)},
        {"deterrent", std::move(deterrent)},
        {"histogram_edges_ft", rc.histogram_edges_ft},
    };
}

void apply_override(Json& doc, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ParseError("--set", "expected key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));

    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }

    Json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ParseError("--set", "empty path segment in '" + key + "'");
        }
        if (!node->is_object()) {
            if (!node->is_null()) {
                throw ParseError("--set", "'" + key + "' descends into a non-object value");
            }
            *node = Json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    *node = std::move(value);
}

ParamGrid param_grid_from_json(const Json& doc, const std::string& where)
{
    Fields f(doc, where, "");
    ParamGrid g;
    auto axis = [&](const char* key, std::optional<std::vector<double>>& out) {
        if (f.has(key)) {
            out = f.numbers(key);
            if (out->empty()) {
                f.fail(key, "parameter grid axis is empty");
            }
        }
    };
    axis("alpha_baseline", g.alpha_baseline);
    axis("alpha_instant", g.alpha_instant);
    axis("trigger_ratio", g.trigger_ratio);
    axis("holdoff_s", g.holdoff_s);
    f.finish();
    if (!g.alpha_baseline && !g.alpha_instant && !g.trigger_ratio && !g.holdoff_s) {
        f.fail("", "parameter grid is empty");
    }
    return g;
}

Json to_json(const ParamGrid& g)
{
    Json doc = Json::object();
    auto put = [&](const char* key, const std::optional<std::vector<double>>& axis) {
        if (axis) {
            doc[key] = *axis;
        }
    };
    put("alpha_baseline", g.alpha_baseline);
    put("alpha_instant", g.alpha_instant);
    put("trigger_ratio", g.trigger_ratio);
    put("holdoff_s", g.holdoff_s);
    return doc;
}

std::vector<SuiteScenario> suite_from_json(const Json& doc, const std::string& where,
                                           const std::filesystem::path& base_dir)
{
    Fields root(doc, where, "");
    const Json& list = root.array("scenarios");
    std::vector<SuiteScenario> suite;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Fields f(list[i], where, element_path(root, "scenarios", i));
        SuiteScenario s;
        s.name = f.has("name") ? f.string("name") : "scenario_" + std::to_string(i);
        if (f.has("path") == f.has("scenario")) {
            f.fail("", "give exactly one of path or scenario");
        }
        if (f.has("path")) {
            const auto path = base_dir / f.string("path");
            s.spec = scenario_from_json(read_json_file(path), path.string());
        } else {
            s.spec = scenario_from_json(f.raw("scenario"), where + ": " + f.location("scenario"));
        }
        f.finish();
        suite.push_back(std::move(s));
    }
    root.finish();
    if (suite.empty()) {
        root.fail("scenarios", "scenario suite is empty");
    }
    return suite;
}

Json to_json(const std::vector<SuiteScenario>& suite)
{
    Json list = Json::array();
    for (const auto& s : suite) {
        list.push_back({{"name", s.name}, {"scenario", to_json(s.spec)}});
    }
    return {{"scenarios", std::move(list)}};
}

namespace {

Json optional_number(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const MetricsReport& m)
{
    Json per_class = Json::object();
    Json hist = Json::object();
    for (int c = 0; c < kNumVehicleClasses; ++c) {
        const auto cls = static_cast<VehicleClass>(c);
        const auto& stats = m.per_class[static_cast<std::size_t>(c)];
        per_class[std::string(to_string(cls))] = {
            {"count", stats.count},
            {"sum_distance_ft", stats.sum_distance_ft},
            {"mean_distance_ft", optional_number(stats.mean_distance_ft())},
        };
        hist[std::string(to_string(cls))] = m.histogram[static_cast<std::size_t>(c)];
    }
    return {
        {"schema", kMetricsSchema},
        {"counts",
         {{"true_positives", m.true_positives},
          {"false_negatives", m.false_negatives},
          {"false_positives", m.false_positives},
          {"quiet_intervals", m.quiet_intervals}}},
        {"recall", optional_number(m.recall())},
        {"precision", optional_number(m.precision())},
        {"false_positive_rate", optional_number(m.false_positive_rate())},
        {"mean_trigger_time_s", optional_number(m.mean_trigger_time_s())},
        {"mean_trigger_distance_ft", optional_number(m.mean_trigger_distance_ft())},
        {"sum_lead_time_s", m.sum_lead_time_s},
        {"sum_distance_ft", m.sum_distance_ft},
        {"per_class", std::move(per_class)},
        {"histogram", {{"bin_edges_ft", m.histogram_edges_ft}, {"counts", std::move(hist)}}},
    };
}

MetricsReport metrics_from_json(const Json& doc, const std::string& where)
{
    Fields root(doc, where, "");
    if (root.string("schema") != kMetricsSchema) {
        root.fail("schema", "expected '" + std::string(kMetricsSchema) + "'");
    }
    MetricsReport m;
    {
        Fields c = root.object("counts");
        auto count = [&](const char* key) {
            const auto v = c.integer(key);
            if (v < 0) {
                c.fail(key, "must be >= 0");
            }
            return static_cast<std::size_t>(v);
        };
        m.true_positives = count("true_positives");
        m.false_negatives = count("false_negatives");
        m.false_positives = count("false_positives");
        m.quiet_intervals = count("quiet_intervals");
        c.finish();
    }
    // Derived fields are recomputed from counts and sums.
    for (const char* key : {"recall", "precision", "false_positive_rate", "mean_trigger_time_s",
                            "mean_trigger_distance_ft"}) {
        if (root.has(key)) {
            root.raw(key);
        }
    }
    m.sum_lead_time_s = root.number("sum_lead_time_s");
    m.sum_distance_ft = root.number("sum_distance_ft");

    Fields hist = root.object("histogram");
    m.histogram_edges_ft = hist.numbers("bin_edges_ft");
    try {
        validate_histogram_edges(m.histogram_edges_ft);
    } catch (const InvalidArgument& e) {
        hist.fail("bin_edges_ft", e.what());
    }
    const std::size_t bins = m.histogram_edges_ft.size() - 1;

    Fields counts = hist.object("counts");
    Fields per_class = root.object("per_class");
    for (int c = 0; c < kNumVehicleClasses; ++c) {
        const std::string name(to_string(static_cast<VehicleClass>(c)));
        const auto idx = static_cast<std::size_t>(c);
        const auto row = counts.numbers(name);
        if (row.size() != bins) {
            counts.fail(name, "expected " + std::to_string(bins) + " bin counts");
        }
        for (double x : row) {
            if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
                counts.fail(name, "bin counts must be nonnegative integers");
            }
            m.histogram[idx].push_back(static_cast<std::size_t>(x));
        }
        Fields pc = per_class.object(name);
        m.per_class[idx].count = static_cast<std::size_t>(pc.integer("count"));
        m.per_class[idx].sum_distance_ft = pc.number("sum_distance_ft");
        if (pc.has("mean_distance_ft")) {
            pc.raw("mean_distance_ft");
        }
        pc.finish();
    }
    counts.finish();
    per_class.finish();
    hist.finish();
    root.finish();
    return m;
}

std::string provenance_line(std::uint64_t seed)
{
    return "# seed=" + std::to_string(seed) + " version=" + std::string(kVersion);
}

void write_trace_csv(std::ostream& out, const Trace& trace, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n' << "t_s,channel,lux\n";
    for (const auto& s : trace) {
        out << format_decimal(s.t) << ',' << to_string(s.channel) << ',' << format_decimal(s.lux) << '\n';
    }
}

namespace {

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

double parse_double(const std::string& cell, const std::string& where, std::size_t line_no, const char* column)
{
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
        throw ParseError(where, "line " + std::to_string(line_no) + ": column " + column + ": '" + cell +
                                    "' is not a number");
    }
    return v;
}

/// Reads the optional provenance comment and the header row. Returns the
/// seed from the comment, if any, and leaves `line_no` at the header.
std::optional<std::uint64_t> read_preamble(std::istream& in, const std::string& where, std::string_view header,
                                           std::size_t& line_no)
{
    std::string line;
    std::optional<std::uint64_t> seed;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.rfind("#", 0) == 0) {
            const auto pos = line.find("seed=");
            if (pos != std::string::npos) {
                std::uint64_t v = 0;
                const char* first = line.data() + pos + 5;
                const auto res = std::from_chars(first, line.data() + line.size(), v);
                if (res.ec == std::errc{}) {
                    seed = v;
                }
            }
            continue;
        }
        if (line != header) {
            throw ParseError(where, "line " + std::to_string(line_no) + ": expected header '" +
                                        std::string(header) + "'");
        }
        return seed;
    }
    throw ParseError(where, "missing header '" + std::string(header) + "'");
}

}  // namespace

LoadedTrace read_trace_csv(std::istream& in, const std::string& where)
{
    std::size_t line_no = 0;
    LoadedTrace loaded;
    loaded.seed = read_preamble(in, where, "t_s,channel,lux", line_no);

    std::array<std::optional<double>, kNumChannels> last_t;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split_row(line);
        const std::string row = "line " + std::to_string(line_no);
        if (cells.size() != 3) {
            throw ParseError(where, row + ": expected 3 columns, found " + std::to_string(cells.size()));
        }
        TraceSample s;
        s.t = parse_double(cells[0], where, line_no, "t_s");
        try {
            s.channel = channel_from_string(cells[1]);
        } catch (const InvalidArgument& e) {
            throw ParseError(where, row + ": column channel: " + e.what());
        }
        s.lux = parse_double(cells[2], where, line_no, "lux");
        if (s.lux < 0.0) {
            throw ParseError(where, row + ": column lux: negative illuminance");
        }
        auto& prev = last_t[channel_index(s.channel)];
        if (prev && s.t < *prev) {
            throw ParseError(where, row + ": timestamp " + cells[0] + " precedes the previous sample on channel " +
                                        cells[1]);
        }
        prev = s.t;
        loaded.trace.push_back(s);
    }
    return loaded;
}

void write_detections_csv(std::ostream& out, const std::vector<DetectionEvent>& events, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n' << "t_s,channel,ratio,instant_lux,baseline_lux\n";
    for (const auto& e : events) {
        out << format_decimal(e.t) << ',' << to_string(e.channel) << ',' << format_decimal(e.ratio_at_trigger) << ','
            << format_decimal(e.instant_lux) << ',' << format_decimal(e.baseline_lux) << '\n';
    }
}

std::vector<DetectionEvent> read_detections_csv(std::istream& in, const std::string& where)
{
    std::size_t line_no = 0;
    read_preamble(in, where, "t_s,channel,ratio,instant_lux,baseline_lux", line_no);
    std::vector<DetectionEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split_row(line);
        if (cells.size() != 5) {
            throw ParseError(where, "line " + std::to_string(line_no) + ": expected 5 columns");
        }
        DetectionEvent e;
        e.t = parse_double(cells[0], where, line_no, "t_s");
        try {
            e.channel = channel_from_string(cells[1]);
        } catch (const InvalidArgument& ex) {
            throw ParseError(where, "line " + std::to_string(line_no) + ": " + ex.what());
        }
        e.ratio_at_trigger = parse_double(cells[2], where, line_no, "ratio");
        e.instant_lux = parse_double(cells[3], where, line_no, "instant_lux");
        e.baseline_lux = parse_double(cells[4], where, line_no, "baseline_lux");
        events.push_back(e);
    }
    return events;
}

void write_deterrents_csv(std::ostream& out, const std::vector<DeterrentEvent>& events, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n' << "t_s,sound_id,wavelength_nm,blink_hz,duration_s\n";
    for (const auto& e : events) {
        out << format_decimal(e.t) << ',' << e.sound_id << ',' << format_decimal(e.wavelength_nm) << ','
            << format_decimal(e.blink_hz) << ',' << format_decimal(e.duration_s) << '\n';
    }
}

namespace {

std::string optional_cell(const std::optional<double>& v)
{
    return v ? format_decimal(*v) : std::string();
}

}  // namespace

void write_metrics_scalars_csv(std::ostream& out, const MetricsReport& m, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n' << "metric,value\n";
    out << "true_positives," << m.true_positives << '\n';
    out << "false_negatives," << m.false_negatives << '\n';
    out << "false_positives," << m.false_positives << '\n';
    out << "quiet_intervals," << m.quiet_intervals << '\n';
    out << "recall," << optional_cell(m.recall()) << '\n';
    out << "precision," << optional_cell(m.precision()) << '\n';
    out << "false_positive_rate," << optional_cell(m.false_positive_rate()) << '\n';
    out << "mean_trigger_time_s," << optional_cell(m.mean_trigger_time_s()) << '\n';
    out << "mean_trigger_distance_ft," << optional_cell(m.mean_trigger_distance_ft()) << '\n';
    for (int c = 0; c < kNumVehicleClasses; ++c) {
        out << "mean_distance_ft." << to_string(static_cast<VehicleClass>(c)) << ','
            << optional_cell(m.per_class[static_cast<std::size_t>(c)].mean_distance_ft()) << '\n';
    }
}

void write_metrics_histogram_csv(std::ostream& out, const MetricsReport& m, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n' << "class,bin_low_ft,bin_high_ft,count\n";
    for (int c = 0; c < kNumVehicleClasses; ++c) {
        const auto& row = m.histogram[static_cast<std::size_t>(c)];
        for (std::size_t b = 0; b < row.size(); ++b) {
            out << to_string(static_cast<VehicleClass>(c)) << ',' << format_decimal(m.histogram_edges_ft[b]) << ','
                << format_decimal(m.histogram_edges_ft[b + 1]) << ',' << row[b] << '\n';
        }
    }
}

void write_ranking_csv(std::ostream& out, const std::vector<TuneResult>& ranking, std::uint64_t seed)
{
    out << provenance_line(seed) << '\n'
        << "rank,grid_index,alpha_baseline,alpha_instant,trigger_ratio,release_ratio,holdoff_s,"
           "true_positives,false_negatives,false_positives,recall,precision,false_positive_rate,"
           "mean_trigger_distance_ft\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const auto& r = ranking[i];
        out << i + 1 << ',' << r.grid_index << ',' << format_decimal(r.config.alpha_baseline) << ','
            << format_decimal(r.config.alpha_instant) << ',' << format_decimal(r.config.trigger_ratio) << ','
            << format_decimal(r.config.release_ratio) << ',' << format_decimal(r.config.holdoff_s) << ','
            << r.metrics.true_positives << ',' << r.metrics.false_negatives << ',' << r.metrics.false_positives
            << ',' << optional_cell(r.metrics.recall()) << ',' << optional_cell(r.metrics.precision()) << ','
            << optional_cell(r.metrics.false_positive_rate()) << ','
            << optional_cell(r.metrics.mean_trigger_distance_ft()) << '\n';
    }
}

}  // namespace vfence
