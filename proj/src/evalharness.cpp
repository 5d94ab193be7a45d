#include "vfence/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace vfence {

std::vector<GroundTruthPass> ground_truth(const ScenarioSpec& scenario)
{
    std::vector<GroundTruthPass> passes;
    passes.reserve(scenario.vehicles.size());
    for (std::size_t i = 0; i < scenario.vehicles.size(); ++i) {
        const auto& v = scenario.vehicles[i];
        GroundTruthPass p;
        p.vehicle_index = i;
        p.channel = v.direction;
        p.vehicle_class = v.vehicle_class;
        p.speed_fps = v.speed_fps();
        p.t_enter = v.entry_time_s;
        p.t_passby = v.passby_time();
        p.t_at_60ft = p.t_passby - kFailureDistanceFt / p.speed_fps;
        passes.push_back(p);
    }
    return passes;
}

TriggerLead trigger_lead(const DetectionEvent& event, const GroundTruthPass& pass)
{
    if (event.channel != pass.channel || !pass.in_window(event.t)) {
        throw InvalidArgument("detection at t=" + std::to_string(event.t) +
                              " is outside the approach window of vehicle " +
                              std::to_string(pass.vehicle_index));
    }
    const double lead = pass.t_passby - event.t;
    return {lead, pass.speed_fps * lead};
}

MatchResult match_detections(std::span<const DetectionEvent> events, std::span<const GroundTruthPass> passes)
{
    MatchResult result;
    std::vector<bool> matched(passes.size(), false);
    std::vector<bool> timely(passes.size(), false);

    for (const auto& ev : events) {
        std::optional<std::size_t> best;
        double best_distance = std::numeric_limits<double>::infinity();
        bool explained = false;
        for (std::size_t j = 0; j < passes.size(); ++j) {
            const auto& p = passes[j];
            if (p.channel != ev.channel || !p.explains(ev.t)) {
                continue;
            }
            explained = true;
            if (matched[j] || !p.in_window(ev.t)) {
                continue;
            }
            const double d = p.distance_at(ev.t);
            if (d < best_distance) {
                best_distance = d;
                best = j;
            }
        }

        if (best) {
            const auto& p = passes[*best];
            matched[*best] = true;
            const TriggerLead lead = trigger_lead(ev, p);
            if (lead.distance_ft >= kFailureDistanceFt) {
                timely[*best] = true;
                result.true_positives.push_back(
                    {p.vehicle_index, p.vehicle_class, ev, lead.distance_ft, lead.lead_time_s});
            } else {
                result.late.push_back({p.vehicle_index, ev, lead.distance_ft});
            }
        } else if (explained) {
            result.repeats.push_back(ev);
        } else {
            result.false_positives.push_back(ev);
        }
    }

    for (std::size_t j = 0; j < passes.size(); ++j) {
        if (!timely[j]) {
            result.false_negatives.push_back(passes[j].vehicle_index);
        }
    }
    return result;
}

std::size_t count_quiet_intervals(std::span<const GroundTruthPass> passes, double duration_s, double slice_s)
{
    if (!(slice_s > 0.0)) {
        throw InvalidArgument("quiet-interval slice must be > 0");
    }
    const auto slices = static_cast<std::size_t>(std::floor(duration_s / slice_s));
    std::size_t quiet = 0;
    for (int c = 0; c < kNumChannels; ++c) {
        for (std::size_t k = 0; k < slices; ++k) {
            const double lo = static_cast<double>(k) * slice_s;
            const double hi = lo + slice_s;
            const bool busy = std::any_of(passes.begin(), passes.end(), [&](const GroundTruthPass& p) {
                return channel_index(p.channel) == c && p.t_enter < hi && p.t_passby >= lo;
            });
            quiet += busy ? 0 : 1;
        }
    }
    return quiet;
}

std::vector<double> default_histogram_edges()
{
    std::vector<double> edges;
    for (int ft = 0; ft <= 600; ft += 60) {
        edges.push_back(ft);
    }
    return edges;
}

std::optional<double> ClassStats::mean_distance_ft() const
{
    if (count == 0) {
        return std::nullopt;
    }
    return sum_distance_ft / static_cast<double>(count);
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den)
{
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> MetricsReport::recall() const
{
    return ratio(true_positives, true_positives + false_negatives);
}

std::optional<double> MetricsReport::precision() const
{
    return ratio(true_positives, true_positives + false_positives);
}

std::optional<double> MetricsReport::false_positive_rate() const
{
    return ratio(false_positives, false_positives + quiet_intervals);
}

std::optional<double> MetricsReport::mean_trigger_time_s() const
{
    if (true_positives == 0) {
        return std::nullopt;
    }
    return sum_lead_time_s / static_cast<double>(true_positives);
}

std::optional<double> MetricsReport::mean_trigger_distance_ft() const
{
    if (true_positives == 0) {
        return std::nullopt;
    }
    return sum_distance_ft / static_cast<double>(true_positives);
}

std::size_t MetricsReport::histogram_total() const
{
    std::size_t total = 0;
    for (const auto& row : histogram) {
        for (auto n : row) {
            total += n;
        }
    }
    return total;
}

void validate_histogram_edges(std::span<const double> edges)
{
    if (edges.size() < 2) {
        throw InvalidArgument("histogram needs at least two bin edges");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw InvalidArgument("histogram bin edges must be strictly increasing");
        }
    }
}

MetricsReport compute_metrics(const MatchResult& match, std::span<const double> histogram_edges)
{
    validate_histogram_edges(histogram_edges);

    MetricsReport m;
    m.true_positives = match.true_positives.size();
    m.false_negatives = match.false_negatives.size();
    m.false_positives = match.false_positives.size();
    m.quiet_intervals = match.quiet_intervals;
    m.histogram_edges_ft.assign(histogram_edges.begin(), histogram_edges.end());
    const std::size_t bins = histogram_edges.size() - 1;
    for (auto& row : m.histogram) {
        row.assign(bins, 0);
    }

    for (const auto& tp : match.true_positives) {
        m.sum_lead_time_s += tp.trigger_lead_s;
        m.sum_distance_ft += tp.trigger_distance_ft;
        auto& cls = m.per_class[static_cast<std::size_t>(tp.vehicle_class)];
        ++cls.count;
        cls.sum_distance_ft += tp.trigger_distance_ft;

        const auto it = std::upper_bound(histogram_edges.begin(), histogram_edges.end(), tp.trigger_distance_ft);
        const auto raw = std::distance(histogram_edges.begin(), it) - 1;
        const auto bin = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(raw, 0, static_cast<std::ptrdiff_t>(bins) - 1));
        ++m.histogram[static_cast<std::size_t>(tp.vehicle_class)][bin];
    }
    return m;
}

MetricsReport merge(const MetricsReport& lhs, const MetricsReport& rhs)
{
    if (lhs.histogram_edges_ft != rhs.histogram_edges_ft) {
        throw InvalidArgument("cannot merge metrics with different histogram bin edges");
    }
    MetricsReport m = lhs;
    m.true_positives += rhs.true_positives;
    m.false_negatives += rhs.false_negatives;
    m.false_positives += rhs.false_positives;
    m.quiet_intervals += rhs.quiet_intervals;
    m.sum_lead_time_s += rhs.sum_lead_time_s;
    m.sum_distance_ft += rhs.sum_distance_ft;
    for (std::size_t c = 0; c < m.per_class.size(); ++c) {
        m.per_class[c].count += rhs.per_class[c].count;
        m.per_class[c].sum_distance_ft += rhs.per_class[c].sum_distance_ft;
        for (std::size_t b = 0; b < m.histogram[c].size(); ++b) {
            m.histogram[c][b] += rhs.histogram[c][b];
        }
    }
    return m;
}

ScenarioRun run_scenario(const ScenarioSpec& scenario, const DetectorConfig& config, const SoundPool& pool,
                         const VisualConfig& visual, std::uint64_t seed)
{
    validate(config);
    ScenarioRun run;
    run.trace = synthesize_trace(scenario, seed);
    run.detections = run_trace(run.trace, config);
    run.deterrents = schedule_deterrents(run.detections, pool, visual, seed);
    run.passes = ground_truth(scenario);
    return run;
}

ScenarioRun run_scenario(const ScenarioSpec& scenario, const DetectorConfig& config, const SoundPool& pool,
                         const VisualConfig& visual)
{
    return run_scenario(scenario, config, pool, visual, scenario.seed);
}

MatchResult evaluate(std::span<const DetectionEvent> detections, const ScenarioSpec& scenario,
                     const DetectorConfig& config)
{
    const auto passes = ground_truth(scenario);
    MatchResult match = match_detections(detections, passes);
    const double slice = std::max(config.holdoff_s, 1.0 / scenario.ambient.sample_rate_hz);
    match.quiet_intervals = count_quiet_intervals(passes, scenario.duration_s, slice);
    return match;
}

SuiteEvaluation evaluate_suite(std::span<const ScenarioSpec> suite, std::span<const Trace> traces,
                               const DetectorConfig& config, std::span<const double> histogram_edges)
{
    if (suite.size() != traces.size()) {
        throw InvalidArgument("evaluate_suite: one trace per scenario required");
    }
    SuiteEvaluation out;
    out.metrics = compute_metrics(MatchResult{}, histogram_edges);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto detections = run_trace(traces[i], config);
        out.matches.push_back(evaluate(detections, suite[i], config));
        out.metrics = merge(out.metrics, compute_metrics(out.matches.back(), histogram_edges));
    }
    return out;
}

SuiteEvaluation evaluate_suite(std::span<const ScenarioSpec> suite, const DetectorConfig& config,
                               std::span<const double> histogram_edges)
{
    std::vector<Trace> traces;
    traces.reserve(suite.size());
    for (const auto& s : suite) {
        traces.push_back(synthesize_trace(s));
    }
    return evaluate_suite(suite, traces, config, histogram_edges);
}

std::vector<DetectorConfig> ParamGrid::expand(const DetectorConfig& base) const
{
    auto axis = [](const std::optional<std::vector<double>>& values, double fallback) {
        return values ? *values : std::vector<double>{fallback};
    };
    const auto ab = axis(alpha_baseline, base.alpha_baseline);
    const auto ai = axis(alpha_instant, base.alpha_instant);
    const auto tr = axis(trigger_ratio, base.trigger_ratio);
    const auto ho = axis(holdoff_s, base.holdoff_s);

    const double release_fraction = (base.release_ratio - 1.0) / (base.trigger_ratio - 1.0);
    std::vector<DetectorConfig> out;
    for (double a : ab) {
        for (double b : ai) {
            for (double r : tr) {
                for (double h : ho) {
                    DetectorConfig c = base;
                    c.alpha_baseline = a;
                    c.alpha_instant = b;
                    c.trigger_ratio = r;
                    c.release_ratio = 1.0 + release_fraction * (r - 1.0);
                    c.holdoff_s = h;
                    out.push_back(c);
                }
            }
        }
    }
    return out;
}

ParamGrid default_param_grid()
{
    ParamGrid g;
    g.alpha_baseline = std::vector<double>{0.9995, 0.9998, 0.9999};
    g.alpha_instant = std::vector<double>{0.8, 0.85, 0.9};
    g.trigger_ratio = std::vector<double>{1.5, 2.0, 3.0};
    return g;
}

namespace {

bool ranks_before(const TuneResult& l, const TuneResult& r)
{
    const bool l_clean = l.metrics.false_positives == 0;
    const bool r_clean = r.metrics.false_positives == 0;
    if (l_clean != r_clean) {
        return l_clean;
    }
    const double l_recall = l.metrics.recall().value_or(-1.0);
    const double r_recall = r.metrics.recall().value_or(-1.0);
    if (l_recall != r_recall) {
        return l_recall > r_recall;
    }
    const double l_dist = l.metrics.mean_trigger_distance_ft().value_or(-1.0);
    const double r_dist = r.metrics.mean_trigger_distance_ft().value_or(-1.0);
    if (l_dist != r_dist) {
        return l_dist > r_dist;
    }
    return l.grid_index < r.grid_index;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace

std::vector<TuneResult> tune_parameters(const ParamGrid& grid, std::span<const ScenarioSpec> suite,
                                        const DetectorConfig& base, std::span<const double> histogram_edges,
                                        unsigned threads)
{
    const auto configs = grid.expand(base);
    if (configs.empty()) {
        throw InvalidArgument("parameter grid is empty");
    }
    if (suite.empty()) {
        throw InvalidArgument("scenario suite is empty");
    }
    for (std::size_t i = 0; i < configs.size(); ++i) {
        try {
            validate(configs[i]);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("grid point " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<Trace> traces(suite.size());
    parallel_for(suite.size(), threads, [&](std::size_t i) { traces[i] = synthesize_trace(suite[i]); });

    std::vector<TuneResult> results(configs.size());
    parallel_for(configs.size(), threads, [&](std::size_t i) {
        results[i] = TuneResult{i, configs[i], evaluate_suite(suite, traces, configs[i], histogram_edges).metrics};
    });

    std::sort(results.begin(), results.end(), ranks_before);
    return results;
}

}  // namespace vfence
