#include "vfence/deterrent.hpp"

#include <algorithm>
#include <set>

namespace vfence {

const Sound& SoundPool::last() const
{
    if (!last_played) {
        throw InvalidArgument("no sound has been played yet");
    }
    return sounds.at(*last_played);
}

void validate(const SoundPool& pool)
{
    if (pool.sounds.empty()) {
        throw InvalidArgument("sound pool is empty");
    }
    std::set<std::string> ids;
    for (const auto& s : pool.sounds) {
        if (s.id.empty()) {
            throw InvalidArgument("sound id must not be empty");
        }
        if (!ids.insert(s.id).second) {
            throw InvalidArgument("duplicate sound id '" + s.id + "'");
        }
        if (!(s.duration_s > 0.0)) {
            throw InvalidArgument("sound '" + s.id + "' must have duration_s > 0");
        }
    }
}

SoundPool default_sound_pool()
{
    SoundPool pool;
    pool.sounds = {
        {"wolf_howl", "wolf_howl.wav", 4.0},
        {"coyote_yip", "coyote_yip.wav", 3.0},
        {"dog_bark", "dog_bark.wav", 2.5},
    };
    return pool;
}

void validate(const VisualConfig& v)
{
    if (!(v.wavelength_nm > 0.0)) {
        throw InvalidArgument("wavelength_nm must be > 0");
    }
    if (!(v.blink_hz > 0.0)) {
        throw InvalidArgument("blink_hz must be > 0");
    }
    if (v.duration_s && !(*v.duration_s > 0.0)) {
        throw InvalidArgument("visual duration_s must be > 0");
    }
}

std::size_t select_sound(SoundPool& pool, Rng& rng)
{
    if (pool.sounds.empty()) {
        throw InvalidArgument("cannot select from an empty sound pool");
    }
    const std::size_t n = pool.sounds.size();
    std::size_t pick;
    if (n == 1) {
        pick = 0;
    } else if (pool.no_repeat && pool.last_played) {
        // Draw from the n - 1 other sounds, skipping over the excluded index.
        pick = static_cast<std::size_t>(rng.below(n - 1));
        if (pick >= *pool.last_played) {
            ++pick;
        }
    } else {
        pick = static_cast<std::size_t>(rng.below(n));
    }
    pool.last_played = pick;
    return pick;
}

DeterrentEvent on_detection(const DetectionEvent& event, SoundPool& pool, const VisualConfig& visual,
                            Rng& rng)
{
    const Sound& sound = pool.sounds[select_sound(pool, rng)];
    return DeterrentEvent{event.t, sound.id, visual.wavelength_nm, visual.blink_hz,
                          visual.duration_s.value_or(sound.duration_s)};
}

DeterrentScheduler::DeterrentScheduler(SoundPool pool, VisualConfig visual, std::uint64_t seed)
    : pool_(std::move(pool)), visual_(visual), rng_(mix_seed(seed, streams::kSoundSelection))
{
    validate(pool_);
    validate(visual_);
}

void DeterrentScheduler::on_detection(const DetectionEvent& event)
{
    if (!log_.empty() && event.t < log_.back().end()) {
        auto& running = log_.back();
        const double extend_by = visual_.duration_s.value_or(pool_.last().duration_s);
        running.duration_s = std::max(running.end(), event.t + extend_by) - running.t;
        return;
    }
    log_.push_back(vfence::on_detection(event, pool_, visual_, rng_));
}

std::vector<DeterrentEvent> schedule_deterrents(std::span<const DetectionEvent> detections, SoundPool pool,
                                                const VisualConfig& visual, std::uint64_t seed)
{
    DeterrentScheduler scheduler(std::move(pool), visual, seed);
    for (const auto& d : detections) {
        scheduler.on_detection(d);
    }
    return scheduler.log();
}

}  // namespace vfence
