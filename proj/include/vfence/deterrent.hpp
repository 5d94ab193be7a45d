#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfence/detector.hpp"
#include "vfence/rng.hpp"

namespace vfence {

struct Sound {
    std::string id;
    std::string file;
    double duration_s = 0.0;

    friend bool operator==(const Sound&, const Sound&) = default;
};

/// Sounds available to the deterrent. With `no_repeat` set, the sound that
/// just played is excluded from the next draw.
struct SoundPool {
    std::vector<Sound> sounds;
    std::optional<std::size_t> last_played;
    bool no_repeat = true;

    const Sound& last() const;
};

/// Throws InvalidArgument when empty, ids repeat or a duration is not positive.
void validate(const SoundPool& pool);

/// Three natural-call clips; used when a config names no manifest.
SoundPool default_sound_pool();

struct VisualConfig {
    double wavelength_nm = 520.0;
    double blink_hz = 2.0;
    /// Absent: the light blinks for as long as the selected sound plays.
    std::optional<double> duration_s;
};

constexpr double kDeerSensitivityLowNm = 450.0;
constexpr double kDeerSensitivityHighNm = 542.0;

void validate(const VisualConfig& visual);

struct DeterrentEvent {
    double t = 0.0;
    std::string sound_id;
    double wavelength_nm = 0.0;
    double blink_hz = 0.0;
    double duration_s = 0.0;

    double end() const { return t + duration_s; }

    friend bool operator==(const DeterrentEvent&, const DeterrentEvent&) = default;
};

/// Uniform over the pool, or over the pool minus the last sound played when
/// no_repeat is set and the pool has more than one entry. Returns the index
/// into pool.sounds and records it as last_played.
std::size_t select_sound(SoundPool& pool, Rng& rng);

DeterrentEvent on_detection(const DetectionEvent& event, SoundPool& pool, const VisualConfig& visual,
                            Rng& rng);

/// Turns a detection stream into the deterrent log. A detection arriving
/// while a deterrent is still running extends that deterrent instead of
/// starting a new one.
class DeterrentScheduler {
public:
    DeterrentScheduler(SoundPool pool, VisualConfig visual, std::uint64_t seed);

    void on_detection(const DetectionEvent& event);

    const std::vector<DeterrentEvent>& log() const { return log_; }
    const SoundPool& pool() const { return pool_; }

private:
    SoundPool pool_;
    VisualConfig visual_;
    Rng rng_;
    std::vector<DeterrentEvent> log_;
};

std::vector<DeterrentEvent> schedule_deterrents(std::span<const DetectionEvent> detections, SoundPool pool,
                                                const VisualConfig& visual, std::uint64_t seed);

}  // namespace vfence
