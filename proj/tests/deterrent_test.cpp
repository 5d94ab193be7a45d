#include "vfence/deterrent.hpp"

#include <gtest/gtest.h>

#include <array>
#include <set>

using namespace vfence;

namespace {

SoundPool pool_of(int n)
{
    SoundPool pool;
    for (int i = 0; i < n; ++i) {
        pool.sounds.push_back({"s" + std::to_string(i), "s" + std::to_string(i) + ".wav", 1.0 + i});
    }
    return pool;
}

DetectionEvent detection_at(double t, Channel c = Channel::a)
{
    return DetectionEvent{t, c, 3.0, 0.3, 0.1};
}

}  // namespace

TEST(SelectSound, SingletonAlwaysReturnsIt)
{
    SoundPool pool;
    pool.sounds = {{"wolf_howl", "wolf_howl.wav", 4.0}};
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(select_sound(pool, rng), 0u);
        EXPECT_EQ(pool.last().id, "wolf_howl");
    }
}

TEST(SelectSound, NeverRepeatsConsecutively)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SoundPool pool = pool_of(3);
        Rng rng(seed);
        std::size_t prev = select_sound(pool, rng);
        for (int i = 0; i < 10000; ++i) {
            const std::size_t next = select_sound(pool, rng);
            ASSERT_NE(next, prev);
            ASSERT_EQ(pool.last_played, next);
            prev = next;
        }
    }
}

TEST(SelectSound, ConditionallyUniform)
{
    SoundPool pool = pool_of(4);
    Rng rng(20211);
    std::array<std::array<int, 4>, 4> counts{};
    std::size_t prev = select_sound(pool, rng);
    for (int i = 0; i < 100000; ++i) {
        const std::size_t next = select_sound(pool, rng);
        ++counts[prev][next];
        prev = next;
    }
    for (std::size_t p = 0; p < 4; ++p) {
        int total = 0;
        for (int c : counts[p]) {
            total += c;
        }
        ASSERT_GT(total, 0);
        EXPECT_EQ(counts[p][p], 0);
        for (std::size_t n = 0; n < 4; ++n) {
            if (n != p) {
                EXPECT_NEAR(static_cast<double>(counts[p][n]) / total, 1.0 / 3.0, 0.01) << p << "->" << n;
            }
        }
    }
}

TEST(SelectSound, RepeatsAllowedWhenToggledOff)
{
    SoundPool pool = pool_of(2);
    pool.no_repeat = false;
    Rng rng(9);
    std::size_t prev = select_sound(pool, rng);
    int repeats = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t next = select_sound(pool, rng);
        repeats += next == prev ? 1 : 0;
        prev = next;
    }
    EXPECT_GT(repeats, 400);
    EXPECT_LT(repeats, 600);
}

TEST(SelectSound, EmptyPoolRejected)
{
    SoundPool pool;
    Rng rng(1);
    EXPECT_THROW(select_sound(pool, rng), InvalidArgument);
    EXPECT_THROW(on_detection(detection_at(1.0), pool, VisualConfig{}, rng), InvalidArgument);
    EXPECT_THROW(validate(pool), InvalidArgument);
}

TEST(SoundPoolValidation, RejectsDuplicatesAndBadDurations)
{
    SoundPool pool = pool_of(2);
    EXPECT_NO_THROW(validate(pool));
    pool.sounds[1].id = pool.sounds[0].id;
    EXPECT_THROW(validate(pool), InvalidArgument);
    pool = pool_of(2);
    pool.sounds[0].duration_s = 0.0;
    EXPECT_THROW(validate(pool), InvalidArgument);
}

TEST(OnDetection, PassesTimestampAndVisualThrough)
{
    SoundPool pool = default_sound_pool();
    Rng rng(3);
    const VisualConfig visual;
    const DeterrentEvent ev = on_detection(detection_at(12.5), pool, visual, rng);
    EXPECT_EQ(ev.t, 12.5);
    EXPECT_EQ(ev.wavelength_nm, 520.0);
    EXPECT_GE(ev.wavelength_nm, kDeerSensitivityLowNm);
    EXPECT_LE(ev.wavelength_nm, kDeerSensitivityHighNm);
    EXPECT_EQ(ev.blink_hz, 2.0);
    EXPECT_EQ(ev.sound_id, pool.last().id);
    EXPECT_EQ(ev.duration_s, pool.last().duration_s);
}

TEST(OnDetection, VisualDurationOverridesSound)
{
    SoundPool pool = default_sound_pool();
    Rng rng(3);
    VisualConfig visual;
    visual.duration_s = 9.0;
    EXPECT_EQ(on_detection(detection_at(1.0), pool, visual, rng).duration_s, 9.0);
}

TEST(OnDetection, SameSeedSameSounds)
{
    const std::vector<DetectionEvent> d = {detection_at(1.0), detection_at(20.0), detection_at(40.0),
                                           detection_at(60.0, Channel::b)};
    const auto first = schedule_deterrents(d, pool_of(4), VisualConfig{}, 77);
    EXPECT_EQ(first, schedule_deterrents(d, pool_of(4), VisualConfig{}, 77));
    ASSERT_EQ(first.size(), d.size());
    std::set<std::string> ids;
    for (const auto& s : pool_of(4).sounds) {
        ids.insert(s.id);
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
        EXPECT_EQ(first[i].t, d[i].t);
        EXPECT_TRUE(ids.count(first[i].sound_id));
        if (i > 0) {
            EXPECT_NE(first[i].sound_id, first[i - 1].sound_id);
        }
    }
}

TEST(Scheduler, OverlappingDetectionsExtendTheRunningDeterrent)
{
    SoundPool pool;
    pool.sounds = {{"a", "a.wav", 4.0}, {"b", "b.wav", 4.0}};
    const std::vector<DetectionEvent> d = {detection_at(10.0), detection_at(12.0, Channel::b), detection_at(20.0)};
    const auto log = schedule_deterrents(d, pool, VisualConfig{}, 1);
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0].t, 10.0);
    EXPECT_DOUBLE_EQ(log[0].end(), 16.0);
    EXPECT_EQ(log[1].t, 20.0);
    EXPECT_NE(log[1].sound_id, log[0].sound_id);
}

TEST(Scheduler, RejectsBadVisual)
{
    VisualConfig visual;
    visual.blink_hz = 0.0;
    EXPECT_THROW(DeterrentScheduler(default_sound_pool(), visual, 1), InvalidArgument);
}
