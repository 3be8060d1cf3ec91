#pragma once

// Synthetic interaction scenes: one focal person, one companion person and one
// vehicle per scene. Each class has a characteristic motion/proximity regime
// that holds only during a randomly placed segment; the rest of the track is
// an idle regime shared by every class.

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "lmmc/dataset.hpp"

namespace lmmc {

struct Regime {
    std::string_view name;
    double focal_speed;      // units per frame
    double companion_start;  // focal-companion distance at segment start
    double companion_end;
    double vehicle_start;    // focal-vehicle distance at segment start
    double vehicle_end;
};

// Segment regimes; the approaching-vehicle speed is derived from its distance change.
inline constexpr std::array<Regime, 5> archetypes{{
    {"walking_with_person", 1.5, 1.5, 1.5, 30.0, 30.0},
    {"interacting_with_car", -1.0, 30.0, 30.0, 15.0, 1.0},
    {"standing_alone", 0.0, 30.0, 30.0, 30.0, 30.0},
    {"talking_to_person", 0.0, 1.2, 1.2, 30.0, 30.0},
    {"walking_alone", 1.5, 30.0, 30.0, 30.0, 30.0},
}};

inline constexpr std::array<Regime, 2> idle_regimes{{
    {"idle_stroll", 0.6, 8.0, 8.0, 12.0, 12.0},
    {"idle_wait", 0.3, 6.0, 6.0, 10.0, 10.0},
}};

struct SyntheticSpec {
    std::size_t n_classes = 5;
    std::size_t samples_per_class = 40;
    std::size_t segment_frames = 25;
    std::size_t min_track_frames = 25;
    std::size_t max_track_frames = 100;
    double position_noise = 0.0;  // per-coordinate Gaussian jitter
    double regime_noise = 0.0;    // relative jitter of each sample's segment speeds/distances
    std::uint64_t seed = 0;
};

struct SyntheticData {
    TrajectoryFile file;
    std::vector<int> labels;  // per scene, in focal-id order
    std::vector<std::string> label_names;
};

inline void check_synthetic(const SyntheticSpec& s) {
    if (s.n_classes < 1 || s.n_classes > archetypes.size())
        throw config_error("synthetic n_classes must be in [1, " + std::to_string(archetypes.size()) + "]");
    if (s.samples_per_class < 1) throw config_error("synthetic samples_per_class must be positive");
    if (s.segment_frames < 2 || s.min_track_frames < s.segment_frames || s.max_track_frames < s.min_track_frames)
        throw config_error("synthetic frames must satisfy 2 <= segment <= min_track <= max_track");
    if (s.position_noise < 0.0 || s.regime_noise < 0.0) throw config_error("synthetic noise must be non-negative");
}

inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    check_synthetic(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto jitter = [&](double v) { return spec.regime_noise > 0.0 ? v * std::max(0.0, 1.0 + spec.regime_noise * gauss(rng)) : v; };
    auto pos_noise = [&]() { return spec.position_noise > 0.0 ? spec.position_noise * gauss(rng) : 0.0; };

    std::vector<int> classes;
    for (std::size_t c = 0; c < spec.n_classes; ++c)
        for (std::size_t i = 0; i < spec.samples_per_class; ++i) classes.push_back(static_cast<int>(c));
    std::shuffle(classes.begin(), classes.end(), rng);

    SyntheticData out;
    out.file.frame_rate = 10.0;
    for (std::size_t c = 0; c < spec.n_classes; ++c) out.label_names.emplace_back(archetypes[c].name);

    std::uniform_int_distribution<std::size_t> track_len(spec.min_track_frames, spec.max_track_frames);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<std::size_t> idle_pick(0, idle_regimes.size() - 1);

    for (std::size_t s = 0; s < classes.size(); ++s) {
        const Regime& cls = archetypes[static_cast<std::size_t>(classes[s])];
        const Regime& idle = idle_regimes[idle_pick(rng)];
        const std::size_t len = track_len(rng);
        const std::size_t seg = spec.segment_frames;
        const std::size_t seg_start = std::uniform_int_distribution<std::size_t>(0, len - seg)(rng);
        const double heading = angle(rng);
        const double comp_side = angle(rng);
        const double ux = std::cos(heading), uy = std::sin(heading);
        const double cx = std::cos(comp_side), cy = std::sin(comp_side);

        Regime seg_regime = cls;
        seg_regime.companion_start = jitter(cls.companion_start);
        seg_regime.companion_end = cls.companion_end == cls.companion_start ? seg_regime.companion_start : jitter(cls.companion_end);
        seg_regime.vehicle_start = jitter(cls.vehicle_start);
        seg_regime.vehicle_end = cls.vehicle_end == cls.vehicle_start ? seg_regime.vehicle_start : jitter(cls.vehicle_end);
        // walk toward the vehicle so that it stays parked
        seg_regime.focal_speed = cls.focal_speed < 0.0
                                     ? (seg_regime.vehicle_start - seg_regime.vehicle_end) / static_cast<double>(seg - 1)
                                     : jitter(cls.focal_speed);

        const double origin_x = 1000.0 * static_cast<double>(s);
        double fx = origin_x, fy = 0.0;
        Trajectory focal{static_cast<int>(3 * s), entity_kind::person, {}, {}, std::string(cls.name)};
        Trajectory companion{static_cast<int>(3 * s + 1), entity_kind::person, {}, {}, std::nullopt};
        Trajectory vehicle{static_cast<int>(3 * s + 2), entity_kind::vehicle, {}, {}, std::nullopt};
        for (std::size_t f = 0; f < len; ++f) {
            const bool in_seg = f >= seg_start && f < seg_start + seg;
            const Regime& r = in_seg ? seg_regime : idle;
            const double u = in_seg && seg > 1 ? static_cast<double>(f - seg_start) / static_cast<double>(seg - 1) : 0.0;
            if (f > 0) {
                const double v = in_seg ? seg_regime.focal_speed : idle.focal_speed;
                fx += v * ux;
                fy += v * uy;
            }
            const double dc = r.companion_start + u * (r.companion_end - r.companion_start);
            const double dv = r.vehicle_start + u * (r.vehicle_end - r.vehicle_start);
            const double t = static_cast<double>(f);
            focal.points.push_back({t, fx + pos_noise(), fy + pos_noise()});
            companion.points.push_back({t, fx + dc * cx + pos_noise(), fy + dc * cy + pos_noise()});
            vehicle.points.push_back({t, fx + dv * ux + pos_noise(), fy + dv * uy + pos_noise()});
        }
        out.file.trajectories.push_back(std::move(focal));
        out.file.trajectories.push_back(std::move(companion));
        out.file.trajectories.push_back(std::move(vehicle));
        out.labels.push_back(classes[s]);
    }
    return out;
}

inline std::string synthetic_file_content(const SyntheticData& data) { return to_json(data.file).dump(); }

}  // namespace lmmc
