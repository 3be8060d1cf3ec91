#pragma once

// Trajectory file I/O and dataset assembly: picks focal tracks, finds their
// nearest person and vehicle, fits the dataset-wide quantizers and emits one
// Sample per focal track.

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lmmc/features.hpp"

namespace lmmc {

struct TrajectoryFile {
    std::vector<Trajectory> trajectories;
    std::optional<double> frame_rate;
};

inline TrajectoryFile parse_trajectory_file(const nlohmann::json& doc) {
    TrajectoryFile out;
    try {
        if (doc.contains("frame_rate") && !doc["frame_rate"].is_null()) out.frame_rate = doc["frame_rate"].get<double>();
        for (const auto& jt : doc.at("trajectories")) {
            Trajectory tr;
            tr.id = jt.at("id").get<int>();
            const std::string kind = jt.at("kind").get<std::string>();
            if (kind == "person") tr.kind = entity_kind::person;
            else if (kind == "vehicle") tr.kind = entity_kind::vehicle;
            else throw config_error("unknown trajectory kind '" + kind + "'");
            for (const auto& p : jt.at("points")) {
                if (p.size() != 3) throw config_error("trajectory points must be [t, x, y]");
                tr.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
            }
            if (jt.contains("appearance") && !jt["appearance"].is_null())
                tr.appearance = jt["appearance"].get<std::vector<Vector>>();
            if (jt.contains("label") && !jt["label"].is_null()) tr.label = jt["label"].get<std::string>();
            check_trajectory(tr);
            out.trajectories.push_back(std::move(tr));
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed trajectory file: ") + e.what());
    }
    return out;
}

inline nlohmann::json to_json(const Trajectory& tr) {
    nlohmann::json jt;
    jt["id"] = tr.id;
    jt["kind"] = tr.kind == entity_kind::person ? "person" : "vehicle";
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tr.points) pts.push_back({p.t, p.x, p.y});
    jt["points"] = std::move(pts);
    if (!tr.appearance.empty()) jt["appearance"] = tr.appearance;
    if (tr.label) jt["label"] = *tr.label;
    return jt;
}

inline nlohmann::json to_json(const TrajectoryFile& f) {
    nlohmann::json doc;
    doc["trajectories"] = nlohmann::json::array();
    for (const auto& tr : f.trajectories) doc["trajectories"].push_back(to_json(tr));
    if (f.frame_rate) doc["frame_rate"] = *f.frame_rate;
    return doc;
}

inline TrajectoryFile load_trajectory_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open trajectory file " + path);
    try {
        return parse_trajectory_file(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("cannot parse " + path + ": " + e.what());
    }
}

struct FeatureConfig {
    std::size_t speed_components = 8;
    std::size_t appearance_components = 8;
    std::size_t distance_bins = 5;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<Sample> samples;      // samples[i].id == i
    std::vector<SceneContext> scenes; // scene the sample was built from
    std::vector<int> labels;          // per sample; empty when the file has no labels
    std::vector<std::string> label_names;
    FeatureModels models;
    FeatureLayout layout;
    VariantSpec variant_spec;

    bool labeled() const { return !labels.empty(); }
    std::size_t dim() const { return layout.dim(); }
};

namespace detail {

inline std::size_t usable_components(std::span<const Vector> values, std::size_t wanted) {
    std::set<Vector> distinct(values.begin(), values.end());
    return std::max<std::size_t>(1, std::min(wanted, distinct.size()));
}

}  // namespace detail

/// Focal tracks are the labeled persons; when no track carries a label every
/// person is focal.
inline Dataset build_dataset(const TrajectoryFile& file, const VariantSpec& spec, const FeatureConfig& fc = {}) {
    std::vector<Trajectory> all = file.trajectories;
    std::sort(all.begin(), all.end(), [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].id == all[i - 1].id) throw config_error("duplicate trajectory id " + std::to_string(all[i].id));

    const bool any_label = std::any_of(all.begin(), all.end(), [](const Trajectory& t) { return t.label.has_value(); });
    Dataset ds;
    ds.variant_spec = spec;
    for (const auto& tr : all)
        if (tr.kind == entity_kind::person && (!any_label || tr.label)) ds.scenes.push_back(nearest_entities(tr, all));
    if (ds.scenes.empty()) throw config_error("trajectory file has no focal person tracks");

    std::vector<Vector> speeds;
    Vector distances;
    std::vector<Vector> appearance;
    for (const auto& ctx : ds.scenes) {
        for (const TimeWindow& w : enumerate_windows(ctx.focal, spec)) {
            auto [lo, hi] = detail::window_range(ctx.focal, w);
            if (hi >= lo + 2) speeds.push_back({window_speed(ctx.focal, w)});
            if (ctx.nearest_person) {
                auto [plo, phi] = detail::window_range(*ctx.nearest_person, w);
                if (phi >= plo + 2) speeds.push_back({window_speed(*ctx.nearest_person, w)});
            }
        }
        const TimeWindow span = detail::full_span(ctx.focal);
        for (const auto* other : {ctx.nearest_person ? &*ctx.nearest_person : nullptr,
                                  ctx.nearest_vehicle ? &*ctx.nearest_vehicle : nullptr}) {
            if (!other) continue;
            const Vector d = detail::paired_distances(ctx.focal, *other, span);
            distances.insert(distances.end(), d.begin(), d.end());
        }
        if (spec.use_appearance) {
            appearance.insert(appearance.end(), ctx.focal.appearance.begin(), ctx.focal.appearance.end());
            if (ctx.nearest_person)
                appearance.insert(appearance.end(), ctx.nearest_person->appearance.begin(),
                                  ctx.nearest_person->appearance.end());
        }
    }
    if (speeds.empty()) throw config_error("no focal track has two points inside a window");
    if (distances.empty()) distances.push_back(0.0);

    ds.models.speed = fit_gmm(speeds, detail::usable_components(speeds, fc.speed_components), fc.seed);
    ds.models.distance = percentile_edges(distances, fc.distance_bins);
    if (spec.use_appearance && !appearance.empty())
        ds.models.appearance =
            fit_gmm(appearance, detail::usable_components(appearance, fc.appearance_components), fc.seed + 1);
    ds.layout = FeatureLayout::of(ds.models, spec.use_appearance);

    std::map<std::string, int> label_ids;
    if (any_label) {
        for (const auto& ctx : ds.scenes) label_ids.emplace(*ctx.focal.label, 0);
        int next = 0;
        for (auto& [name, id] : label_ids) {
            id = next++;
            ds.label_names.push_back(name);
        }
    }
    for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
        Sample s = build_sample(ds.scenes[i], spec, ds.models, static_cast<int>(i));
        if (any_label) {
            s.label = label_ids.at(*ds.scenes[i].focal.label);
            ds.labels.push_back(*s.label);
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace lmmc
