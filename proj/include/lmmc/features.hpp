#pragma once

// Trajectory featurization: soft-quantized speed histograms under a Gaussian
// mixture, percentile-binned distance histograms to the nearest person and
// vehicle, optional appearance histograms, and enumeration of latent variants
// over temporal windows and role order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>

#include "lmmc/types.hpp"

namespace lmmc {

enum class entity_kind { person, vehicle };

struct TrackPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Trajectory {
    int id = 0;
    entity_kind kind = entity_kind::person;
    std::vector<TrackPoint> points;
    std::vector<Vector> appearance;  // empty, or one descriptor per point
    std::optional<std::string> label;
};

inline void check_trajectory(const Trajectory& tr) {
    if (tr.points.empty()) throw error("trajectory " + std::to_string(tr.id) + " has no points");
    for (std::size_t i = 1; i < tr.points.size(); ++i)
        if (!(tr.points[i].t > tr.points[i - 1].t))
            throw error("trajectory " + std::to_string(tr.id) + " times are not strictly increasing");
    if (!tr.appearance.empty() && tr.appearance.size() != tr.points.size())
        throw error("trajectory " + std::to_string(tr.id) + " appearance count differs from point count");
}

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

// ----- Gaussian mixture with diagonal covariance -----

struct GaussianComponent {
    double weight = 0.0;
    Vector mean;
    Vector variance;
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;
    std::size_t dimension = 0;

    std::size_t size() const { return components.size(); }
};

struct GmmFit {
    GaussianMixture model;
    std::vector<double> log_likelihood;  // total log-likelihood after each EM iteration
    std::size_t iterations = 0;
};

namespace detail {

inline double log_gauss(const Vector& x, const GaussianComponent& c) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - c.mean[j];
        s += std::log(2.0 * std::numbers::pi * c.variance[j]) + d * d / c.variance[j];
    }
    return -0.5 * s;
}

// log p(x) and normalized responsibilities written into `resp`.
inline double posterior(const Vector& x, const GaussianMixture& g, Vector& resp) {
    resp.resize(g.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto& comp = g.components[c];
        resp[c] = comp.weight > 0.0 ? std::log(comp.weight) + log_gauss(x, comp)
                                    : -std::numeric_limits<double>::infinity();
        mx = std::max(mx, resp[c]);
    }
    double total = 0.0;
    for (double& r : resp) {
        r = std::exp(r - mx);
        total += r;
    }
    for (double& r : resp) r /= total;
    return mx + std::log(total);
}

}  // namespace detail

/// EM for a diagonal-covariance mixture. Stops when the mean per-point
/// log-likelihood improves by less than 1e-6, or after 200 iterations.
inline GmmFit fit_gmm_traced(std::span<const Vector> values, std::size_t n_components, std::uint64_t seed) {
    if (n_components < 1) throw config_error("GMM needs at least one component");
    if (values.empty()) throw error("GMM fit on empty input");
    const std::size_t dim = values[0].size();
    for (const auto& v : values) {
        if (v.size() != dim) throw dimension_error(dim, v.size());
        for (double x : v)
            if (std::isnan(x) || !std::isfinite(x)) throw numeric_error("non-finite value in GMM input");
    }
    std::set<Vector> distinct(values.begin(), values.end());
    if (distinct.size() < n_components)
        throw error("GMM needs at least " + std::to_string(n_components) + " distinct values, got " +
                    std::to_string(distinct.size()));

    const std::size_t n = values.size();
    const double nd = static_cast<double>(n);
    Vector mean(dim, 0.0), var(dim, 0.0);
    for (const auto& v : values)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += v[j] / nd;
    for (const auto& v : values)
        for (std::size_t j = 0; j < dim; ++j) var[j] += (v[j] - mean[j]) * (v[j] - mean[j]) / nd;
    Vector floor(dim);
    for (std::size_t j = 0; j < dim; ++j) floor[j] = std::max(1e-6 * var[j], 1e-10);

    // farthest-first seeding over distinct values, first pick random
    std::vector<Vector> pool(distinct.begin(), distinct.end());
    std::mt19937_64 rng(seed);
    std::vector<Vector> centers;
    centers.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    std::vector<double> d2(pool.size(), std::numeric_limits<double>::infinity());
    while (centers.size() < n_components) {
        std::size_t far = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            double d = 0.0;
            for (std::size_t j = 0; j < dim; ++j) d += (pool[i][j] - centers.back()[j]) * (pool[i][j] - centers.back()[j]);
            d2[i] = std::min(d2[i], d);
            if (d2[i] > d2[far]) far = i;
        }
        centers.push_back(pool[far]);
    }

    GmmFit fit;
    fit.model.dimension = dim;
    for (auto& c : centers) {
        Vector v0(dim);
        for (std::size_t j = 0; j < dim; ++j) v0[j] = std::max(var[j] / static_cast<double>(n_components * n_components), floor[j]);
        fit.model.components.push_back({1.0 / static_cast<double>(n_components), c, v0});
    }

    std::vector<Vector> resp(n);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < 200; ++it) {
        // E step
        for (std::size_t i = 0; i < n; ++i) detail::posterior(values[i], fit.model, resp[i]);
        // M step
        for (std::size_t c = 0; c < n_components; ++c) {
            double nk = 0.0;
            Vector m(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i][c];
                for (std::size_t j = 0; j < dim; ++j) m[j] += resp[i][c] * values[i][j];
            }
            auto& comp = fit.model.components[c];
            comp.weight = nk / nd;
            if (nk <= 0.0) continue;
            for (std::size_t j = 0; j < dim; ++j) m[j] /= nk;
            Vector v(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < dim; ++j) v[j] += resp[i][c] * (values[i][j] - m[j]) * (values[i][j] - m[j]);
            for (std::size_t j = 0; j < dim; ++j) v[j] = std::max(v[j] / nk, floor[j]);
            comp.mean = std::move(m);
            comp.variance = std::move(v);
        }
        double ll = 0.0;
        Vector scratch;
        for (std::size_t i = 0; i < n; ++i) ll += detail::posterior(values[i], fit.model, scratch);
        fit.log_likelihood.push_back(ll);
        fit.iterations = it + 1;
        if (it > 0 && (ll - prev) / nd < 1e-6) break;
        prev = ll;
    }
    return fit;
}

inline GaussianMixture fit_gmm(std::span<const Vector> values, std::size_t n_components, std::uint64_t seed) {
    return fit_gmm_traced(values, n_components, seed).model;
}

/// Posterior responsibilities P(component | value).
inline Vector soft_histogram(const Vector& value, const GaussianMixture& gmm) {
    if (value.size() != gmm.dimension) throw dimension_error(gmm.dimension, value.size());
    Vector resp;
    detail::posterior(value, gmm, resp);
    return resp;
}

inline double gmm_log_likelihood(std::span<const Vector> values, const GaussianMixture& gmm) {
    double ll = 0.0;
    Vector scratch;
    for (const auto& v : values) ll += detail::posterior(v, gmm, scratch);
    return ll;
}

// ----- percentile bins -----

struct PercentileBins {
    Vector edges;             // strictly increasing; B - 1 edges define B bins
    bool degenerate = false;  // duplicate edges were collapsed

    std::size_t bins() const { return edges.size() + 1; }

    /// Bin index: the number of edges <= value.
    std::size_t bin_of(double v) const {
        return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
    }
};

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Edges at quantiles k / n_bins. Duplicate edges, and edges at or below the
/// minimum (whose lower bin could never fill), are dropped and flagged.
inline PercentileBins percentile_edges(std::span<const double> values, std::size_t n_bins) {
    if (values.empty()) throw error("percentile edges of empty input");
    if (n_bins < 2) throw config_error("percentile binning needs at least 2 bins");
    Vector sorted(values.begin(), values.end());
    for (double v : sorted)
        if (!std::isfinite(v)) throw numeric_error("non-finite value in percentile input");
    std::sort(sorted.begin(), sorted.end());
    PercentileBins out;
    for (std::size_t k = 1; k < n_bins; ++k) {
        const double e = quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(n_bins));
        if (e <= sorted.front() || (!out.edges.empty() && e <= out.edges.back())) {
            out.degenerate = true;
            continue;
        }
        out.edges.push_back(e);
    }
    return out;
}

// ----- trajectory geometry -----

namespace detail {

inline double distance(const TrackPoint& a, const TrackPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Points of `tr` whose time lies in [w.t0, w.t1], as an index range.
inline std::pair<std::size_t, std::size_t> window_range(const Trajectory& tr, const TimeWindow& w) {
    auto lo = std::lower_bound(tr.points.begin(), tr.points.end(), w.t0,
                               [](const TrackPoint& p, double t) { return p.t < t; });
    auto hi = std::upper_bound(tr.points.begin(), tr.points.end(), w.t1,
                               [](double t, const TrackPoint& p) { return t < p.t; });
    return {static_cast<std::size_t>(lo - tr.points.begin()), static_cast<std::size_t>(hi - tr.points.begin())};
}

inline const TrackPoint* point_at(const Trajectory& tr, double t) {
    auto it = std::lower_bound(tr.points.begin(), tr.points.end(), t,
                               [](const TrackPoint& p, double x) { return p.t < x; });
    return it != tr.points.end() && it->t == t ? &*it : nullptr;
}

// Distances between `a` and `b` at every shared time step within the window.
inline Vector paired_distances(const Trajectory& a, const Trajectory& b, const TimeWindow& w) {
    Vector out;
    auto [lo, hi] = window_range(a, w);
    for (std::size_t i = lo; i < hi; ++i)
        if (const TrackPoint* q = point_at(b, a.points[i].t)) out.push_back(distance(a.points[i], *q));
    return out;
}

inline TimeWindow full_span(const Trajectory& tr) { return {tr.points.front().t, tr.points.back().t}; }

inline void check_window(const Trajectory& tr, const TimeWindow& w) {
    const TimeWindow span = full_span(tr);
    if (!(w.t0 <= w.t1) || w.t0 < span.t0 || w.t1 > span.t1)
        throw error("window [" + std::to_string(w.t0) + ", " + std::to_string(w.t1) +
                    "] outside trajectory " + std::to_string(tr.id));
}

}  // namespace detail

struct DistanceHistogram {
    Vector values;
    bool empty = true;  // no shared time steps inside the window
};

/// Hard-binned distances over the shared time steps in the window, normalized to sum 1.
inline DistanceHistogram distance_histogram(const Trajectory& focal, const Trajectory& other,
                                            const PercentileBins& bins, const TimeWindow& window) {
    detail::check_window(focal, window);
    DistanceHistogram h{Vector(bins.bins(), 0.0), true};
    const Vector d = detail::paired_distances(focal, other, window);
    if (d.empty()) return h;
    for (double x : d) h.values[bins.bin_of(x)] += 1.0;
    for (double& v : h.values) v /= static_cast<double>(d.size());
    h.empty = false;
    return h;
}

/// Net displacement between the first and last points in the window over the elapsed time.
inline double window_speed(const Trajectory& tr, const TimeWindow& window) {
    auto [lo, hi] = detail::window_range(tr, window);
    if (hi < lo + 2) throw error("trajectory " + std::to_string(tr.id) + " has fewer than 2 points in window");
    const TrackPoint& a = tr.points[lo];
    const TrackPoint& b = tr.points[hi - 1];
    return detail::distance(a, b) / (b.t - a.t);
}

inline Vector velocity_feature(const Trajectory& tr, const TimeWindow& window, const GaussianMixture& gmm) {
    return soft_histogram(Vector{window_speed(tr, window)}, gmm);
}

struct SceneContext {
    Trajectory focal;
    std::optional<Trajectory> nearest_person;
    std::optional<Trajectory> nearest_vehicle;
};

inline double median_of(Vector v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Per kind, the trajectory with the smallest median distance to the focal over
/// shared frames; ties by lowest id; absent when nothing overlaps.
inline SceneContext nearest_entities(const Trajectory& focal, std::span<const Trajectory> others) {
    SceneContext ctx{focal, std::nullopt, std::nullopt};
    const TimeWindow span = detail::full_span(focal);
    double best_person = std::numeric_limits<double>::infinity();
    double best_vehicle = best_person;
    for (const auto& o : others) {
        if (o.id == focal.id) continue;
        const Vector d = detail::paired_distances(focal, o, span);
        if (d.empty()) continue;
        const double med = median_of(d);
        auto& slot = o.kind == entity_kind::person ? ctx.nearest_person : ctx.nearest_vehicle;
        double& best = o.kind == entity_kind::person ? best_person : best_vehicle;
        if (med < best || (med == best && slot && o.id < slot->id)) {
            best = med;
            slot = o;
        }
    }
    return ctx;
}

// ----- sample construction -----

struct VariantSpec {
    std::size_t window_frames = 20;
    std::size_t stride_frames = 10;
    bool role_swap = false;
    bool latent_windows = true;  // false: one variant over the full span
    bool use_appearance = false;
};

/// Quantizers fitted once per dataset.
struct FeatureModels {
    GaussianMixture speed;
    PercentileBins distance;
    std::optional<GaussianMixture> appearance;
};

/// Feature layout: [speed focal | speed other | dist person | dist vehicle |
/// (app focal | app other) | one presence flag per block].
struct FeatureLayout {
    std::size_t speed = 0;
    std::size_t distance = 0;
    std::size_t appearance = 0;  // 0 when unused

    std::size_t blocks() const { return appearance ? 6 : 4; }
    std::size_t dim() const { return 2 * speed + 2 * distance + 2 * appearance + blocks(); }

    static FeatureLayout of(const FeatureModels& m, bool use_appearance) {
        return {m.speed.size(), m.distance.bins(), use_appearance && m.appearance ? m.appearance->size() : 0};
    }
};

/// Windows [o, o + W - 1] over the focal span, stepping by the stride; a single
/// full-span window when the track is shorter than W or latent windows are off.
inline std::vector<TimeWindow> enumerate_windows(const Trajectory& focal, const VariantSpec& spec) {
    const TimeWindow span = detail::full_span(focal);
    const double w = static_cast<double>(spec.window_frames);
    if (!spec.latent_windows || spec.window_frames == 0 || span.t1 - span.t0 + 1.0 < w) return {span};
    const double stride = static_cast<double>(std::max<std::size_t>(spec.stride_frames, 1));
    std::vector<TimeWindow> out;
    for (double o = span.t0; o + w - 1.0 <= span.t1 + 1e-9; o += stride) out.push_back({o, o + w - 1.0});
    return out;
}

namespace detail {

struct Block {
    Vector values;
    bool present = false;
};

inline Block speed_block(const Trajectory* tr, const TimeWindow& w, const GaussianMixture& gmm) {
    Block b{Vector(gmm.size(), 0.0), false};
    if (!tr) return b;
    auto [lo, hi] = window_range(*tr, w);
    if (hi < lo + 2) return b;
    b.values = velocity_feature(*tr, w, gmm);
    b.present = true;
    return b;
}

inline Block appearance_block(const Trajectory* tr, const TimeWindow& w, const GaussianMixture& gmm) {
    Block b{Vector(gmm.size(), 0.0), false};
    if (!tr || tr->appearance.empty()) return b;
    auto [lo, hi] = window_range(*tr, w);
    if (hi == lo) return b;
    for (std::size_t i = lo; i < hi; ++i) {
        const Vector r = soft_histogram(tr->appearance[i], gmm);
        for (std::size_t c = 0; c < r.size(); ++c) b.values[c] += r[c];
    }
    double s = 0.0;
    for (double v : b.values) s += v;
    for (double& v : b.values) v /= s;
    b.present = true;
    return b;
}

inline Block distance_block(const Trajectory& focal, const std::optional<Trajectory>& other, const TimeWindow& w,
                            const PercentileBins& bins) {
    Block b{Vector(bins.bins(), 0.0), false};
    if (!other) return b;
    DistanceHistogram h = distance_histogram(focal, *other, bins, w);
    if (h.empty) return b;
    b.values = std::move(h.values);
    b.present = true;
    return b;
}

inline Vector assemble(const std::vector<Block>& blocks) {
    Vector out;
    for (const auto& b : blocks) out.insert(out.end(), b.values.begin(), b.values.end());
    for (const auto& b : blocks) out.push_back(b.present ? 1.0 : 0.0);
    return out;
}

}  // namespace detail

/// One variant per (window, role order). Role swap exchanges the focal and
/// nearest-person speed (and appearance) blocks.
inline Sample build_sample(const SceneContext& ctx, const VariantSpec& spec, const FeatureModels& models, int id = 0) {
    check_trajectory(ctx.focal);
    const bool app = spec.use_appearance && models.appearance.has_value();
    const Trajectory* other = ctx.nearest_person ? &*ctx.nearest_person : nullptr;
    Sample s;
    s.id = id;
    for (const TimeWindow& w : enumerate_windows(ctx.focal, spec)) {
        std::vector<detail::Block> blocks;
        blocks.push_back(detail::speed_block(&ctx.focal, w, models.speed));
        blocks.push_back(detail::speed_block(other, w, models.speed));
        blocks.push_back(detail::distance_block(ctx.focal, ctx.nearest_person, w, models.distance));
        blocks.push_back(detail::distance_block(ctx.focal, ctx.nearest_vehicle, w, models.distance));
        if (app) {
            blocks.push_back(detail::appearance_block(&ctx.focal, w, *models.appearance));
            blocks.push_back(detail::appearance_block(other, w, *models.appearance));
        }
        const std::string tag = "t0=" + std::to_string(static_cast<long long>(w.t0)) +
                                ";t1=" + std::to_string(static_cast<long long>(w.t1));
        s.variants.push_back({detail::assemble(blocks), tag + ";swap=0"});
        if (spec.role_swap) {
            std::swap(blocks[0], blocks[1]);
            if (app) std::swap(blocks[4], blocks[5]);
            s.variants.push_back({detail::assemble(blocks), tag + ";swap=1"});
        }
    }
    return s;
}

/// Exchanges the focal/other blocks of an assembled feature vector.
inline Vector swap_roles(const Vector& v, const FeatureLayout& layout) {
    Vector out = v;
    const std::size_t g = layout.speed;
    std::swap_ranges(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(g), out.begin() + static_cast<std::ptrdiff_t>(g));
    const std::size_t flags = 2 * g + 2 * layout.distance + 2 * layout.appearance;
    std::swap(out[flags], out[flags + 1]);
    if (layout.appearance) {
        const std::size_t a0 = 2 * g + 2 * layout.distance;
        std::swap_ranges(out.begin() + static_cast<std::ptrdiff_t>(a0),
                         out.begin() + static_cast<std::ptrdiff_t>(a0 + layout.appearance),
                         out.begin() + static_cast<std::ptrdiff_t>(a0 + layout.appearance));
        std::swap(out[flags + 4], out[flags + 5]);
    }
    return out;
}

}  // namespace lmmc
