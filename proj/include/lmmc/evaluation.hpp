#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>

#include "lmmc/types.hpp"

namespace lmmc {

/// predicted[i] and truth[i] describe the same sample i.
struct LabeledPartition {
    std::vector<std::size_t> predicted;
    std::vector<int> truth;
};

namespace detail {

inline void check_partition(const LabeledPartition& p) {
    if (p.predicted.empty()) throw error("metric on an empty partition");
    if (p.predicted.size() != p.truth.size()) throw dimension_error(p.predicted.size(), p.truth.size());
}

inline std::map<std::pair<std::size_t, int>, std::size_t> contingency(const LabeledPartition& p) {
    std::map<std::pair<std::size_t, int>, std::size_t> table;
    for (std::size_t i = 0; i < p.predicted.size(); ++i) ++table[{p.predicted[i], p.truth[i]}];
    return table;
}

}  // namespace detail

inline double purity(const LabeledPartition& p) {
    detail::check_partition(p);
    std::map<std::size_t, std::size_t> best;
    for (const auto& [cell, count] : detail::contingency(p)) best[cell.first] = std::max(best[cell.first], count);
    std::size_t correct = 0;
    for (const auto& [c, count] : best) correct += count;
    return static_cast<double>(correct) / static_cast<double>(p.predicted.size());
}

/// Mutual information over the arithmetic mean of the two entropies. Two
/// single-block partitions count as identical (1.0).
inline double nmi(const LabeledPartition& p) {
    detail::check_partition(p);
    const double n = static_cast<double>(p.predicted.size());
    std::map<std::size_t, std::size_t> rows;
    std::map<int, std::size_t> cols;
    const auto table = detail::contingency(p);
    for (const auto& [cell, count] : table) {
        rows[cell.first] += count;
        cols[cell.second] += count;
    }
    auto entropy = [n](const auto& marg) {
        double h = 0.0;
        for (const auto& [key, count] : marg) {
            const double q = static_cast<double>(count) / n;
            h -= q * std::log(q);
        }
        return h;
    };
    const double hu = entropy(rows);
    const double hv = entropy(cols);
    if (hu == 0.0 && hv == 0.0) return 1.0;
    double mi = 0.0;
    for (const auto& [cell, count] : table) {
        const double c = static_cast<double>(count);
        mi += c / n * std::log(c * n / (static_cast<double>(rows[cell.first]) * static_cast<double>(cols[cell.second])));
    }
    const double denom = 0.5 * (hu + hv);
    return std::clamp(mi / denom, 0.0, 1.0);
}

/// Unadjusted Rand index: fraction of sample pairs on which both partitions agree.
inline double rand_index(const LabeledPartition& p) {
    detail::check_partition(p);
    const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    const double n = static_cast<double>(p.predicted.size());
    if (p.predicted.size() < 2) return 1.0;
    std::map<std::size_t, std::size_t> rows;
    std::map<int, std::size_t> cols;
    double same_both = 0.0;
    for (const auto& [cell, count] : detail::contingency(p)) {
        rows[cell.first] += count;
        cols[cell.second] += count;
        same_both += choose2(static_cast<double>(count));
    }
    double same_pred = 0.0, same_truth = 0.0;
    for (const auto& [r, c] : rows) same_pred += choose2(static_cast<double>(c));
    for (const auto& [r, c] : cols) same_truth += choose2(static_cast<double>(c));
    const double total = choose2(n);
    const double agree = total - same_pred - same_truth + 2.0 * same_both;
    return agree / total;
}

struct KMeansResult {
    std::vector<std::size_t> cluster;
    std::vector<Vector> centers;
    double inertia = 0.0;
    std::vector<double> inertia_trace;  // best restart, one entry per Lloyd iteration
};

namespace detail {

inline double sq_dist(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline KMeansResult lloyd(std::span<const Vector> pts, std::size_t k, std::mt19937_64& rng, std::size_t max_iters) {
    const std::size_t n = pts.size();
    KMeansResult r;
    // k-means++ seeding
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    r.centers.push_back(pts[first(rng)]);
    std::vector<double> d2(n);
    while (r.centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& c : r.centers) m = std::min(m, sq_dist(pts[i], c));
            d2[i] = m;
            total += m;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double x = u(rng), acc = 0.0;
            for (pick = 0; pick + 1 < n; ++pick) {
                acc += d2[pick];
                if (acc >= x) break;
            }
        } else {
            pick = first(rng);
        }
        r.centers.push_back(pts[pick]);
    }

    r.cluster.assign(n, 0);
    const std::size_t dim = pts[0].size();
    for (std::size_t it = 0; it < max_iters; ++it) {
        bool changed = it == 0;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = sq_dist(pts[i], r.centers[0]);
            for (std::size_t t = 1; t < k; ++t) {
                const double d = sq_dist(pts[i], r.centers[t]);
                if (d < bd) {
                    bd = d;
                    best = t;
                }
            }
            if (best != r.cluster[i]) changed = true;
            r.cluster[i] = best;
            inertia += bd;
        }
        r.inertia_trace.push_back(inertia);
        r.inertia = inertia;
        if (!changed) break;

        std::vector<Vector> sums(k, Vector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[r.cluster[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[r.cluster[i]][j] += pts[i][j];
        }
        for (std::size_t t = 0; t < k; ++t) {
            if (counts[t] == 0) {
                // empty cluster: re-seed from the point farthest from its center
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(pts[i], r.centers[r.cluster[i]]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                r.centers[t] = pts[far];
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) r.centers[t][j] = sums[t][j] / static_cast<double>(counts[t]);
        }
    }
    // final assignment step against the last centers
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(pts[i], r.centers[r.cluster[i]]);
    r.inertia = inertia;
    return r;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
inline KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                           std::size_t restarts = 10, std::size_t max_iters = 300) {
    if (k == 0) throw config_error("k-means needs K >= 1");
    if (k > points.size()) throw config_error("k-means needs K <= N");
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        KMeansResult cur = detail::lloyd(points, k, rng, max_iters);
        if (cur.inertia < best.inertia) best = std::move(cur);
    }
    return best;
}

/// k-means over one designated variant per sample.
inline KMeansResult kmeans(std::span<const Sample> samples, std::size_t k, std::uint64_t seed,
                           std::size_t restarts = 10, std::size_t variant = 0) {
    std::vector<Vector> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples) {
        const std::size_t h = std::min(variant, s.variants.size() - 1);
        pts.push_back(s.variants[h].values);
    }
    return kmeans(std::span<const Vector>(pts), k, seed, restarts);
}

}  // namespace lmmc
