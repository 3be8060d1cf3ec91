#pragma once

// Data-driven starting partitions for the first unsupervised alternation.
//
// Every variant of every sample is quantized against a k-means codebook. Each
// sample becomes a tf-idf weighted indicator of the codewords its variants hit,
// so windows that every sample shares (idle stretches) carry little weight and
// the rarer, class-specific windows drive a second k-means over samples.

#include <cstdint>
#include <random>
#include <span>

#include "lmmc/evaluation.hpp"
#include "lmmc/training.hpp"

namespace lmmc {

inline std::vector<std::size_t> codebook_partition(std::span<const Sample> samples, std::size_t clusters,
                                                   std::size_t codewords, std::uint64_t seed) {
    const std::size_t n = samples.size();
    if (clusters == 0 || clusters > n) throw config_error("codebook partition needs 1 <= K <= N");
    std::vector<Vector> pool;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& v : samples[i].variants) {
            pool.push_back(v.values);
            owner.push_back(i);
        }
    codewords = std::clamp<std::size_t>(codewords, 1, pool.size());
    const KMeansResult book = kmeans(std::span<const Vector>(pool), codewords, seed, 1, 50);

    std::vector<Vector> bags(n, Vector(codewords, 0.0));
    for (std::size_t p = 0; p < pool.size(); ++p) bags[owner[p]][book.cluster[p]] = 1.0;
    Vector df(codewords, 0.0);
    for (const auto& b : bags)
        for (std::size_t j = 0; j < codewords; ++j) df[j] += b[j];
    for (auto& b : bags) {
        for (std::size_t j = 0; j < codewords; ++j)
            if (b[j] > 0.0) b[j] = std::log(static_cast<double>(n) / df[j]);
        const double norm = std::sqrt(squared_norm(b));
        if (norm > 0.0)
            for (double& x : b) x /= norm;
    }
    return kmeans(std::span<const Vector>(bags), clusters, seed, 10).cluster;
}

/// `count` partitions over codebooks of 2K, 2K, 4K, 4K, 8K, ... words, each
/// with its own seed drawn from `seed`.
inline std::vector<std::vector<std::size_t>> codebook_starts(std::span<const Sample> samples, std::size_t clusters,
                                                             std::size_t count, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> out;
    if (samples.size() < clusters) return out;
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t words = clusters << (1 + j / 2);
        out.push_back(codebook_partition(samples, clusters, words, rng()));
    }
    return out;
}

/// Runs `alternate` from the all-ones parameters and from weights fitted to
/// each start partition; keeps the run with the lowest final objective
/// (earliest on ties). The start partitions need not satisfy the constraints:
/// they only shape the first weights.
inline SolveReport alternate_from_starts(std::span<const Sample> samples, const ConstraintSet& cons,
                                         const SolveSpec& spec, std::size_t dim,
                                         std::span<const std::vector<std::size_t>> starts,
                                         const ProgressSink& progress = {}) {
    const auto started = std::chrono::steady_clock::now();
    SolveReport best = alternate(samples, cons, spec, init_params(dim, spec.clusters, spec.lambda), progress);
    for (std::size_t s = 0; s < starts.size(); ++s) {
        Assignment seeded;
        seeded.sample_cluster = starts[s];
        const ModelParams w0 = update_weights(samples, seeded, spec, init_params(dim, spec.clusters, spec.lambda));
        SolveReport rep = alternate(samples, cons, spec, w0, progress);
        rep.start = s + 1;
        if (rep.objective_trace.back() < best.objective_trace.back()) best = std::move(rep);
    }
    best.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return best;
}

}  // namespace lmmc
