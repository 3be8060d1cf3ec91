#pragma once

#include <algorithm>
#include <span>

#include "lmmc/types.hpp"

namespace lmmc {

struct Score {
    double value = 0.0;
    std::size_t best_variant = 0;
};

/// f(x; w) = max_h <w, phi(x, h)>. Ties go to the lowest variant index.
inline Score score(const Sample& sample, const Vector& weight) {
    if (sample.variants.empty()) throw error("sample " + std::to_string(sample.id) + " has no variants");
    if (weight.size() != sample.dim()) throw dimension_error(sample.dim(), weight.size());
    Score out{dot(weight, sample.variants[0].values), 0};
    for (std::size_t h = 1; h < sample.variants.size(); ++h) {
        const double s = dot(weight, sample.variants[h].values);
        if (s > out.value) out = {s, h};
    }
    return out;
}

struct ScoreMatrix {
    Matrix<double> scores;        // N x K
    Matrix<std::size_t> variant;  // N x K, argmax h per cell
};

inline ScoreMatrix score_matrix(std::span<const Sample> samples, const ModelParams& params) {
    const std::size_t n = samples.size();
    const std::size_t k = params.clusters();
    ScoreMatrix out{Matrix<double>(n, k), Matrix<std::size_t>(n, k)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const Score s = score(samples[i], params.weights[t]);
            out.scores(i, t) = s.value;
            out.variant(i, t) = s.best_variant;
        }
    }
    return out;
}

inline double regularizer(const ModelParams& params) {
    double r = 0.0;
    for (const auto& w : params.weights) r += squared_norm(w);
    return 0.5 * params.lambda * r;
}

/// (1/K) sum_i sum_{r != a(i)} max(0, 1 - S[i][a(i)] + S[i][r]).
inline double slack_total(const Matrix<double>& scores, std::span<const std::size_t> cluster_of) {
    const std::size_t k = scores.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const std::size_t a = cluster_of[i];
        for (std::size_t r = 0; r < k; ++r)
            if (r != a) total += std::max(0.0, 1.0 - scores(i, a) + scores(i, r));
    }
    return total / static_cast<double>(k);
}

inline void require_assigned(std::span<const Sample> samples, const Assignment& assignment,
                             std::size_t clusters) {
    std::vector<int> missing;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i >= assignment.sample_cluster.size() || assignment.sample_cluster[i] >= clusters)
            missing.push_back(samples[i].id);
    }
    if (!missing.empty()) throw unassigned_error("unassigned samples", std::move(missing));
}

/// Objective with every slack at its minimal feasible value for the fixed assignment.
inline double objective(std::span<const Sample> samples, const ModelParams& params,
                        const Assignment& assignment) {
    require_assigned(samples, assignment, params.clusters());
    const ScoreMatrix sm = score_matrix(samples, params);
    return regularizer(params) + slack_total(sm.scores, assignment.sample_cluster);
}

}  // namespace lmmc
