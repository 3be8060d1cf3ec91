#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmmc {

using Vector = std::vector<double>;

inline constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();

// ----- errors -----

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class dimension_error : public error {
public:
    dimension_error(std::size_t expected, std::size_t actual)
        : error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)),
          expected_(expected), actual_(actual) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

// Carries the sample ids involved so callers can surface them (CLI, service).
class id_error : public error {
public:
    id_error(const std::string& what, std::vector<int> ids)
        : error(what + format_ids(ids)), ids_(std::move(ids)) {}

    const std::vector<int>& ids() const noexcept { return ids_; }

private:
    static std::string format_ids(const std::vector<int>& ids) {
        std::string out = " [";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(ids[i]);
        }
        return out + "]";
    }

    std::vector<int> ids_;
};

class contradiction_error : public id_error {
public:
    using id_error::id_error;
};

class unassigned_error : public id_error {
public:
    using id_error::id_error;
};

// Malformed user feedback (duplicate ids, move onto its own source, unknown cluster).
class feedback_error : public id_error {
public:
    using id_error::id_error;
};

class infeasible_error : public error {
public:
    using error::error;
};

class instance_too_large : public error {
public:
    using error::error;
};

class numeric_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

// ----- small dense helpers -----

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const Vector& a) { return dot(a, a); }

// Row-major dense matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const T* row(std::size_t r) const { return data_.data() + r * cols_; }
    T* row(std::size_t r) { return data_.data() + r * cols_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// ----- domain types -----

/// One latent configuration h of a sample: the feature vector phi(x, h).
struct FeatureVariant {
    Vector values;
    std::string latent_tag;
};

/// One clusterable unit. Within a dataset, ids are dense: samples[i].id == i.
struct Sample {
    int id = 0;
    std::vector<FeatureVariant> variants;
    std::optional<int> label;  // evaluation only

    std::size_t dim() const { return variants.empty() ? 0 : variants.front().values.size(); }
};

inline void check_sample(const Sample& s) {
    if (s.variants.empty())
        throw error("sample " + std::to_string(s.id) + " has no feature variants");
    const std::size_t d = s.dim();
    for (const auto& v : s.variants) {
        if (v.values.size() != d) throw dimension_error(d, v.values.size());
        for (double x : v.values)
            if (!std::isfinite(x))
                throw numeric_error("sample " + std::to_string(s.id) + " has a non-finite feature");
    }
}

struct ModelParams {
    std::vector<Vector> weights;  // one per cluster
    double lambda = 1.0;

    std::size_t clusters() const { return weights.size(); }
    std::size_t dim() const { return weights.empty() ? 0 : weights.front().size(); }
};

inline void check_params(const ModelParams& p) {
    if (p.clusters() < 1) throw error("model needs at least one weight vector");
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw error("lambda must be positive");
    for (const auto& w : p.weights) {
        if (w.size() != p.dim()) throw dimension_error(p.dim(), w.size());
        for (double x : w)
            if (!std::isfinite(x)) throw numeric_error("non-finite weight component");
    }
}

/// y_it and e_mt encoded as indices; latent_choice is the variant used by the
/// assigned cluster's score.
struct Assignment {
    std::vector<std::size_t> sample_cluster;
    std::vector<std::size_t> group_cluster;
    std::vector<std::size_t> latent_choice;

    bool operator==(const Assignment&) const = default;
};

}  // namespace lmmc
