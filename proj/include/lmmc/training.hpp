#pragma once

// Alternating descent: constrained assignment with latent inference, then a
// weight update that linearizes the concave part of the objective (CCCP) and
// solves the convex remainder by dual coordinate descent or a cutting-plane
// bundle method.

#include <chrono>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>

#include "lmmc/assignment.hpp"
#include "lmmc/model.hpp"

namespace lmmc {

enum class assignment_method { automatic, exact, heuristic };
enum class weight_solver { dual_coordinate, bundle };

struct SolveSpec {
    std::size_t clusters = 2;
    double lambda = 1.0;
    double lower_fraction = 0.9;
    double upper_fraction = 1.1;
    std::size_t max_outer_iters = 50;
    double outer_tol = 1e-4;
    std::size_t inner_max_iters = 500;
    double inner_tol = 1e-6;
    std::uint64_t seed = 0;
    assignment_method method = assignment_method::automatic;
    double exact_state_limit = default_exact_state_limit;
    std::size_t max_cccp_rounds = 5;
    weight_solver solver = weight_solver::dual_coordinate;
    double inner_gap = 1e-2;  // relative duality gap that ends one convex solve
};

inline void check_spec(const SolveSpec& s) {
    if (s.clusters < 2) throw config_error("K must be at least 2");
    if (!(s.lambda > 0.0)) throw config_error("lambda must be positive");
    if (!(s.outer_tol > 0.0) || !(s.inner_tol > 0.0)) throw config_error("tolerances must be positive");
    if (s.max_outer_iters == 0 || s.inner_max_iters == 0) throw config_error("iteration caps must be positive");
    if (!(s.inner_gap > 0.0)) throw config_error("inner_gap must be positive");
    if (!(s.lower_fraction >= 0.0) || !(s.upper_fraction >= s.lower_fraction))
        throw config_error("bounds fractions must satisfy 0 <= f_L <= f_U");
}

struct SolveReport {
    ModelParams final_params;
    Assignment final_assignment;
    std::vector<double> objective_trace;
    double slack_total = 0.0;
    std::size_t outer_iters = 0;
    double wall_time = 0.0;  // seconds
    bool converged = false;
    std::size_t start = 0;  // which starting point won; 0 is the all-ones init
};

struct ProgressEvent {
    std::size_t iteration = 0;
    double objective = 0.0;
};

using ProgressSink = std::function<void(const ProgressEvent&)>;

inline ModelParams init_params(std::size_t dim, std::size_t clusters, double lambda = 1.0) {
    if (dim < 1 || clusters < 1) throw config_error("init_params needs D >= 1 and K >= 1");
    return {std::vector<Vector>(clusters, Vector(dim, 1.0)), lambda};
}

/// Dual variables carried from one weight update to the next within an
/// alternation; laid out as N x K x V_i with the assigned-cluster slot unused.
struct DualState {
    std::vector<std::size_t> cluster_of;
    std::vector<std::size_t> offset;
    Vector alpha;
    double lambda = 0.0;
};

namespace detail {

// Convex surrogate of the objective with each sample's assigned-cluster latent
// variant pinned: lambda/2 |W|^2 + (1/K) sum_i sum_{r != a} [1 - w_a.phi(h_i) + max_h w_r.phi(h)]_+
class pinned_risk {
public:
    pinned_risk(std::span<const Sample> samples, std::span<const std::size_t> cluster_of,
                std::span<const std::size_t> pinned, std::size_t clusters, std::size_t dim)
        : samples_(samples), cluster_of_(cluster_of), pinned_(pinned), k_(clusters), d_(dim) {}

    // Returns R(W) and writes a subgradient into `grad` (flattened K x D).
    double evaluate(const Vector& w, Vector& grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const double inv_k = 1.0 / static_cast<double>(k_);
        double risk = 0.0;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const auto& vars = samples_[i].variants;
            const std::size_t a = cluster_of_[i];
            const Vector& own = vars[pinned_[i]].values;
            const double own_score = dot_block(w, a, own);
            for (std::size_t r = 0; r < k_; ++r) {
                if (r == a) continue;
                double best = dot_block(w, r, vars[0].values);
                std::size_t arg = 0;
                for (std::size_t h = 1; h < vars.size(); ++h) {
                    const double s = dot_block(w, r, vars[h].values);
                    if (s > best) {
                        best = s;
                        arg = h;
                    }
                }
                const double margin = 1.0 - own_score + best;
                if (margin <= 0.0) continue;
                risk += margin;
                const Vector& other = vars[arg].values;
                for (std::size_t j = 0; j < d_; ++j) {
                    grad[a * d_ + j] -= inv_k * own[j];
                    grad[r * d_ + j] += inv_k * other[j];
                }
            }
        }
        return risk * inv_k;
    }

private:
    double dot_block(const Vector& w, std::size_t t, const Vector& phi) const {
        const double* wt = w.data() + t * d_;
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += wt[j] * phi[j];
        return s;
    }

    std::span<const Sample> samples_;
    std::span<const std::size_t> cluster_of_;
    std::span<const std::size_t> pinned_;
    std::size_t k_;
    std::size_t d_;
};

// min over the simplex of (1/2 lambda) a' G a - b' a by pairwise (SMO-style) steps.
inline void simplex_qp(const std::vector<Vector>& gram, const Vector& offset, double lambda, Vector& alpha,
                       double tol) {
    const std::size_t m = alpha.size();
    Vector grad(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += gram[i][j] * alpha[j];
        grad[i] = s / lambda - offset[i];
    }
    const std::size_t max_steps = 200 * m + 1000;
    for (std::size_t step = 0; step < max_steps; ++step) {
        std::size_t up = 0, down = m;
        for (std::size_t i = 1; i < m; ++i)
            if (grad[i] < grad[up]) up = i;
        for (std::size_t i = 0; i < m; ++i)
            if (alpha[i] > 0.0 && (down == m || grad[i] > grad[down])) down = i;
        if (down == m || up == down) return;
        const double slope = grad[down] - grad[up];
        if (slope <= tol) return;
        const double curv = (gram[up][up] + gram[down][down] - 2.0 * gram[up][down]) / lambda;
        double delta = curv > 0.0 ? slope / curv : alpha[down];
        delta = std::min(delta, alpha[down]);
        if (delta <= 0.0) return;
        alpha[up] += delta;
        alpha[down] -= delta;
        if (alpha[down] < 1e-300) alpha[down] = 0.0;
        for (std::size_t i = 0; i < m; ++i) grad[i] += delta * (gram[i][up] - gram[i][down]) / lambda;
    }
}

// Cutting-plane bundle method on lambda/2 |W|^2 + R(W); returns the best
// evaluated iterate, which is never worse than `start`. Stops when the
// relative gap between the best value and the model's lower bound is <= gap.
inline Vector bundle_minimize(const pinned_risk& risk, const Vector& start, double lambda, std::size_t max_iters,
                              double gap) {
    constexpr std::size_t idle_limit = 20;  // drop cuts unused for this many iterations
    const std::size_t n = start.size();
    Vector w = start;
    Vector grad(n);
    Vector best_w = start;
    double best_j = std::numeric_limits<double>::infinity();

    std::vector<Vector> cuts;
    std::vector<Vector> gram;
    Vector offset;
    Vector alpha;
    std::vector<std::size_t> idle;

    for (std::size_t it = 0; it < max_iters; ++it) {
        const double r = risk.evaluate(w, grad);
        const double j = 0.5 * lambda * squared_norm(w) + r;
        if (!std::isfinite(j)) throw numeric_error("bundle method produced a non-finite objective");
        if (j < best_j) {
            best_j = j;
            best_w = w;
        }

        const std::size_t m = cuts.size();
        cuts.push_back(grad);
        offset.push_back(r - dot(grad, w));
        for (std::size_t c = 0; c < m; ++c) gram[c].push_back(dot(cuts[c], grad));
        gram.emplace_back(m + 1);
        for (std::size_t c = 0; c < m; ++c) gram[m][c] = gram[c][m];
        gram[m][m] = squared_norm(grad);
        alpha.push_back(m == 0 ? 1.0 : 0.0);
        idle.push_back(0);

        const double target = gap * std::max(1.0, std::abs(best_j));
        simplex_qp(gram, offset, lambda, alpha, 1e-3 * target);

        std::fill(w.begin(), w.end(), 0.0);
        double lower = 0.0;
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            if (alpha[c] == 0.0) continue;
            for (std::size_t q = 0; q < n; ++q) w[q] -= alpha[c] * cuts[c][q] / lambda;
            lower += alpha[c] * offset[c];
        }
        lower -= 0.5 * lambda * squared_norm(w);
        if (best_j - lower <= target) break;

        // prune cuts that have carried no weight for a while
        std::vector<std::size_t> keep;
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            idle[c] = alpha[c] > 0.0 ? 0 : idle[c] + 1;
            if (idle[c] < idle_limit) keep.push_back(c);
        }
        if (keep.size() < cuts.size()) {
            std::vector<Vector> cuts2, gram2;
            Vector offset2, alpha2;
            std::vector<std::size_t> idle2;
            for (std::size_t a : keep) {
                cuts2.push_back(std::move(cuts[a]));
                offset2.push_back(offset[a]);
                alpha2.push_back(alpha[a]);
                idle2.push_back(idle[a]);
                Vector row;
                row.reserve(keep.size());
                for (std::size_t b : keep) row.push_back(gram[a][b]);
                gram2.push_back(std::move(row));
            }
            cuts = std::move(cuts2);
            gram = std::move(gram2);
            offset = std::move(offset2);
            alpha = std::move(alpha2);
            idle = std::move(idle2);
        }
    }
    return best_w;
}

// Dual coordinate descent on the same convex problem. Each (sample, rival
// cluster) pair owns one slack shared by all of the sample's variants, so its
// dual block is {alpha_h >= 0, sum_h alpha_h <= 1/K} and
// W = (1/lambda) sum alpha_h (phi_pinned in block a - phi_h in block r).
// Blocks are visited in a seeded random order; within a block the most
// violating single or pairwise step is taken until the block is optimal.
// Stops at relative duality gap <= gap, or when the best primal value gains
// less than gap/2 over `stall_passes` passes; returns the best primal iterate.
class dual_coordinate_solver {
public:
    static constexpr std::size_t stall_passes = 10;

    dual_coordinate_solver(std::span<const Sample> samples, std::span<const std::size_t> cluster_of,
                           std::size_t clusters, std::size_t dim, double lambda, DualState& state)
        : samples_(samples), cluster_of_(cluster_of), k_(clusters), d_(dim), lambda_(lambda), state_(state) {
        const std::size_t n = samples.size();
        bool fresh = state.offset.size() != n + 1 || state.cluster_of.size() != n || state.lambda != lambda;
        for (std::size_t i = 0; !fresh && i < n; ++i)
            fresh = state.offset[i + 1] - state.offset[i] != clusters * samples[i].variants.size();
        if (fresh) {
            state.offset.assign(n + 1, 0);
            for (std::size_t i = 0; i < n; ++i) state.offset[i + 1] = state.offset[i] + clusters * samples[i].variants.size();
            state.alpha.assign(state.offset.back(), 0.0);
        } else {
            // blocks of a moved sample belong to a different problem
            for (std::size_t i = 0; i < n; ++i)
                if (state.cluster_of[i] != cluster_of[i])
                    std::fill(state.alpha.begin() + static_cast<std::ptrdiff_t>(state.offset[i]),
                              state.alpha.begin() + static_cast<std::ptrdiff_t>(state.offset[i + 1]), 0.0);
        }
        state.cluster_of.assign(cluster_of.begin(), cluster_of.end());
        state.lambda = lambda;
        norms_.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (const auto& v : samples[i].variants) norms_[i].push_back(squared_norm(v.values));
    }

    // Dual variables are kept between calls so that re-pinned rounds start
    // from the previous dual point.
    Vector solve(std::span<const std::size_t> pinned, std::size_t max_passes, double gap, std::uint64_t seed) {
        const pinned_risk risk(samples_, cluster_of_, pinned, k_, d_);
        rebuild_weights(pinned);
        Vector grad(w_.size());
        Vector best_w = w_;
        double best_p = std::numeric_limits<double>::infinity();
        Vector history;  // best primal value per pass

        std::vector<std::pair<std::size_t, std::size_t>> blocks;
        for (std::size_t i = 0; i < samples_.size(); ++i)
            for (std::size_t r = 0; r < k_; ++r)
                if (r != cluster_of_[i]) blocks.emplace_back(i, r);
        std::mt19937_64 rng(seed);
        const double cap = 1.0 / static_cast<double>(k_);

        for (std::size_t pass = 0; pass < max_passes; ++pass) {
            const double primal = 0.5 * lambda_ * squared_norm(w_) + risk.evaluate(w_, grad);
            if (!std::isfinite(primal)) throw numeric_error("dual coordinate descent produced a non-finite objective");
            if (primal < best_p) {
                best_p = primal;
                best_w = w_;
            }
            history.push_back(best_p);
            const double dual =
                std::accumulate(state_.alpha.begin(), state_.alpha.end(), 0.0) - 0.5 * lambda_ * squared_norm(w_);
            const double scale = gap * std::max(1.0, std::abs(best_p));
            if (best_p - dual <= scale) break;
            if (pass >= stall_passes && history[pass - stall_passes] - best_p < 0.5 * scale) break;

            std::shuffle(blocks.begin(), blocks.end(), rng);
            for (const auto& [i, r] : blocks) optimize_block(i, r, pinned[i], cap, 1e-3 * gap);
        }
        return best_w;
    }

private:
    double* block_alpha(std::size_t i, std::size_t r) {
        return state_.alpha.data() + state_.offset[i] + r * samples_[i].variants.size();
    }

    double block_dot(std::size_t t, const Vector& phi) const {
        const double* wt = w_.data() + t * d_;
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += wt[j] * phi[j];
        return s;
    }

    void axpy_block(std::size_t t, double coef, const Vector& phi) {
        double* wt = w_.data() + t * d_;
        for (std::size_t j = 0; j < d_; ++j) wt[j] += coef * phi[j];
    }

    void rebuild_weights(std::span<const std::size_t> pinned) {
        w_.assign(k_ * d_, 0.0);
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const auto& vars = samples_[i].variants;
            const std::size_t a = cluster_of_[i];
            for (std::size_t r = 0; r < k_; ++r) {
                if (r == a) continue;
                const double* al = block_alpha(i, r);
                for (std::size_t h = 0; h < vars.size(); ++h) {
                    if (al[h] == 0.0) continue;
                    axpy_block(a, al[h] / lambda_, vars[pinned[i]].values);
                    axpy_block(r, -al[h] / lambda_, vars[h].values);
                }
            }
        }
    }

    // move `delta` of dual mass onto variant h (negative removes it)
    void shift(std::size_t i, std::size_t r, std::size_t pin, std::size_t h, double delta, double* al) {
        al[h] += delta;
        if (al[h] < 1e-300) al[h] = 0.0;
        axpy_block(cluster_of_[i], delta / lambda_, samples_[i].variants[pin].values);
        axpy_block(r, -delta / lambda_, samples_[i].variants[h].values);
    }

    void optimize_block(std::size_t i, std::size_t r, std::size_t pin, double cap, double tol) {
        const auto& vars = samples_[i].variants;
        const std::size_t nv = vars.size();
        const std::size_t a = cluster_of_[i];
        double* al = block_alpha(i, r);
        grad_.resize(nv);
        for (std::size_t step = 0; step < 4 * nv + 4; ++step) {
            const double own = block_dot(a, vars[pin].values);
            double used = 0.0;
            std::size_t up = 0, down = nv;
            for (std::size_t h = 0; h < nv; ++h) {
                grad_[h] = 1.0 - own + block_dot(r, vars[h].values);
                used += al[h];
                if (grad_[h] > grad_[up]) up = h;
                if (al[h] > 0.0 && (down == nv || grad_[h] < grad_[down])) down = h;
            }
            const double room = cap - used;
            // candidate steps and their first-order gains
            const double gain_up = room > 0.0 && grad_[up] > 0.0 ? grad_[up] : 0.0;
            const double gain_down = down < nv && grad_[down] < 0.0 ? -grad_[down] : 0.0;
            const double gain_pair = down < nv && down != up ? grad_[up] - grad_[down] : 0.0;
            const double best = std::max({gain_up, gain_down, gain_pair});
            if (best <= tol) return;
            if (best == gain_pair) {
                const Vector& pu = vars[up].values;
                const Vector& pd = vars[down].values;
                double curv = 0.0;
                for (std::size_t j = 0; j < d_; ++j) curv += (pu[j] - pd[j]) * (pu[j] - pd[j]);
                const double delta = curv > 0.0 ? std::min(lambda_ * gain_pair / curv, al[down]) : al[down];
                shift(i, r, pin, down, -delta, al);
                shift(i, r, pin, up, delta, al);
            } else {
                const std::size_t h = best == gain_up ? up : down;
                const double curv = (norms_[i][pin] + norms_[i][h]) / lambda_;
                double delta = curv > 0.0 ? grad_[h] / curv : (best == gain_up ? room : -al[h]);
                delta = best == gain_up ? std::min(delta, room) : std::max(delta, -al[h]);
                shift(i, r, pin, h, delta, al);
            }
        }
    }

    std::span<const Sample> samples_;
    std::span<const std::size_t> cluster_of_;
    std::size_t k_;
    std::size_t d_;
    double lambda_;
    DualState& state_;
    std::vector<Vector> norms_;
    Vector w_;
    Vector grad_;
};

inline Vector flatten(const ModelParams& p) {
    Vector w;
    w.reserve(p.clusters() * p.dim());
    for (const auto& wt : p.weights) w.insert(w.end(), wt.begin(), wt.end());
    return w;
}

inline ModelParams unflatten(const Vector& w, std::size_t clusters, std::size_t dim, double lambda) {
    ModelParams p{std::vector<Vector>(clusters, Vector(dim)), lambda};
    for (std::size_t t = 0; t < clusters; ++t)
        std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(t * dim), dim, p.weights[t].begin());
    return p;
}

}  // namespace detail

/// With the assignment fixed, lowers the objective over W. The result never
/// scores worse than `warm` under the same assignment.
inline ModelParams update_weights(std::span<const Sample> samples, const Assignment& assignment,
                                  const SolveSpec& spec, const ModelParams& warm, DualState* state = nullptr) {
    const std::size_t k = warm.clusters();
    const std::size_t d = warm.dim();
    if (samples.empty()) return {std::vector<Vector>(k, Vector(d, 0.0)), spec.lambda};
    require_assigned(samples, assignment, k);

    ModelParams current = warm;
    current.lambda = spec.lambda;
    double current_obj = objective(samples, current, assignment);
    if (!std::isfinite(current_obj)) throw numeric_error("non-finite objective at warm start");

    std::vector<std::size_t> pinned(samples.size());
    DualState local;
    std::optional<detail::dual_coordinate_solver> dcd;
    if (spec.solver == weight_solver::dual_coordinate)
        dcd.emplace(samples, assignment.sample_cluster, k, d, spec.lambda, state ? *state : local);
    for (std::size_t round = 0; round < spec.max_cccp_rounds; ++round) {
        bool repinned = round == 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const std::size_t h = score(samples[i], current.weights[assignment.sample_cluster[i]]).best_variant;
            repinned = repinned || h != pinned[i];
            pinned[i] = h;
        }
        // same pins, same convex problem: the linearization has reached a fixed point
        if (!repinned) break;
        Vector w;
        if (dcd) {
            w = dcd->solve(pinned, spec.inner_max_iters, spec.inner_gap, spec.seed + round);
        } else {
            const detail::pinned_risk risk(samples, assignment.sample_cluster, pinned, k, d);
            w = detail::bundle_minimize(risk, detail::flatten(current), spec.lambda, spec.inner_max_iters,
                                        spec.inner_gap);
        }
        ModelParams next = detail::unflatten(w, k, d, spec.lambda);
        const double next_obj = objective(samples, next, assignment);
        if (!std::isfinite(next_obj))
            throw numeric_error("non-finite objective after weight update (previous " +
                                std::to_string(current_obj) + ")");
        if (next_obj > current_obj) break;
        const double gain = current_obj - next_obj;
        current = std::move(next);
        current_obj = next_obj;
        if (gain < spec.inner_tol * std::max(1.0, std::abs(current_obj))) break;
    }
    return current;
}

namespace detail {

inline bool all_rows_flat(const Matrix<double>& s) {
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t t = 1; t < s.cols(); ++t)
            if (std::abs(s(i, t) - s(i, 0)) > 1e-12 * std::max(1.0, std::abs(s(i, 0)))) return false;
    return true;
}

}  // namespace detail

inline AssignmentResult solve_assignment(const Matrix<double>& cost, const ConstraintSet& cons,
                                         const BalanceBounds& bounds, const SolveSpec& spec,
                                         const std::vector<std::size_t>* previous = nullptr) {
    bool exact = spec.method == assignment_method::exact;
    if (spec.method == assignment_method::automatic) {
        const UnitPartition up = make_units(cost.rows(), cons);
        exact = enumeration_states(up.size(), cost.cols(), spec.exact_state_limit) <= spec.exact_state_limit;
    }
    if (exact) return solve_exact(cost, cons, bounds, spec.exact_state_limit);
    AssignmentResult best = solve_heuristic(cost, cons, bounds, spec.seed);
    if (previous) {
        AssignmentResult warm = solve_heuristic(cost, cons, bounds, spec.seed, previous);
        if (warm.feasible && (!best.feasible || warm.total_cost < best.total_cost)) best = std::move(warm);
    }
    return best;
}

/// Alternates assignment and weight updates until the relative objective
/// change drops below outer_tol.
inline SolveReport alternate(std::span<const Sample> samples, const ConstraintSet& cons, const SolveSpec& spec,
                             const ModelParams& init, const ProgressSink& progress = {}) {
    const auto started = std::chrono::steady_clock::now();
    check_spec(spec);
    const std::size_t n = samples.size();
    const std::size_t k = spec.clusters;
    if (init.clusters() != k) throw config_error("initial parameters have the wrong cluster count");
    for (const auto& s : samples) {
        check_sample(s);
        if (s.dim() != init.dim()) throw dimension_error(init.dim(), s.dim());
    }

    std::string note;
    const BalanceBounds bounds = bounds_from_fractions(n, k, spec.lower_fraction, spec.upper_fraction, &note);

    SolveReport rep;
    ModelParams w = init;
    w.lambda = spec.lambda;
    Assignment current;
    DualState dual;
    double prev_obj = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t it = 0; it < spec.max_outer_iters; ++it) {
        const ScoreMatrix sm = score_matrix(samples, w);
        const Matrix<double> cost = assignment_cost(sm.scores);
        AssignmentResult ar;
        if (it == 0 && n > 0 && detail::all_rows_flat(sm.scores)) {
            // Identical clusters: seed by sample id round-robin, within bounds and constraints.
            Matrix<double> rr(n, k, 1.0);
            for (std::size_t i = 0; i < n; ++i) rr(i, i % k) = 0.0;
            ar = solve_heuristic(rr, cons, bounds, spec.seed);
            if (ar.feasible) ar.total_cost = assignment_total(cost, ar.assignment.sample_cluster);
        } else {
            ar = solve_assignment(cost, cons, bounds, spec, it > 0 ? &current.sample_cluster : nullptr);
        }
        if (!ar.feasible) throw infeasible_error("no assignment satisfies the constraints and balance bounds");
        if (it > 0) {
            const double keep = assignment_total(cost, current.sample_cluster);
            if (keep < ar.total_cost) ar.assignment = current;
        }
        current = std::move(ar.assignment);

        w = update_weights(samples, current, spec, w, &dual);
        const double obj = objective(samples, w, current);
        if (!std::isfinite(obj)) throw numeric_error("non-finite objective at outer iteration " + std::to_string(it));
        rep.objective_trace.push_back(obj);
        rep.outer_iters = it + 1;
        if (progress) progress({it, obj});
        if (it > 0 && std::abs(prev_obj - obj) <= spec.outer_tol * std::max(std::abs(prev_obj), 1e-12)) {
            rep.converged = true;
            break;
        }
        prev_obj = obj;
    }

    const ScoreMatrix final_scores = score_matrix(samples, w);
    current.latent_choice.resize(n);
    for (std::size_t i = 0; i < n; ++i) current.latent_choice[i] = final_scores.variant(i, current.sample_cluster[i]);
    rep.slack_total = slack_total(final_scores.scores, current.sample_cluster);
    rep.final_params = std::move(w);
    rep.final_assignment = std::move(current);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
}

}  // namespace lmmc
