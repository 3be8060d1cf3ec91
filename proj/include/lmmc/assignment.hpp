#pragma once

// Constrained cluster assignment: given per-sample per-cluster costs, choose
// one cluster per sample so that must-link groups move together, cannot-link
// pairs are split and every cluster size stays within [L, U].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lmmc/types.hpp"

namespace lmmc {

struct ConstraintSet {
    std::vector<std::vector<int>> must_groups;      // disjoint, sorted, size >= 2, ordered by first id
    std::vector<std::pair<int, int>> cannot_pairs;  // first < second, sorted, unique

    bool empty() const { return must_groups.empty() && cannot_pairs.empty(); }
    bool operator==(const ConstraintSet&) const = default;
};

struct BalanceBounds {
    std::size_t lower = 0;
    std::size_t upper = 0;
};

namespace detail {

class union_find {
public:
    explicit union_find(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Merges overlapping must groups transitively, deduplicates cannot pairs and
/// rejects any cannot pair that ends up inside one merged group.
inline ConstraintSet canonicalize(const std::vector<std::vector<int>>& raw_must,
                                  const std::vector<std::pair<int, int>>& raw_cannot) {
    std::map<int, std::size_t> index;
    auto slot = [&](int id) {
        auto [it, inserted] = index.emplace(id, index.size());
        return it->second;
    };
    for (const auto& g : raw_must)
        for (int id : g) slot(id);
    for (const auto& [p, q] : raw_cannot) {
        slot(p);
        slot(q);
    }

    detail::union_find uf(index.size());
    for (const auto& g : raw_must)
        for (std::size_t j = 1; j < g.size(); ++j) uf.unite(index[g[0]], index[g[j]]);

    std::map<std::size_t, std::vector<int>> components;
    for (const auto& [id, ix] : index) components[uf.find(ix)].push_back(id);

    ConstraintSet out;
    for (auto& [root, members] : components) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        out.must_groups.push_back(std::move(members));
    }
    std::sort(out.must_groups.begin(), out.must_groups.end());

    std::vector<int> offending;
    for (auto [p, q] : raw_cannot) {
        if (q < p) std::swap(p, q);
        if (p == q || uf.find(index[p]) == uf.find(index[q])) {
            offending.push_back(p);
            offending.push_back(q);
            continue;
        }
        out.cannot_pairs.emplace_back(p, q);
    }
    if (!offending.empty()) {
        std::sort(offending.begin(), offending.end());
        offending.erase(std::unique(offending.begin(), offending.end()), offending.end());
        throw contradiction_error("must-link and cannot-link on the same samples", std::move(offending));
    }
    std::sort(out.cannot_pairs.begin(), out.cannot_pairs.end());
    out.cannot_pairs.erase(std::unique(out.cannot_pairs.begin(), out.cannot_pairs.end()),
                           out.cannot_pairs.end());
    return out;
}

/// L = floor(f_L N / K), U = ceil(f_U N / K), nudged back into feasibility when
/// rounding leaves K L > N or K U < N. `note` receives a message when nudged.
inline BalanceBounds bounds_from_fractions(std::size_t n, std::size_t k, double lower_fraction,
                                           double upper_fraction, std::string* note = nullptr) {
    if (k == 0) throw config_error("cluster count must be positive");
    if (lower_fraction < 0.0 || upper_fraction < lower_fraction)
        throw config_error("bounds fractions must satisfy 0 <= f_L <= f_U");
    const double avg = static_cast<double>(n) / static_cast<double>(k);
    BalanceBounds b;
    b.lower = static_cast<std::size_t>(std::floor(lower_fraction * avg + 1e-9));
    b.upper = static_cast<std::size_t>(std::ceil(upper_fraction * avg - 1e-9));
    std::string msg;
    if (k * b.lower > n) {
        b.lower = n / k;
        msg += "lower bound lowered to " + std::to_string(b.lower) + "; ";
    }
    if (k * b.upper < n) {
        b.upper = (n + k - 1) / k;
        msg += "upper bound raised to " + std::to_string(b.upper) + "; ";
    }
    if (note) *note = msg;
    return b;
}

/// C[i][a] = sum_{r != a} max(0, 1 - S[i][a] + S[i][r]).
inline Matrix<double> assignment_cost(const Matrix<double>& scores) {
    const std::size_t n = scores.rows();
    const std::size_t k = scores.cols();
    Matrix<double> cost(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a) {
            double c = 0.0;
            for (std::size_t r = 0; r < k; ++r)
                if (r != a) c += std::max(0.0, 1.0 - scores(i, a) + scores(i, r));
            cost(i, a) = c;
        }
    return cost;
}

/// Must groups and leftover singletons contracted into atomic units, with
/// cannot-link lifted to unit level.
struct UnitPartition {
    std::vector<std::vector<std::size_t>> members;   // ordered by smallest member
    std::vector<std::size_t> unit_of;                // sample -> unit
    std::vector<std::vector<std::size_t>> conflicts; // unit -> conflicting units
    std::vector<std::size_t> group_of_unit;          // unit -> must group index, or unassigned

    std::size_t size() const { return members.size(); }
};

inline UnitPartition make_units(std::size_t n, const ConstraintSet& cons) {
    auto check_id = [n](int id) {
        if (id < 0 || static_cast<std::size_t>(id) >= n)
            throw id_error("constraint references unknown sample", {id});
    };
    std::vector<std::size_t> group_of(n, unassigned);
    for (std::size_t g = 0; g < cons.must_groups.size(); ++g)
        for (int id : cons.must_groups[g]) {
            check_id(id);
            group_of[id] = g;
        }

    UnitPartition up;
    up.unit_of.assign(n, unassigned);
    std::vector<std::size_t> unit_of_group(cons.must_groups.size(), unassigned);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = group_of[i];
        if (g != unassigned && unit_of_group[g] != unassigned) {
            up.unit_of[i] = unit_of_group[g];
            up.members[unit_of_group[g]].push_back(i);
            continue;
        }
        up.unit_of[i] = up.members.size();
        up.members.push_back({i});
        up.group_of_unit.push_back(g);
        if (g != unassigned) unit_of_group[g] = up.unit_of[i];
    }

    up.conflicts.resize(up.size());
    for (auto [p, q] : cons.cannot_pairs) {
        check_id(p);
        check_id(q);
        const std::size_t a = up.unit_of[p];
        const std::size_t b = up.unit_of[q];
        if (a == b) throw contradiction_error("cannot-link inside a must group", {p, q});
        up.conflicts[a].push_back(b);
        up.conflicts[b].push_back(a);
    }
    for (auto& c : up.conflicts) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return up;
}

struct AssignmentResult {
    bool feasible = false;
    Assignment assignment;
    double total_cost = 0.0;
};

namespace detail {

inline Matrix<double> unit_costs(const UnitPartition& up, const Matrix<double>& cost) {
    Matrix<double> uc(up.size(), cost.cols());
    for (std::size_t u = 0; u < up.size(); ++u)
        for (std::size_t t = 0; t < cost.cols(); ++t) {
            double c = 0.0;
            for (std::size_t i : up.members[u]) c += cost(i, t);
            uc(u, t) = c;
        }
    return uc;
}

inline AssignmentResult expand(const UnitPartition& up, const ConstraintSet& cons,
                               const Matrix<double>& cost, const std::vector<std::size_t>& unit_cluster) {
    AssignmentResult r;
    r.feasible = true;
    r.assignment.sample_cluster.assign(up.unit_of.size(), unassigned);
    r.assignment.group_cluster.assign(cons.must_groups.size(), unassigned);
    for (std::size_t u = 0; u < up.size(); ++u) {
        for (std::size_t i : up.members[u]) r.assignment.sample_cluster[i] = unit_cluster[u];
        if (up.group_of_unit[u] != unassigned) r.assignment.group_cluster[up.group_of_unit[u]] = unit_cluster[u];
    }
    for (std::size_t i = 0; i < up.unit_of.size(); ++i) r.total_cost += cost(i, r.assignment.sample_cluster[i]);
    return r;
}

}  // namespace detail

inline constexpr double default_exact_state_limit = 1e7;

/// Number of leaf states an exhaustive search over `units` units and `k`
/// clusters would visit, saturating at `cap`.
inline double enumeration_states(std::size_t units, std::size_t k, double cap) {
    double states = 1.0;
    for (std::size_t u = 0; u < units && states <= cap; ++u) states *= static_cast<double>(k);
    return states;
}

/// Globally optimal assignment by depth-first enumeration over units with
/// cost and capacity pruning. Among equal-cost optima the lexicographically
/// smallest sample->cluster vector wins.
inline AssignmentResult solve_exact(const Matrix<double>& cost, const ConstraintSet& cons,
                                    const BalanceBounds& bounds,
                                    double state_limit = default_exact_state_limit) {
    const std::size_t n = cost.rows();
    const std::size_t k = cost.cols();
    const UnitPartition up = make_units(n, cons);
    const std::size_t nu = up.size();
    if (enumeration_states(nu, k, state_limit) > state_limit)
        throw instance_too_large("exact assignment would enumerate more than " +
                                 std::to_string(static_cast<long long>(state_limit)) +
                                 " states; use solve_heuristic");

    const Matrix<double> uc = detail::unit_costs(up, cost);
    std::vector<std::size_t> usize(nu);
    std::vector<double> rest_min(nu + 1, 0.0);
    std::vector<std::size_t> rest_size(nu + 1, 0);
    for (std::size_t u = nu; u-- > 0;) {
        usize[u] = up.members[u].size();
        double m = uc(u, 0);
        for (std::size_t t = 1; t < k; ++t) m = std::min(m, uc(u, t));
        rest_min[u] = rest_min[u + 1] + m;
        rest_size[u] = rest_size[u + 1] + usize[u];
    }

    std::vector<std::size_t> cl(nu, unassigned), best;
    std::vector<std::size_t> size(k, 0);
    double best_cost = std::numeric_limits<double>::infinity();
    auto better = [&](double c) {
        return best.empty() || c < best_cost - 1e-12 * std::max(1.0, std::abs(best_cost));
    };

    auto capacity_ok = [&](std::size_t remaining) {
        std::size_t deficit = 0, room = 0;
        for (std::size_t t = 0; t < k; ++t) {
            if (size[t] < bounds.lower) deficit += bounds.lower - size[t];
            room += bounds.upper - size[t];
        }
        return deficit <= remaining && remaining <= room;
    };

    auto dfs = [&](auto&& self, std::size_t u, double acc) -> void {
        if (u == nu) {
            if (better(acc)) {
                best_cost = acc;
                best = cl;
            }
            return;
        }
        if (!better(acc + rest_min[u])) return;
        for (std::size_t t = 0; t < k; ++t) {
            if (size[t] + usize[u] > bounds.upper) continue;
            bool clash = false;
            for (std::size_t v : up.conflicts[u])
                if (v < u && cl[v] == t) {
                    clash = true;
                    break;
                }
            if (clash) continue;
            cl[u] = t;
            size[t] += usize[u];
            if (capacity_ok(rest_size[u + 1])) self(self, u + 1, acc + uc(u, t));
            size[t] -= usize[u];
            cl[u] = unassigned;
        }
    };
    if (capacity_ok(n)) dfs(dfs, 0, 0.0);

    if (best.empty() && nu > 0) return {};
    if (nu == 0 && k * bounds.lower > 0) return {};
    return detail::expand(up, cons, cost, best);
}

namespace detail {

// Mutable search state over units for the heuristic solver.
class unit_search {
public:
    unit_search(const UnitPartition& up, const Matrix<double>& uc, const BalanceBounds& b)
        : up_(up), uc_(uc), b_(b), k_(uc.cols()), cl_(up.size(), unassigned), size_(k_, 0), usize_(up.size()) {
        for (std::size_t u = 0; u < up.size(); ++u) usize_[u] = up.members[u].size();
    }

    std::size_t units() const { return up_.size(); }
    std::size_t clusters() const { return k_; }
    std::size_t cluster(std::size_t u) const { return cl_[u]; }
    const std::vector<std::size_t>& clusters_of_units() const { return cl_; }
    double cost() const { return cost_; }

    long penalty(std::size_t s) const {
        long p = 0;
        if (s < b_.lower) p += static_cast<long>(b_.lower - s);
        if (s > b_.upper) p += static_cast<long>(s - b_.upper);
        return p;
    }

    long conflicts_in(std::size_t u, std::size_t t, std::size_t skip = unassigned) const {
        long c = 0;
        for (std::size_t v : up_.conflicts[u])
            if (v != skip && cl_[v] == t) ++c;
        return c;
    }

    long violation() const {
        long v = 0;
        for (std::size_t t = 0; t < k_; ++t) v += penalty(size_[t]);
        for (std::size_t u = 0; u < units(); ++u)
            for (std::size_t w : up_.conflicts[u])
                if (w > u && cl_[u] != unassigned && cl_[u] == cl_[w]) ++v;
        for (std::size_t u = 0; u < units(); ++u)
            if (cl_[u] == unassigned) v += static_cast<long>(usize_[u]);
        return v;
    }

    void place(std::size_t u, std::size_t t) {
        if (cl_[u] != unassigned) {
            size_[cl_[u]] -= usize_[u];
            cost_ -= uc_(u, cl_[u]);
        }
        cl_[u] = t;
        size_[t] += usize_[u];
        cost_ += uc_(u, t);
    }

    std::size_t size_of(std::size_t t) const { return size_[t]; }
    std::size_t unit_size(std::size_t u) const { return usize_[u]; }
    double unit_cost(std::size_t u, std::size_t t) const { return uc_(u, t); }
    const BalanceBounds& bounds() const { return b_; }

    std::pair<long, double> move_delta(std::size_t u, std::size_t t) const {
        const std::size_t a = cl_[u];
        const std::size_t s = usize_[u];
        long dv = penalty(size_[a] - s) + penalty(size_[t] + s) - penalty(size_[a]) - penalty(size_[t]);
        dv += conflicts_in(u, t) - conflicts_in(u, a);
        return {dv, uc_(u, t) - uc_(u, a)};
    }

    std::pair<long, double> swap_delta(std::size_t u, std::size_t v) const {
        const std::size_t a = cl_[u];
        const std::size_t b = cl_[v];
        const std::size_t su = usize_[u];
        const std::size_t sv = usize_[v];
        long dv = penalty(size_[a] - su + sv) + penalty(size_[b] - sv + su) - penalty(size_[a]) - penalty(size_[b]);
        dv += conflicts_in(u, b, v) - conflicts_in(u, a) + conflicts_in(v, a, u) - conflicts_in(v, b);
        return {dv, uc_(u, b) + uc_(v, a) - uc_(u, a) - uc_(v, b)};
    }

private:
    const UnitPartition& up_;
    const Matrix<double>& uc_;
    BalanceBounds b_;
    std::size_t k_;
    std::vector<std::size_t> cl_;
    std::vector<std::size_t> size_;
    std::vector<std::size_t> usize_;
    double cost_ = 0.0;
};

// Large units first (they are the hard part of the packing), then by regret.
// A non-null rng breaks ties between equal-size units at random instead.
inline void greedy_fill(unit_search& st, std::mt19937_64* rng = nullptr) {
    const std::size_t nu = st.units();
    const std::size_t k = st.clusters();
    std::vector<double> regret(nu, 0.0);
    for (std::size_t u = 0; u < nu; ++u) {
        double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
        for (std::size_t t = 0; t < k; ++t) {
            const double c = st.unit_cost(u, t);
            if (c < b1) {
                b2 = b1;
                b1 = c;
            } else if (c < b2) {
                b2 = c;
            }
        }
        regret[u] = k > 1 ? b2 - b1 : 0.0;
    }
    std::vector<std::size_t> order(nu);
    std::iota(order.begin(), order.end(), 0);
    if (rng) {
        std::shuffle(order.begin(), order.end(), *rng);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return st.unit_size(a) > st.unit_size(b); });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (st.unit_size(a) != st.unit_size(b)) return st.unit_size(a) > st.unit_size(b);
            return regret[a] > regret[b];
        });
    }

    std::vector<std::size_t> by_cost(k);
    for (std::size_t u : order) {
        std::iota(by_cost.begin(), by_cost.end(), 0);
        std::stable_sort(by_cost.begin(), by_cost.end(),
                         [&](std::size_t a, std::size_t b) { return st.unit_cost(u, a) < st.unit_cost(u, b); });
        std::size_t pick = unassigned, no_clash = unassigned, least = by_cost[0];
        long least_clash = std::numeric_limits<long>::max();
        for (std::size_t t : by_cost) {
            const long c = st.conflicts_in(u, t);
            if (c == 0 && st.size_of(t) + st.unit_size(u) <= st.bounds().upper) {
                pick = t;
                break;
            }
            if (c == 0 && no_clash == unassigned) no_clash = t;
            if (c < least_clash) {
                least_clash = c;
                least = t;
            }
        }
        if (pick == unassigned) pick = no_clash != unassigned ? no_clash : least;
        st.place(u, pick);
    }
}

// Steepest descent on the violation measure, with seeded random kicks when stuck.
inline bool repair(unit_search& st, std::mt19937_64& rng) {
    const std::size_t nu = st.units();
    const std::size_t k = st.clusters();
    long v = st.violation();
    std::size_t kicks = 0;
    const std::size_t max_steps = 50 * nu + 100;
    for (std::size_t step = 0; v > 0 && step < max_steps; ++step) {
        long best_dv = 0;
        double best_dc = 0.0;
        std::size_t bu = unassigned, bt = unassigned, bv = unassigned;
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t t = 0; t < k; ++t) {
                if (t == st.cluster(u)) continue;
                auto [dv, dc] = st.move_delta(u, t);
                if (dv < best_dv || (dv == best_dv && dv < 0 && dc < best_dc)) {
                    best_dv = dv;
                    best_dc = dc;
                    bu = u;
                    bt = t;
                }
            }
        if (bu == unassigned) {
            for (std::size_t u = 0; u < nu; ++u)
                for (std::size_t w = u + 1; w < nu; ++w) {
                    if (st.cluster(u) == st.cluster(w)) continue;
                    auto [dv, dc] = st.swap_delta(u, w);
                    if (dv < best_dv || (dv == best_dv && dv < 0 && dc < best_dc)) {
                        best_dv = dv;
                        best_dc = dc;
                        bu = u;
                        bv = w;
                    }
                }
        }
        if (bu != unassigned && bv == unassigned) {
            st.place(bu, bt);
        } else if (bu != unassigned) {
            const std::size_t a = st.cluster(bu);
            st.place(bu, st.cluster(bv));
            st.place(bv, a);
        } else {
            if (++kicks > 4 * nu + 20 || k < 2) break;
            std::uniform_int_distribution<std::size_t> pick_unit(0, nu - 1);
            std::uniform_int_distribution<std::size_t> pick_cluster(0, k - 2);
            const std::size_t u = pick_unit(rng);
            std::size_t t = pick_cluster(rng);
            if (t >= st.cluster(u)) ++t;
            st.place(u, t);
        }
        v = st.violation();
    }
    return v == 0;
}

// First-improvement single moves and pairwise swaps that keep feasibility.
inline void local_search(unit_search& st, std::size_t budget) {
    const std::size_t nu = st.units();
    const std::size_t k = st.clusters();
    const double eps = 1e-12;
    std::size_t moves = 0;
    bool improved = true;
    while (improved && moves < budget) {
        improved = false;
        for (std::size_t u = 0; u < nu && moves < budget; ++u)
            for (std::size_t t = 0; t < k && moves < budget; ++t) {
                if (t == st.cluster(u)) continue;
                auto [dv, dc] = st.move_delta(u, t);
                if (dv == 0 && dc < -eps) {
                    st.place(u, t);
                    ++moves;
                    improved = true;
                }
            }
        for (std::size_t u = 0; u < nu && moves < budget; ++u)
            for (std::size_t w = u + 1; w < nu && moves < budget; ++w) {
                if (st.cluster(u) == st.cluster(w)) continue;
                auto [dv, dc] = st.swap_delta(u, w);
                if (dv == 0 && dc < -eps) {
                    const std::size_t a = st.cluster(u);
                    st.place(u, st.cluster(w));
                    st.place(w, a);
                    ++moves;
                    improved = true;
                }
            }
    }
}

}  // namespace detail

inline constexpr std::size_t repair_attempts = 8;

/// Greedy fill, violation repair, then feasible local search. When `start` is
/// given (a sample->cluster vector honoring the must groups) the first attempt
/// starts there instead of the greedy fill. A failed repair is retried from a
/// randomized greedy fill, up to repair_attempts in total; only then is the
/// instance reported infeasible, so "infeasible" here can be a false negative.
inline AssignmentResult solve_heuristic(const Matrix<double>& cost, const ConstraintSet& cons,
                                        const BalanceBounds& bounds, std::uint64_t seed,
                                        const std::vector<std::size_t>* start = nullptr) {
    const std::size_t n = cost.rows();
    const std::size_t k = cost.cols();
    const UnitPartition up = make_units(n, cons);
    if (k * bounds.lower > n || k * bounds.upper < n) return {};
    const Matrix<double> uc = detail::unit_costs(up, cost);
    for (std::size_t u = 0; u < up.size(); ++u)
        if (up.members[u].size() > bounds.upper) return {};

    std::mt19937_64 rng(seed);
    std::optional<detail::unit_search> found;
    for (std::size_t attempt = 0; attempt < repair_attempts && !found; ++attempt) {
        detail::unit_search st(up, uc, bounds);
        if (attempt == 0 && start && start->size() == n) {
            for (std::size_t u = 0; u < up.size(); ++u) {
                const std::size_t t = (*start)[up.members[u].front()];
                st.place(u, t < k ? t : 0);
            }
        } else {
            detail::greedy_fill(st, attempt == 0 ? nullptr : &rng);
        }
        if (detail::repair(st, rng)) found.emplace(std::move(st));
    }
    if (!found) return {};
    detail::local_search(*found, 10 * std::max<std::size_t>(n, 1));
    return detail::expand(up, cons, cost, found->clusters_of_units());
}

enum class violation_kind { unassigned, must_split, cannot_joined, below_lower, above_upper };

struct Violation {
    violation_kind kind;
    std::string message;
    std::vector<int> ids;
};

/// Empty iff every sample sits in exactly one cluster, every must group is
/// co-assigned, every cannot pair is split and all sizes lie in [L, U].
inline std::vector<Violation> validate(const Assignment& assignment, const ConstraintSet& cons,
                                       const BalanceBounds& bounds, std::size_t clusters) {
    std::vector<Violation> out;
    const auto& sc = assignment.sample_cluster;
    const std::size_t n = sc.size();
    auto cluster_of = [&](int id) -> std::size_t {
        return id >= 0 && static_cast<std::size_t>(id) < n ? sc[id] : unassigned;
    };

    std::vector<int> missing;
    for (std::size_t i = 0; i < n; ++i)
        if (sc[i] >= clusters) missing.push_back(static_cast<int>(i));
    if (!missing.empty())
        out.push_back({violation_kind::unassigned, "samples without a valid cluster", missing});

    for (std::size_t g = 0; g < cons.must_groups.size(); ++g) {
        const auto& grp = cons.must_groups[g];
        std::size_t expect = cluster_of(grp.front());
        if (g < assignment.group_cluster.size() && assignment.group_cluster[g] != unassigned)
            expect = assignment.group_cluster[g];
        for (int id : grp)
            if (cluster_of(id) != expect) {
                out.push_back({violation_kind::must_split, "must group " + std::to_string(g) + " split", grp});
                break;
            }
    }
    for (auto [p, q] : cons.cannot_pairs) {
        const std::size_t a = cluster_of(p);
        if (a != unassigned && a == cluster_of(q))
            out.push_back({violation_kind::cannot_joined,
                           "cannot-link pair shares cluster " + std::to_string(a), {p, q}});
    }

    std::vector<std::size_t> size(clusters, 0);
    for (std::size_t t : sc)
        if (t < clusters) ++size[t];
    for (std::size_t t = 0; t < clusters; ++t) {
        if (size[t] < bounds.lower)
            out.push_back({violation_kind::below_lower,
                           "cluster " + std::to_string(t) + " has " + std::to_string(size[t]) + " < L", {}});
        if (size[t] > bounds.upper)
            out.push_back({violation_kind::above_upper,
                           "cluster " + std::to_string(t) + " has " + std::to_string(size[t]) + " > U", {}});
    }
    return out;
}

inline double assignment_total(const Matrix<double>& cost, const std::vector<std::size_t>& cluster_of) {
    double c = 0.0;
    for (std::size_t i = 0; i < cost.rows(); ++i) c += cost(i, cluster_of[i]);
    return c;
}

}  // namespace lmmc
