#pragma once

// User feedback rounds: keep/move/freeze batches, the constraints they imply,
// a simulated oracle user and the feedback loop driver.

#include <array>
#include <cctype>
#include <map>
#include <set>

#include <json.hpp>

#include "lmmc/evaluation.hpp"
#include "lmmc/seeding.hpp"

namespace lmmc {

struct Move {
    int id = 0;
    std::size_t source = 0;
    std::size_t target = 0;

    bool operator==(const Move&) const = default;
};

struct FeedbackBatch {
    std::map<std::size_t, std::vector<int>> kept;  // cluster -> samples marked correct
    std::vector<Move> moved;
    std::set<std::size_t> frozen;  // clusters declared pure

    bool empty() const;
    bool operator==(const FeedbackBatch&) const = default;
};

inline bool FeedbackBatch::empty() const {
    return moved.empty() && frozen.empty() &&
           std::all_of(kept.begin(), kept.end(), [](const auto& kv) { return kv.second.empty(); });
}

/// Throws feedback_error naming the offending ids.
inline void check_batch(const FeedbackBatch& b, std::size_t n_samples, std::size_t clusters) {
    std::vector<int> bad;
    std::set<int> seen;
    auto visit = [&](int id) {
        if (id < 0 || static_cast<std::size_t>(id) >= n_samples || !seen.insert(id).second) bad.push_back(id);
    };
    for (const auto& [c, ids] : b.kept) {
        if (c >= clusters) throw feedback_error("kept cluster " + std::to_string(c) + " out of range", {});
        for (int id : ids) visit(id);
    }
    for (const Move& mv : b.moved) {
        visit(mv.id);
        if (mv.source >= clusters || mv.target >= clusters || mv.source == mv.target) bad.push_back(mv.id);
    }
    for (std::size_t c : b.frozen)
        if (c >= clusters) throw feedback_error("frozen cluster " + std::to_string(c) + " out of range", {});
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        throw feedback_error("invalid feedback batch: repeated, unknown or self-moved samples", std::move(bad));
    }
}

// ----- wire format: {"kept":{"0":[ids]},"moved":[[id,src,dst]],"frozen":[clusters]} -----

inline nlohmann::json to_json(const FeedbackBatch& b) {
    nlohmann::json kept = nlohmann::json::object();
    for (const auto& [c, ids] : b.kept) kept[std::to_string(c)] = ids;
    nlohmann::json moved = nlohmann::json::array();
    for (const Move& mv : b.moved) moved.push_back({mv.id, mv.source, mv.target});
    return {{"kept", kept}, {"moved", moved}, {"frozen", b.frozen}};
}

inline FeedbackBatch batch_from_json(const nlohmann::json& j) {
    FeedbackBatch b;
    // the JSON library wraps negative numbers into size_t silently
    auto index = [](const nlohmann::json& v) {
        if (!v.is_number_unsigned()) throw config_error("cluster index " + v.dump() + " is not a non-negative integer");
        return v.get<std::size_t>();
    };
    try {
        if (!j.is_object()) throw config_error("feedback batch must be a JSON object");
        if (j.contains("kept"))
            for (const auto& [key, ids] : j.at("kept").items()) {
                std::size_t pos = 0;
                const unsigned long c = std::stoul(key, &pos);
                if (pos != key.size() || key.empty() || !std::isdigit(static_cast<unsigned char>(key[0]))) throw config_error("kept key '" + key + "' is not a cluster index");
                b.kept[c] = ids.get<std::vector<int>>();
            }
        if (j.contains("moved"))
            for (const auto& mv : j.at("moved")) {
                if (!mv.is_array() || mv.size() != 3) throw config_error("moved entries must be [id, source, target]");
                b.moved.push_back({mv[0].get<int>(), index(mv[1]), index(mv[2])});
            }
        if (j.contains("frozen")) {
            const auto& fr = j.at("frozen");
            if (!fr.is_array()) throw config_error("frozen must be an array of cluster indices");
            for (const auto& c : fr) b.frozen.insert(index(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed feedback batch: ") + e.what());
    } catch (const std::logic_error& e) {  // stoul
        throw config_error(std::string("malformed feedback batch: ") + e.what());
    }
    return b;
}

/// Append-only record of feedback batches, each with the assignment the user
/// was looking at (frozen clusters need their membership).
class FeedbackLog {
public:
    struct Entry {
        FeedbackBatch batch;
        std::vector<std::size_t> snapshot;  // sample -> cluster when the batch was made
    };

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Every sample a move has asserted an identity for, with the moves in order.
    std::map<int, std::vector<Move>> cumulative_corrections() const {
        std::map<int, std::vector<Move>> out;
        for (const auto& e : entries_)
            for (const Move& mv : e.batch.moved) out[mv.id].push_back(mv);
        return out;
    }

    /// Rejects (and does not record) a batch whose constraints contradict the
    /// log so far: throws contradiction_error.
    void append(FeedbackBatch batch, std::vector<std::size_t> snapshot);

private:
    std::vector<Entry> entries_;
};

namespace detail {

inline void batch_constraints(const FeedbackLog::Entry& e, std::vector<std::vector<int>>& must,
                              std::vector<std::pair<int, int>>& cannot) {
    const FeedbackBatch& b = e.batch;
    for (const auto& [c, ids] : b.kept)
        if (ids.size() >= 2) must.push_back(ids);
    for (const Move& mv : b.moved) {
        if (auto it = b.kept.find(mv.target); it != b.kept.end() && !it->second.empty()) {
            std::vector<int> g = it->second;
            g.push_back(mv.id);
            must.push_back(std::move(g));
        }
        if (auto it = b.kept.find(mv.source); it != b.kept.end())
            for (int q : it->second) cannot.emplace_back(mv.id, q);
    }
    for (std::size_t c : b.frozen) {
        std::vector<int> members;
        for (std::size_t i = 0; i < e.snapshot.size(); ++i)
            if (e.snapshot[i] == c) members.push_back(static_cast<int>(i));
        if (members.size() >= 2) must.push_back(std::move(members));
    }
}

inline ConstraintSet constraints_of(std::span<const FeedbackLog::Entry> entries) {
    std::vector<std::vector<int>> must;
    std::vector<std::pair<int, int>> cannot;
    for (const auto& e : entries) batch_constraints(e, must, cannot);
    return canonicalize(must, cannot);
}

}  // namespace detail

inline void FeedbackLog::append(FeedbackBatch batch, std::vector<std::size_t> snapshot) {
    entries_.push_back({std::move(batch), std::move(snapshot)});
    try {
        detail::constraints_of(entries_);
    } catch (...) {
        entries_.pop_back();
        throw;
    }
}

/// Kept samples of a cluster form a must-link group; a moved sample joins the
/// kept group of its target and is cannot-linked to every kept sample of its
/// source; a frozen cluster is one must-link group over its snapshot members.
/// Groups from different batches merge only through shared samples.
inline ConstraintSet derive_constraints(const FeedbackLog& log) { return detail::constraints_of(log.entries()); }

namespace detail {

struct ClusterCensus {
    std::vector<std::vector<int>> members;                 // per cluster, ascending ids
    std::vector<std::map<int, std::size_t>> label_counts;  // per cluster
    std::vector<std::optional<int>> dominant;              // majority label, lowest id on ties
};

inline ClusterCensus census(std::span<const std::size_t> cluster_of, std::span<const int> labels,
                            std::size_t clusters) {
    ClusterCensus c;
    c.members.resize(clusters);
    c.label_counts.resize(clusters);
    c.dominant.resize(clusters);
    for (std::size_t i = 0; i < cluster_of.size(); ++i) {
        c.members[cluster_of[i]].push_back(static_cast<int>(i));
        ++c.label_counts[cluster_of[i]][labels[i]];
    }
    for (std::size_t t = 0; t < clusters; ++t) {
        std::size_t best = 0;
        for (const auto& [label, count] : c.label_counts[t])
            if (count > best) {
                best = count;
                c.dominant[t] = label;
            }
    }
    return c;
}

// Where an oracle user sends a sample of `label` found in `source`: the other
// cluster dominated by that label holding most of it (lowest index on ties).
inline std::optional<std::size_t> home_cluster(const ClusterCensus& c, int label, std::size_t source) {
    std::optional<std::size_t> best;
    std::size_t best_count = 0;
    for (std::size_t t = 0; t < c.members.size(); ++t) {
        if (t == source || c.dominant[t] != label) continue;
        const std::size_t count = c.label_counts[t].at(label);
        if (!best || count > best_count) {
            best = t;
            best_count = count;
        }
    }
    return best;
}

template <typename T>
std::vector<T> pick_uniform(std::vector<T> pool, std::size_t count, std::mt19937_64& rng) {
    count = std::min(count, pool.size());
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
        std::swap(pool[i], pool[d(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace detail

/// Oracle user. Per cluster: keeps up to m random samples of the dominant
/// label, moves up to c random misclustered samples to the other cluster
/// dominated by their true label, and freezes clusters with nothing to fix.
/// A misclustered sample whose label dominates no other cluster is not moved:
/// the only targets left would must-link it to another label.
inline FeedbackBatch simulate_user(const Assignment& assignment, std::span<const int> labels, std::size_t m,
                                   std::size_t c, std::uint64_t seed) {
    const auto& cluster_of = assignment.sample_cluster;
    if (labels.size() != cluster_of.size()) throw dimension_error(cluster_of.size(), labels.size());
    std::size_t clusters = 0;
    for (std::size_t t : cluster_of) clusters = std::max(clusters, t + 1);
    const detail::ClusterCensus cen = detail::census(cluster_of, labels, clusters);

    std::mt19937_64 rng(seed);
    FeedbackBatch b;
    for (std::size_t t = 0; t < clusters; ++t) {
        if (cen.members[t].empty()) continue;
        std::vector<int> dominant, wrong;
        for (int id : cen.members[t]) (labels[id] == *cen.dominant[t] ? dominant : wrong).push_back(id);
        b.kept[t] = detail::pick_uniform(dominant, m, rng);
        if (wrong.empty()) {
            b.frozen.insert(t);
            continue;
        }
        std::vector<int> movable;
        for (int id : wrong)
            if (detail::home_cluster(cen, labels[id], t)) movable.push_back(id);
        for (int id : detail::pick_uniform(movable, c, rng))
            b.moved.push_back({id, t, *detail::home_cluster(cen, labels[id], t)});
    }
    return b;
}

/// Purity of the round-0 assignment after applying only the logged moves:
/// each moved sample goes to the round-0 cluster an oracle user would pick
/// for its label, or stays if there is none.
inline double manually_labeled_purity(const Assignment& round0, const FeedbackLog& log, std::span<const int> labels) {
    std::vector<std::size_t> corrected = round0.sample_cluster;
    std::size_t clusters = 0;
    for (std::size_t t : corrected) clusters = std::max(clusters, t + 1);
    const detail::ClusterCensus cen = detail::census(round0.sample_cluster, labels, clusters);
    for (const auto& [id, moves] : log.cumulative_corrections()) {
        const std::size_t from = round0.sample_cluster[static_cast<std::size_t>(id)];
        if (cen.dominant[from] == labels[id]) continue;
        if (auto home = detail::home_cluster(cen, labels[id], from)) corrected[static_cast<std::size_t>(id)] = *home;
    }
    return purity({corrected, std::vector<int>(labels.begin(), labels.end())});
}

/// Per-round seed for the simulated user.
inline std::uint64_t round_seed(std::uint64_t seed, std::size_t round) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(round)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

struct RoundRecord {
    std::size_t round = 0;
    double method_purity = 0.0;
    double manual_purity = 0.0;
    std::size_t moved_count = 0;
    std::size_t constraint_must = 0;    // canonical must-link groups
    std::size_t constraint_cannot = 0;  // canonical cannot-link pairs
    double objective = 0.0;
    Assignment assignment;
    ConstraintSet constraints;
};

struct LoopReport {
    std::vector<RoundRecord> rounds;
    FeedbackLog log;
    ModelParams final_params;
    bool reached_pure = false;
};

struct LoopOptions {
    std::size_t m = 5;
    std::size_t c = 2;
    std::size_t max_rounds = 8;
    std::uint64_t seed = 0;
    std::size_t starts = 8;  // codebook starting partitions for round 0; 0 keeps only the all-ones start
};

namespace detail {

inline RoundRecord make_record(std::size_t round, const SolveReport& rep, const ConstraintSet& cons,
                               std::span<const int> labels, double manual, std::size_t moved) {
    RoundRecord r;
    r.round = round;
    r.method_purity = purity({rep.final_assignment.sample_cluster, std::vector<int>(labels.begin(), labels.end())});
    r.manual_purity = manual;
    r.moved_count = moved;
    r.constraint_must = cons.must_groups.size();
    r.constraint_cannot = cons.cannot_pairs.size();
    r.objective = rep.objective_trace.back();
    r.assignment = rep.final_assignment;
    r.constraints = cons;
    return r;
}

}  // namespace detail

/// Round 0 clusters without constraints; every later round asks the simulated
/// user about the previous assignment, re-derives the cumulative constraints
/// and re-runs the alternation warm-started from the previous weights. Stops
/// at purity 1.0 or after max_rounds feedback rounds.
inline LoopReport run_feedback_loop(std::span<const Sample> samples, std::span<const int> labels,
                                    const SolveSpec& spec, const LoopOptions& opt) {
    if (labels.size() != samples.size()) throw dimension_error(samples.size(), labels.size());
    if (samples.empty()) throw config_error("feedback loop needs samples");
    const std::size_t dim = samples.front().dim();
    LoopReport out;

    const auto starts = codebook_starts(samples, spec.clusters, opt.starts, spec.seed);
    SolveReport rep = alternate_from_starts(samples, {}, spec, dim, starts);
    const Assignment round0 = rep.final_assignment;
    out.rounds.push_back(detail::make_record(0, rep, {}, labels, manually_labeled_purity(round0, out.log, labels), 0));

    for (std::size_t round = 1; round <= opt.max_rounds && out.rounds.back().method_purity < 1.0; ++round) {
        FeedbackBatch batch = simulate_user(rep.final_assignment, labels, opt.m, opt.c, round_seed(opt.seed, round));
        const std::size_t moved = batch.moved.size();
        out.log.append(std::move(batch), rep.final_assignment.sample_cluster);
        const ConstraintSet cons = derive_constraints(out.log);
        rep = alternate(samples, cons, spec, rep.final_params);
        out.rounds.push_back(detail::make_record(round, rep, cons, labels,
                                                 manually_labeled_purity(round0, out.log, labels), moved));
    }
    out.final_params = rep.final_params;
    out.reached_pure = out.rounds.back().method_purity >= 1.0;
    return out;
}

}  // namespace lmmc
