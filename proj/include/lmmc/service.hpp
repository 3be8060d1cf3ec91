#pragma once

// In-memory interactive sessions and their HTTP routes. Each session owns one
// dataset and runs at most one solve at a time on its own thread; readers get
// the last committed round.

#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "lmmc/harness.hpp"

namespace lmmc {

enum class session_status { idle, solving, error };

inline const char* to_string(session_status s) {
    switch (s) {
        case session_status::idle: return "idle";
        case session_status::solving: return "solving";
        case session_status::error: return "error";
    }
    return "unknown";
}

class unknown_session : public error {
public:
    using error::error;
};

class session_busy : public error {
public:
    using error::error;
};

/// One committed round as seen by readers.
struct SessionRound {
    std::size_t round = 0;
    ModelParams params;
    Assignment assignment;
    ConstraintSet constraints;
    std::optional<double> method_purity;  // simulation mode only
    std::optional<double> manual_purity;
    std::size_t moved_count = 0;
    double objective = 0.0;
};

class Session {
public:
    Session(std::string id, ExperimentConfig cfg, std::uint64_t seed, double lambda)
        : id_(std::move(id)), cfg_(std::move(cfg)), seed_(seed), spec_(spec_for(cfg_, lambda, seed)),
          data_(prepare_dataset(cfg_, seed)) {}

    ~Session() { join(); }

    const std::string& id() const { return id_; }
    const Dataset& dataset() const { return data_; }
    const SolveSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    bool simulation() const { return data_.labeled(); }

    session_status status() const {
        std::lock_guard lock(mu_);
        return status_;
    }

    std::string last_error() const {
        std::lock_guard lock(mu_);
        return error_;
    }

    std::size_t committed_rounds() const {
        std::lock_guard lock(mu_);
        return history_.size();
    }

    /// Latest committed round; throws session_busy before round 0 finishes.
    SessionRound current() const {
        std::lock_guard lock(mu_);
        if (history_.empty()) throw session_busy("session " + id_ + " has no clustering yet");
        return history_.back();
    }

    std::vector<SessionRound> history() const {
        std::lock_guard lock(mu_);
        return history_;
    }

    FeedbackLog log() const {
        std::lock_guard lock(mu_);
        return log_;
    }

    /// Records a batch against the current assignment. Throws session_busy,
    /// feedback_error or contradiction_error; a rejected batch leaves no trace.
    void post_feedback(FeedbackBatch batch) {
        std::lock_guard lock(mu_);
        require_idle_locked();
        if (history_.empty()) throw session_busy("session " + id_ + " has no clustering yet");
        check_batch(batch, data_.samples.size(), spec_.clusters);
        const std::size_t moved = batch.moved.size();
        log_.append(std::move(batch), history_.back().assignment.sample_cluster);
        pending_moves_ += moved;
    }

    /// Starts the next round on a worker thread.
    void start_round0() { launch(true); }
    void iterate() { launch(false); }

    /// Blocks until no solve is in flight.
    void wait() const {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return status_ != session_status::solving; });
    }

    nlohmann::json snapshot() const;

private:
    void require_idle_locked() const {
        if (status_ == session_status::solving) throw session_busy("a solve is in flight for session " + id_);
    }

    void join() {
        if (worker_.joinable()) worker_.join();
    }

    void launch(bool first) {
        {
            std::lock_guard lock(mu_);
            require_idle_locked();
            if (first && !history_.empty()) throw session_busy("round 0 already ran for session " + id_);
            if (!first && history_.empty()) throw session_busy("session " + id_ + " has no clustering yet");
            status_ = session_status::solving;
            error_.clear();
        }
        join();
        worker_ = std::thread([this, first] { run(first); });
    }

    void run(bool first) {
        try {
            SessionRound next;
            if (first) {
                const auto starts = codebook_starts(data_.samples, spec_.clusters, cfg_.starts, spec_.seed);
                const SolveReport rep = alternate_from_starts(data_.samples, {}, spec_, data_.dim(), starts);
                next = record(0, rep, {}, FeedbackLog{}, 0, rep.final_assignment);
            } else {
                FeedbackLog log;
                ModelParams warm;
                Assignment round0;
                std::size_t round = 0, moved = 0;
                {
                    std::lock_guard lock(mu_);
                    log = log_;
                    warm = history_.back().params;
                    round0 = history_.front().assignment;
                    round = history_.back().round + 1;
                    moved = pending_moves_;
                }
                const ConstraintSet cons = derive_constraints(log);
                const SolveReport rep = alternate(data_.samples, cons, spec_, warm);
                next = record(round, rep, cons, log, moved, round0);
            }
            std::lock_guard lock(mu_);
            history_.push_back(std::move(next));
            pending_moves_ = 0;
            status_ = session_status::idle;
        } catch (const std::exception& e) {
            std::lock_guard lock(mu_);
            status_ = session_status::error;
            error_ = e.what();
        }
        cv_.notify_all();
    }

    SessionRound record(std::size_t round, const SolveReport& rep, const ConstraintSet& cons, const FeedbackLog& log,
                        std::size_t moved, const Assignment& round0) const {
        SessionRound r;
        r.round = round;
        r.params = rep.final_params;
        r.assignment = rep.final_assignment;
        r.constraints = cons;
        r.moved_count = moved;
        r.objective = rep.objective_trace.back();
        if (simulation()) {
            r.method_purity = purity({rep.final_assignment.sample_cluster, data_.labels});
            r.manual_purity = manually_labeled_purity(round0, log, data_.labels);
        }
        return r;
    }

    std::string id_;
    ExperimentConfig cfg_;
    std::uint64_t seed_;
    SolveSpec spec_;
    Dataset data_;

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    session_status status_ = session_status::idle;
    std::string error_;
    std::vector<SessionRound> history_;
    FeedbackLog log_;
    std::size_t pending_moves_ = 0;
    std::thread worker_;
};

namespace detail {

inline nlohmann::json polyline(const Trajectory& tr) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : tr.points) pts.push_back({p.t, p.x, p.y});
    return pts;
}

inline nlohmann::json constraints_json(const ConstraintSet& c) {
    nlohmann::json cannot = nlohmann::json::array();
    for (const auto& [p, q] : c.cannot_pairs) cannot.push_back({p, q});
    return {{"must", c.must_groups}, {"cannot", cannot}};
}

inline nlohmann::json round_json(const SessionRound& r) {
    nlohmann::json j{{"round", r.round},
                     {"moved_count", r.moved_count},
                     {"constraint_must", r.constraints.must_groups.size()},
                     {"constraint_cannot", r.constraints.cannot_pairs.size()},
                     {"objective", r.objective}};
    if (r.method_purity) j["method_purity"] = *r.method_purity;
    if (r.manual_purity) j["manual_purity"] = *r.manual_purity;
    return j;
}

}  // namespace detail

inline nlohmann::json Session::snapshot() const {
    std::lock_guard lock(mu_);
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : history_) {
        nlohmann::json j = detail::round_json(r);
        j["assignment"] = r.assignment.sample_cluster;
        j["weights"] = r.params.weights;
        j["constraints"] = detail::constraints_json(r.constraints);
        rounds.push_back(std::move(j));
    }
    nlohmann::json batches = nlohmann::json::array();
    for (const auto& e : log_.entries()) batches.push_back({{"batch", to_json(e.batch)}, {"snapshot", e.snapshot}});
    return {{"id", id_},       {"seed", seed_},        {"lambda", spec_.lambda},
            {"status", to_string(status_)}, {"rounds", rounds}, {"feedback", batches}};
}

class SessionManager {
public:
    /// `base_dir` resolves relative data paths in session configs; snapshots
    /// are written under `snapshot_dir` when it is set.
    explicit SessionManager(std::filesystem::path base_dir = {}, std::filesystem::path snapshot_dir = {})
        : base_dir_(std::move(base_dir)), snapshot_dir_(std::move(snapshot_dir)) {}

    /// Body: {"config": {...}, "seed": n, "lambda": x}; seed defaults to the
    /// config's first seed, lambda to solve.lambda.
    std::shared_ptr<Session> create(const nlohmann::json& body) {
        if (!body.is_object() || !body.contains("config")) throw config_error("session body needs a 'config' object");
        const ExperimentConfig cfg = parse_config(body.at("config"), base_dir_);
        std::uint64_t seed = cfg.seeds.front();
        double lambda = cfg.solve.lambda;
        try {
            if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
            if (body.contains("lambda")) lambda = body.at("lambda").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("bad session parameter: ") + e.what());
        }
        if (!(lambda > 0.0)) throw config_error("lambda must be positive");
        std::string id;
        {
            std::lock_guard lock(mu_);
            id = "s" + std::to_string(++counter_);
        }
        auto s = std::make_shared<Session>(id, cfg, seed, lambda);
        {
            std::lock_guard lock(mu_);
            sessions_[id] = s;
        }
        s->start_round0();
        return s;
    }

    std::shared_ptr<Session> get(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw unknown_session("unknown session '" + id + "'");
        return it->second;
    }

    std::filesystem::path save_snapshot(const std::string& id) const {
        if (snapshot_dir_.empty()) throw config_error("server has no snapshot directory");
        const auto s = get(id);
        std::filesystem::create_directories(snapshot_dir_);
        const auto path = snapshot_dir_ / (id + ".json");
        write_file(path, s->snapshot().dump(2));
        return path;
    }

private:
    std::filesystem::path base_dir_;
    std::filesystem::path snapshot_dir_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t counter_ = 0;
};

namespace detail {

inline void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Maps core errors onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const unknown_session& e) {
        reply(res, 404, {{"error", e.what()}});
    } catch (const session_busy& e) {
        reply(res, 409, {{"error", e.what()}});
    } catch (const contradiction_error& e) {
        reply(res, 422, {{"error", e.what()}, {"ids", e.ids()}});
    } catch (const feedback_error& e) {
        reply(res, 400, {{"error", e.what()}, {"ids", e.ids()}});
    } catch (const config_error& e) {
        reply(res, 400, {{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
        reply(res, 400, {{"error", std::string("bad JSON: ") + e.what()}});
    } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
    }
}

inline nlohmann::json sample_summary(const Session& s, const SessionRound& r, std::size_t i) {
    const Sample& smp = s.dataset().samples[i];
    const std::size_t h = r.assignment.latent_choice.empty() ? 0 : r.assignment.latent_choice[i];
    nlohmann::json j{{"id", smp.id},
                     {"latent_tag", smp.variants[h].latent_tag},
                     {"polyline", polyline(s.dataset().scenes[i].focal)}};
    if (s.simulation()) j["label"] = s.dataset().label_names[static_cast<std::size_t>(s.dataset().labels[i])];
    return j;
}

}  // namespace detail

/// REST routes:
///   POST /sessions                       create (runs round 0 asynchronously)
///   GET  /sessions/{id}/status
///   GET  /sessions/{id}/clusters
///   GET  /sessions/{id}/samples/{sid}
///   POST /sessions/{id}/feedback         FeedbackBatch wire format
///   POST /sessions/{id}/iterate
///   GET  /sessions/{id}/curve            simulation mode only
///   GET  /sessions/{id}/snapshot, POST /sessions/{id}/snapshot (write to disk)
inline void install_routes(httplib::Server& srv, SessionManager& mgr) {
    using httplib::Request;
    using httplib::Response;

    srv.Post("/sessions", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.create(nlohmann::json::parse(req.body));
            detail::reply(res, 201, {{"id", s->id()}, {"status", to_string(s->status())}});
        });
    });

    srv.Get(R"(/sessions/([^/]+)/status)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            nlohmann::json j{{"id", s->id()}, {"status", to_string(s->status())}, {"rounds", s->committed_rounds()}};
            if (s->status() == session_status::error) j["error"] = s->last_error();
            detail::reply(res, 200, j);
        });
    });

    srv.Get(R"(/sessions/([^/]+)/clusters)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            const SessionRound r = s->current();
            nlohmann::json clusters = nlohmann::json::array();
            for (std::size_t t = 0; t < s->spec().clusters; ++t) {
                nlohmann::json members = nlohmann::json::array();
                for (std::size_t i = 0; i < r.assignment.sample_cluster.size(); ++i)
                    if (r.assignment.sample_cluster[i] == t) members.push_back(detail::sample_summary(*s, r, i));
                clusters.push_back({{"index", t}, {"samples", members}});
            }
            detail::reply(res, 200, {{"round", r.round}, {"clusters", clusters}});
        });
    });

    srv.Get(R"(/sessions/([^/]+)/samples/(\d+))", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            const SessionRound r = s->current();
            const std::size_t i = std::stoul(req.matches[2]);
            if (i >= s->dataset().samples.size()) throw unknown_session("unknown sample " + std::string(req.matches[2]));
            const SceneContext& sc = s->dataset().scenes[i];
            nlohmann::json variants = nlohmann::json::array();
            for (const auto& v : s->dataset().samples[i].variants)
                variants.push_back({{"latent_tag", v.latent_tag}, {"features", v.values}});
            nlohmann::json j = detail::sample_summary(*s, r, i);
            j["cluster"] = r.assignment.sample_cluster[i];
            j["focal"] = detail::polyline(sc.focal);
            j["nearest_person"] = sc.nearest_person ? detail::polyline(*sc.nearest_person) : nlohmann::json(nullptr);
            j["nearest_vehicle"] = sc.nearest_vehicle ? detail::polyline(*sc.nearest_vehicle) : nlohmann::json(nullptr);
            j["variants"] = variants;
            detail::reply(res, 200, j);
        });
    });

    srv.Post(R"(/sessions/([^/]+)/feedback)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            s->post_feedback(batch_from_json(nlohmann::json::parse(req.body)));
            detail::reply(res, 200, {{"accepted", true}, {"batches", s->log().size()}});
        });
    });

    srv.Post(R"(/sessions/([^/]+)/iterate)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            s->iterate();
            detail::reply(res, 202, {{"status", "solving"}, {"round", s->committed_rounds()}});
        });
    });

    srv.Get(R"(/sessions/([^/]+)/curve)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] {
            const auto s = mgr.get(req.matches[1]);
            if (!s->simulation()) throw config_error("purity curves need labeled data");
            nlohmann::json rounds = nlohmann::json::array();
            for (const auto& r : s->history()) rounds.push_back(detail::round_json(r));
            detail::reply(res, 200, {{"rounds", rounds}});
        });
    });

    srv.Get(R"(/sessions/([^/]+)/snapshot)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] { detail::reply(res, 200, mgr.get(req.matches[1])->snapshot()); });
    });

    srv.Post(R"(/sessions/([^/]+)/snapshot)", [&mgr](const Request& req, Response& res) {
        detail::guarded(res, [&] { detail::reply(res, 200, {{"path", mgr.save_snapshot(req.matches[1]).string()}}); });
    });
}

}  // namespace lmmc
