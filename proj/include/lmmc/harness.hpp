#pragma once

// Experiment driver: config parsing, lambda grid sweeps, multi-seed feedback
// curves and their CSV/JSON exports.
//
// Best-lambda selection reads the ground-truth labels (argmax of mean purity).
// That mirrors how such sweeps are usually reported, but it is not an
// unsupervised model-selection rule.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "lmmc/dataset.hpp"
#include "lmmc/feedback.hpp"
#include "lmmc/synthetic.hpp"

namespace lmmc {

struct ExperimentConfig {
    std::optional<std::string> trajectory_file;  // otherwise synthetic
    SyntheticSpec synthetic;
    VariantSpec variants{20, 5, false, true, false};
    FeatureConfig features;
    SolveSpec solve;  // clusters, bounds fractions and solver knobs; lambda is used by "once"
    std::vector<double> lambda_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
    std::size_t m = 5;
    std::size_t c = 2;
    std::size_t max_rounds = 8;
    std::vector<std::uint64_t> seeds{0};
    std::size_t starts = 8;
    std::size_t workers = 0;  // 0: one per hardware thread
};

inline void check_config(const ExperimentConfig& cfg) {
    check_spec(cfg.solve);
    if (!cfg.trajectory_file) check_synthetic(cfg.synthetic);
    if (cfg.lambda_grid.empty()) throw config_error("lambda_grid must not be empty");
    for (double l : cfg.lambda_grid)
        if (!(l > 0.0) || !std::isfinite(l)) throw config_error("lambda_grid values must be positive");
    if (cfg.seeds.empty()) throw config_error("seeds must not be empty");
    if (cfg.variants.window_frames == 0) throw config_error("window_frames must be positive");
    if (cfg.features.speed_components == 0 || cfg.features.distance_bins == 0 || cfg.features.appearance_components == 0)
        throw config_error("feature component counts must be positive");
}

namespace detail {

// Reads `key` into `out` when present and erases it, so leftovers are unknown keys.
template <typename T>
void take(nlohmann::json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    out = obj.at(key).get<T>();
    obj.erase(key);
}

inline void reject_leftovers(const nlohmann::json& obj, const std::string& where) {
    if (!obj.empty()) throw config_error("unknown key '" + obj.begin().key() + "' in " + where);
}

inline nlohmann::json object_or_empty(nlohmann::json& parent, const char* key) {
    if (!parent.contains(key)) return nlohmann::json::object();
    nlohmann::json out = parent.at(key);
    parent.erase(key);
    if (!out.is_object()) throw config_error(std::string("'") + key + "' must be an object");
    return out;
}

inline assignment_method parse_method(const std::string& s) {
    if (s == "automatic") return assignment_method::automatic;
    if (s == "exact") return assignment_method::exact;
    if (s == "heuristic") return assignment_method::heuristic;
    throw config_error("unknown assignment method '" + s + "'");
}

inline weight_solver parse_solver(const std::string& s) {
    if (s == "dual_coordinate") return weight_solver::dual_coordinate;
    if (s == "bundle") return weight_solver::bundle;
    throw config_error("unknown weight solver '" + s + "'");
}

}  // namespace detail

/// `base_dir` resolves a relative trajectory_file.
inline ExperimentConfig parse_config(nlohmann::json doc, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig cfg;
    try {
        if (!doc.is_object()) throw config_error("config must be a JSON object");
        nlohmann::json data = detail::object_or_empty(doc, "data");
        if (data.contains("trajectory_file")) {
            std::filesystem::path p = data.at("trajectory_file").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            cfg.trajectory_file = p.string();
            data.erase("trajectory_file");
        }
        nlohmann::json syn = detail::object_or_empty(data, "synthetic");
        detail::reject_leftovers(data, "data");
        if (cfg.trajectory_file && !syn.empty()) throw config_error("data needs either trajectory_file or synthetic");
        detail::take(syn, "n_classes", cfg.synthetic.n_classes);
        detail::take(syn, "samples_per_class", cfg.synthetic.samples_per_class);
        detail::take(syn, "segment_frames", cfg.synthetic.segment_frames);
        detail::take(syn, "min_track_frames", cfg.synthetic.min_track_frames);
        detail::take(syn, "max_track_frames", cfg.synthetic.max_track_frames);
        detail::take(syn, "position_noise", cfg.synthetic.position_noise);
        detail::take(syn, "regime_noise", cfg.synthetic.regime_noise);
        detail::take(syn, "seed", cfg.synthetic.seed);
        detail::reject_leftovers(syn, "data.synthetic");

        nlohmann::json var = detail::object_or_empty(doc, "variants");
        detail::take(var, "window_frames", cfg.variants.window_frames);
        detail::take(var, "stride_frames", cfg.variants.stride_frames);
        detail::take(var, "role_swap", cfg.variants.role_swap);
        detail::take(var, "latent_windows", cfg.variants.latent_windows);
        detail::take(var, "use_appearance", cfg.variants.use_appearance);
        detail::reject_leftovers(var, "variants");

        nlohmann::json feat = detail::object_or_empty(doc, "features");
        detail::take(feat, "speed_components", cfg.features.speed_components);
        detail::take(feat, "appearance_components", cfg.features.appearance_components);
        detail::take(feat, "distance_bins", cfg.features.distance_bins);
        detail::take(feat, "seed", cfg.features.seed);
        detail::reject_leftovers(feat, "features");

        nlohmann::json solve = detail::object_or_empty(doc, "solve");
        detail::take(solve, "lambda", cfg.solve.lambda);
        detail::take(solve, "max_outer_iters", cfg.solve.max_outer_iters);
        detail::take(solve, "outer_tol", cfg.solve.outer_tol);
        detail::take(solve, "inner_max_iters", cfg.solve.inner_max_iters);
        detail::take(solve, "inner_tol", cfg.solve.inner_tol);
        detail::take(solve, "inner_gap", cfg.solve.inner_gap);
        detail::take(solve, "max_cccp_rounds", cfg.solve.max_cccp_rounds);
        detail::take(solve, "exact_state_limit", cfg.solve.exact_state_limit);
        if (solve.contains("assignment")) {
            cfg.solve.method = detail::parse_method(solve.at("assignment").get<std::string>());
            solve.erase("assignment");
        }
        if (solve.contains("weight_solver")) {
            cfg.solve.solver = detail::parse_solver(solve.at("weight_solver").get<std::string>());
            solve.erase("weight_solver");
        }
        detail::reject_leftovers(solve, "solve");

        detail::take(doc, "K", cfg.solve.clusters);
        if (doc.contains("bounds_fractions")) {
            const auto f = doc.at("bounds_fractions").get<std::vector<double>>();
            if (f.size() != 2) throw config_error("bounds_fractions must be [f_L, f_U]");
            cfg.solve.lower_fraction = f[0];
            cfg.solve.upper_fraction = f[1];
            doc.erase("bounds_fractions");
        }
        detail::take(doc, "lambda_grid", cfg.lambda_grid);
        detail::take(doc, "m", cfg.m);
        detail::take(doc, "c", cfg.c);
        detail::take(doc, "max_rounds", cfg.max_rounds);
        detail::take(doc, "seeds", cfg.seeds);
        detail::take(doc, "starts", cfg.starts);
        detail::take(doc, "workers", cfg.workers);
        detail::reject_leftovers(doc, "config");
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("bad config value: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("cannot parse " + path + ": " + e.what());
    }
    return parse_config(std::move(doc), std::filesystem::path(path).parent_path());
}

/// Dataset for one seed: synthetic data is regenerated with seed offset
/// `seed`; a trajectory file is the same for every seed.
inline Dataset prepare_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.trajectory_file) return build_dataset(load_trajectory_file(*cfg.trajectory_file), cfg.variants, cfg.features);
    SyntheticSpec s = cfg.synthetic;
    s.seed += seed;
    return build_dataset(generate_synthetic(s).file, cfg.variants, cfg.features);
}

inline SolveSpec spec_for(const ExperimentConfig& cfg, double lambda, std::uint64_t seed) {
    SolveSpec s = cfg.solve;
    s.lambda = lambda;
    s.seed = seed;
    return s;
}

/// Runs tasks [0, count) on `workers` threads; the first exception is rethrown
/// after every worker has stopped.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ----- grid -----

struct GridRow {
    double lambda = 0.0;
    std::uint64_t seed = 0;
    double purity = 0.0;
    double nmi = 0.0;
    double rand_index = 0.0;
    double objective = 0.0;
    std::size_t start = 0;
    Assignment assignment;
};

struct GridReport {
    std::vector<GridRow> rows;  // lambda-major, in grid and seed order
    double best_lambda = 0.0;

    double mean_purity(double lambda) const {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows)
            if (r.lambda == lambda) {
                s += r.purity;
                ++n;
            }
        return n ? s / static_cast<double>(n) : 0.0;
    }

    /// Highest purity over the grid for one seed.
    double best_purity(std::uint64_t seed) const {
        double best = 0.0;
        for (const auto& r : rows)
            if (r.seed == seed) best = std::max(best, r.purity);
        return best;
    }
};

inline void require_labels(const Dataset& ds) {
    if (!ds.labeled()) throw config_error("grid and curve runs need labeled focal tracks");
}

inline GridReport run_grid(const ExperimentConfig& cfg) {
    check_config(cfg);
    const std::size_t ns = cfg.seeds.size();
    std::vector<Dataset> data(ns);
    std::vector<std::vector<std::vector<std::size_t>>> starts(ns);
    parallel_for(ns, cfg.workers, [&](std::size_t s) {
        data[s] = prepare_dataset(cfg, cfg.seeds[s]);
        require_labels(data[s]);
        starts[s] = codebook_starts(data[s].samples, cfg.solve.clusters, cfg.starts, cfg.seeds[s]);
    });

    GridReport rep;
    rep.rows.resize(cfg.lambda_grid.size() * ns);
    parallel_for(rep.rows.size(), cfg.workers, [&](std::size_t cell) {
        const std::size_t li = cell / ns, s = cell % ns;
        const Dataset& ds = data[s];
        const SolveSpec spec = spec_for(cfg, cfg.lambda_grid[li], cfg.seeds[s]);
        const SolveReport sr = alternate_from_starts(ds.samples, {}, spec, ds.dim(), starts[s]);
        const LabeledPartition p{sr.final_assignment.sample_cluster, ds.labels};
        rep.rows[cell] = {cfg.lambda_grid[li], cfg.seeds[s], purity(p), nmi(p), rand_index(p),
                          sr.objective_trace.back(), sr.start, sr.final_assignment};
    });

    double best = -1.0;
    for (double l : cfg.lambda_grid) {
        const double p = rep.mean_purity(l);
        if (p > best || (p == best && l < rep.best_lambda)) {
            best = p;
            rep.best_lambda = l;
        }
    }
    return rep;
}

// ----- curves -----

struct CurvePoint {
    std::size_t round = 0;
    double method_mean = 0.0;
    double method_std = 0.0;
    double manual_mean = 0.0;
    double manual_std = 0.0;
    double moved_mean = 0.0;
};

struct CurveReport {
    double lambda = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<LoopReport> runs;  // per seed
    std::vector<CurvePoint> curve;
};

namespace detail {

inline std::pair<double, double> mean_std(const Vector& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace detail

/// Runs that stopped early (already pure) hold their last purities and
/// contribute zero moves to later rounds of the aggregate.
inline CurveReport run_curves(const ExperimentConfig& cfg, double lambda) {
    check_config(cfg);
    const std::size_t ns = cfg.seeds.size();
    CurveReport rep;
    rep.lambda = lambda;
    rep.seeds = cfg.seeds;
    rep.runs.resize(ns);
    parallel_for(ns, cfg.workers, [&](std::size_t s) {
        const Dataset ds = prepare_dataset(cfg, cfg.seeds[s]);
        require_labels(ds);
        LoopOptions opt{cfg.m, cfg.c, cfg.max_rounds, cfg.seeds[s], cfg.starts};
        rep.runs[s] = run_feedback_loop(ds.samples, ds.labels, spec_for(cfg, lambda, cfg.seeds[s]), opt);
    });

    std::size_t rounds = 0;
    for (const auto& r : rep.runs) rounds = std::max(rounds, r.rounds.size());
    for (std::size_t k = 0; k < rounds; ++k) {
        Vector method, manual, moved;
        for (const auto& r : rep.runs) {
            const RoundRecord& rr = r.rounds[std::min(k, r.rounds.size() - 1)];
            method.push_back(rr.method_purity);
            manual.push_back(rr.manual_purity);
            moved.push_back(k < r.rounds.size() ? static_cast<double>(rr.moved_count) : 0.0);
        }
        CurvePoint pt;
        pt.round = k;
        std::tie(pt.method_mean, pt.method_std) = detail::mean_std(method);
        std::tie(pt.manual_mean, pt.manual_std) = detail::mean_std(manual);
        pt.moved_mean = detail::mean_std(moved).first;
        rep.curve.push_back(pt);
    }
    return rep;
}

// ----- exports -----

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace detail

inline std::string grid_csv(const GridReport& g) {
    std::string out = "lambda,seed,purity,nmi,rand_index,objective,start\n";
    for (const auto& r : g.rows)
        out += detail::num(r.lambda) + "," + std::to_string(r.seed) + "," + detail::num(r.purity) + "," +
               detail::num(r.nmi) + "," + detail::num(r.rand_index) + "," + detail::num(r.objective) + "," +
               std::to_string(r.start) + "\n";
    return out;
}

inline nlohmann::json grid_json(const GridReport& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : g.rows)
        rows.push_back({{"lambda", r.lambda},
                        {"seed", r.seed},
                        {"purity", r.purity},
                        {"nmi", r.nmi},
                        {"rand_index", r.rand_index},
                        {"objective", r.objective},
                        {"start", r.start}});
    return {{"best_lambda", g.best_lambda}, {"label_based_selection", true}, {"rows", rows}};
}

inline std::string curves_csv(const CurveReport& c) {
    std::string out = "round,seed,method_purity,manual_purity,moved_count,constraint_must,constraint_cannot\n";
    for (std::size_t s = 0; s < c.runs.size(); ++s)
        for (const auto& r : c.runs[s].rounds)
            out += std::to_string(r.round) + "," + std::to_string(c.seeds[s]) + "," + detail::num(r.method_purity) +
                   "," + detail::num(r.manual_purity) + "," + std::to_string(r.moved_count) + "," +
                   std::to_string(r.constraint_must) + "," + std::to_string(r.constraint_cannot) + "\n";
    return out;
}

inline nlohmann::json curves_json(const CurveReport& c) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : c.curve)
        curve.push_back({{"round", p.round},
                         {"method_mean", p.method_mean},
                         {"method_std", p.method_std},
                         {"manual_mean", p.manual_mean},
                         {"manual_std", p.manual_std},
                         {"moved_mean", p.moved_mean}});
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t s = 0; s < c.runs.size(); ++s) {
        nlohmann::json rounds = nlohmann::json::array();
        for (const auto& r : c.runs[s].rounds)
            rounds.push_back({{"round", r.round},
                              {"method_purity", r.method_purity},
                              {"manual_purity", r.manual_purity},
                              {"moved_count", r.moved_count},
                              {"constraint_must", r.constraint_must},
                              {"constraint_cannot", r.constraint_cannot}});
        runs.push_back({{"seed", c.seeds[s]}, {"reached_pure", c.runs[s].reached_pure}, {"rounds", rounds}});
    }
    return {{"lambda", c.lambda}, {"curve", curve}, {"runs", runs}};
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path.string());
    out << content;
}

}  // namespace lmmc
