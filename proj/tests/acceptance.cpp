// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>

#include "lmmc/harness.hpp"
#include "oracles.hpp"

using namespace lmmc;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

ExperimentConfig config(const char* name) {
    return load_config(std::string(LMMC_CONFIG_DIR) + "/" + name);
}

// Every emitted assignment, checked against the constraints and bounds it was solved under.
struct ViolationTally {
    std::size_t checked = 0;
    std::size_t violations = 0;

    void check(const Assignment& a, const ConstraintSet& cons, std::size_t clusters, const SolveSpec& spec) {
        const BalanceBounds b =
            bounds_from_fractions(a.sample_cluster.size(), clusters, spec.lower_fraction, spec.upper_fraction);
        violations += validate(a, cons, b, clusters).size();
        ++checked;
    }
};

ViolationTally tally;

void oracle_equivalence() {
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(20240);
    int exact_match = 0, close = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const oracle::RandomInstance inst = oracle::random_instance(rng);
        const AssignmentResult ex = solve_exact(inst.cost, inst.cons, inst.bounds);
        const oracle::Enumerated e = oracle::enumerate(inst.cost, inst.cons, inst.bounds);
        exact_match += ex.feasible == e.feasible &&
                       (!e.feasible || (ex.total_cost == e.cost && ex.assignment.sample_cluster == e.assignment));
        const AssignmentResult h = solve_heuristic(inst.cost, inst.cons, inst.bounds, std::uint64_t(trial));
        if (!e.feasible)
            close += !h.feasible;
        else
            close += h.feasible && validate(h.assignment, inst.cons, inst.bounds, inst.k).empty() &&
                     h.total_cost <= 1.05 * e.cost + 1e-12;
    }
    const double secs = seconds_since(t0);
    report(exact_match == 100 && close >= 95 && secs < 30.0, "oracle_equivalence",
           fmt("exact matches %.0f/100, heuristic within 1.05x on %.0f/100, %.1f s", exact_match, close, secs));
}

std::vector<Sample> random_samples(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Sample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].id = int(i);
        for (std::size_t h = 1 + rng() % 3; h > 0; --h) {
            Vector v(d);
            for (double& x : v) x = u(rng);
            out[i].variants.push_back({v, ""});
        }
    }
    return out;
}

void objective_monotonicity() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t steps = 0, bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 6 + rng() % 5, k = 2 + rng() % 2, d = 3;
        const auto samples = random_samples(rng, n, d);
        SolveSpec spec;
        spec.clusters = k;
        spec.lambda = std::pow(10.0, double(rng() % 4) - 2.0);
        spec.lower_fraction = 0.6;
        spec.upper_fraction = 1.4;
        spec.method = assignment_method::exact;
        spec.seed = std::uint64_t(trial);
        ModelParams init{std::vector<Vector>(k, Vector(d)), spec.lambda};
        for (auto& w : init.weights)
            for (double& x : w) x = g(rng);
        const SolveReport r = alternate(samples, {}, spec, init);
        tally.check(r.final_assignment, {}, k, spec);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i, ++steps)
            bad += r.objective_trace[i] > r.objective_trace[i - 1] + 1e-6;
    }
    report(bad == 0, "objective_monotonicity", fmt("%.0f increasing steps out of %.0f", double(bad), double(steps)));
}

// Highest median-over-seeds purity across the grid, and the median at the mean-purity-selected lambda.
std::pair<double, double> grid_summary(const GridReport& g, const ExperimentConfig& cfg) {
    double best_median = 0.0;
    for (double l : cfg.lambda_grid) {
        std::vector<double> p;
        for (const auto& r : g.rows)
            if (r.lambda == l) p.push_back(r.purity);
        best_median = std::max(best_median, median(p));
    }
    std::vector<double> at_best;
    for (const auto& r : g.rows)
        if (r.lambda == g.best_lambda) at_best.push_back(r.purity);
    return {best_median, median(at_best)};
}

void latent_benefit() {
    const auto t0 = clock_type::now();
    const ExperimentConfig latent = config("latent_grid.json");
    const ExperimentConfig full = config("full_window_grid.json");
    const GridReport gl = run_grid(latent);
    const GridReport gf = run_grid(full);
    for (const auto* g : {&gl, &gf})
        for (const auto& r : g->rows) tally.check(r.assignment, {}, latent.solve.clusters, latent.solve);
    const auto [latent_peak, latent_at_best] = grid_summary(gl, latent);
    const auto [full_peak, full_at_best] = grid_summary(gf, full);
    const double secs = seconds_since(t0);
    report(latent_peak == 1.0 && latent_at_best > full_at_best && secs < 120.0, "latent_benefit",
           fmt("latent median purity peak %.4f (%.4f at its best lambda) vs full-window %.4f at its best lambda, %.1f s",
               latent_peak, latent_at_best, full_at_best, secs));
    (void)full_peak;
}

void noisy_runs() {
    const auto t0 = clock_type::now();
    const ExperimentConfig cfg = config("noisy_curves.json");
    const GridReport g = run_grid(cfg);
    for (const auto& r : g.rows) tally.check(r.assignment, {}, cfg.solve.clusters, cfg.solve);
    const CurveReport c = run_curves(cfg, g.best_lambda);
    const double secs = seconds_since(t0);

    // baseline ordering
    std::vector<double> engine, km;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        const Dataset ds = prepare_dataset(cfg, cfg.seeds[s]);
        const KMeansResult k = kmeans(std::span<const Sample>(ds.samples), cfg.solve.clusters, cfg.seeds[s]);
        km.push_back(purity({k.cluster, ds.labels}));
        engine.push_back(c.runs[s].rounds[0].method_purity);
    }
    report(median(engine) >= median(km), "baseline_ordering",
           fmt("round-0 median purity %.4f vs k-means %.4f (lambda %g)", median(engine), median(km), g.best_lambda));

    // feedback loop
    std::vector<double> rounds_needed;
    for (const auto& run : c.runs) {
        double needed = std::numeric_limits<double>::infinity();
        for (const auto& rr : run.rounds) {
            tally.check(rr.assignment, rr.constraints, cfg.solve.clusters, cfg.solve);
            if (rr.method_purity >= 1.0 && !std::isfinite(needed)) needed = double(rr.round);
        }
        rounds_needed.push_back(needed);
    }
    std::size_t worse_rounds = 0;
    std::string per_round;
    for (std::size_t k = 0; k < c.curve.size(); ++k) {
        std::vector<double> method, manual;
        for (const auto& run : c.runs) {
            const RoundRecord& rr = run.rounds[std::min(k, run.rounds.size() - 1)];
            method.push_back(rr.method_purity);
            manual.push_back(rr.manual_purity);
        }
        worse_rounds += median(method) < median(manual);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.3f/%.3f", k ? " " : "", median(method), median(manual));
        per_round += buf;
    }
    const double med_rounds = median(rounds_needed);
    report(med_rounds <= 8.0 && worse_rounds == 0 && secs < 300.0, "feedback_loop",
           fmt("median rounds to purity 1.0: %g, rounds where method median < manual median: %.0f, %.1f s", med_rounds,
               double(worse_rounds), secs) +
               "; method/manual medians per round: " + per_round);
}

void constraint_satisfaction() {
    report(tally.violations == 0 && tally.checked > 0, "constraint_satisfaction",
           fmt("%.0f violations across %.0f emitted assignments", double(tally.violations), double(tally.checked)));
}

void metric_oracles() {
    std::mt19937_64 rng(31337);
    auto random_partition = [&](std::size_t n, std::size_t k, int classes) {
        LabeledPartition p;
        for (std::size_t i = 0; i < n; ++i) {
            p.predicted.push_back(rng() % k);
            p.truth.push_back(int(rng() % std::uint64_t(classes)));
        }
        return p;
    };
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const LabeledPartition p = random_partition(2 + rng() % 40, 1 + rng() % 6, 1 + int(rng() % 6));
        mismatches += purity(p) != oracle::purity(p.predicted, p.truth);
        mismatches += rand_index(p) != oracle::rand_index(p.predicted, p.truth);
        mismatches += std::abs(nmi(p) - oracle::nmi(p.predicted, p.truth)) > 1e-9;
    }
    int property_failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const LabeledPartition p = random_partition(30, 4, 3);
        std::vector<std::size_t> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        LabeledPartition relabeled = p, finer = p;
        for (auto& c : relabeled.predicted) c = perm[c];
        for (auto& c : finer.predicted) c = c * 2 + rng() % 2;
        property_failures += purity(relabeled) != purity(p);
        property_failures += purity(finer) < purity(p);
    }
    report(mismatches == 0 && property_failures == 0, "metric_oracles",
           fmt("%.0f oracle mismatches over 1000 partitions, %.0f property failures over 100 cases", mismatches,
               property_failures));
}

void feature_properties() {
    std::mt19937_64 rng(4242);
    std::size_t bad_blocks = 0, blocks = 0, scenes = 0;
    double worst_shift = 0.0;
    const VariantSpec vs{20, 5, true, true, false};
    while (scenes < 100) {
        SyntheticSpec spec;
        spec.samples_per_class = 2;
        spec.position_noise = 0.3;
        spec.regime_noise = 0.2;
        spec.seed = rng();
        const TrajectoryFile f = generate_synthetic(spec).file;
        TrajectoryFile shifted = f;
        std::uniform_real_distribution<double> off(-500.0, 500.0);
        const double dx = off(rng), dy = off(rng);
        for (auto& tr : shifted.trajectories)
            for (auto& p : tr.points) {
                p.x += dx;
                p.y += dy;
            }
        const Dataset a = build_dataset(f, vs);
        const Dataset b = build_dataset(shifted, vs);
        const FeatureLayout& L = a.layout;
        const std::vector<std::size_t> widths{L.speed, L.speed, L.distance, L.distance};
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            for (std::size_t v = 0; v < a.samples[i].variants.size(); ++v) {
                const Vector& x = a.samples[i].variants[v].values;
                const Vector& y = b.samples[i].variants[v].values;
                for (std::size_t j = 0; j < x.size(); ++j) worst_shift = std::max(worst_shift, std::abs(x[j] - y[j]));
                std::size_t off_j = 0;
                for (std::size_t blk = 0; blk < widths.size(); ++blk, ++blocks) {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < widths[blk]; ++j) sum += x[off_j + j];
                    const double flag = x[L.dim() - L.blocks() + blk];
                    bad_blocks += flag == 1.0 ? std::abs(sum - 1.0) > 1e-9 : sum != 0.0;
                    off_j += widths[blk];
                }
            }
        }
        scenes += a.samples.size();
    }

    std::size_t fits = 0, ll_drops = 0;
    for (int trial = 0; trial < 200; ++trial, ++fits) {
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<Vector> values;
        const std::size_t n = 30 + rng() % 100;
        for (std::size_t i = 0; i < n; ++i) values.push_back({g(rng) + 5.0 * double(rng() % 3), std::abs(g(rng))});
        const GmmFit fit = fit_gmm_traced(values, 1 + rng() % 5, rng());
        for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
            ll_drops += fit.log_likelihood[i] < fit.log_likelihood[i - 1] - 1e-9 * std::abs(fit.log_likelihood[i - 1]);
    }
    report(bad_blocks == 0 && worst_shift <= 1e-9 && ll_drops == 0, "feature_properties",
           fmt("%.0f bad histogram blocks of %.0f; max translation difference %.2e over %.0f scenes; ", double(bad_blocks),
               double(blocks), worst_shift, double(scenes)) +
               fmt("%.0f log-likelihood decreases over %.0f GMM fits", double(ll_drops), double(fits)));
}

void determinism() {
    ExperimentConfig cfg = config("noisy_curves.json");
    cfg.seeds = {3};
    const std::string a = curves_csv(run_curves(cfg, 1.0));
    const std::string b = curves_csv(run_curves(cfg, 1.0));
    report(a == b && !a.empty(), "determinism",
           fmt("two runs gave %.0f and %.0f byte CSVs, ", double(a.size()), double(b.size())) +
               (a == b ? "identical" : "different"));
}

}  // namespace

int main() {
    try {
        oracle_equivalence();
        objective_monotonicity();
        latent_benefit();
        noisy_runs();
        constraint_satisfaction();
        metric_oracles();
        feature_properties();
        determinism();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
