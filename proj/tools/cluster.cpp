// cluster: command-line driver for grid sweeps, feedback curves, synthetic
// data generation and the interactive HTTP service.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "lmmc/service.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;

namespace fs = std::filesystem;

void write_grid(const lmmc::GridReport& g, const fs::path& out) {
    lmmc::write_file(out / "grid.csv", lmmc::grid_csv(g));
    lmmc::write_file(out / "grid.json", lmmc::grid_json(g).dump(2) + "\n");
}

int run(const std::string& config_path, const fs::path& out, const std::string& mode) {
    const lmmc::ExperimentConfig cfg = lmmc::load_config(config_path);
    fs::create_directories(out);
    if (mode == "once") {
        nlohmann::json runs = nlohmann::json::array();
        for (std::uint64_t seed : cfg.seeds) {
            const lmmc::Dataset ds = lmmc::prepare_dataset(cfg, seed);
            const lmmc::SolveSpec spec = lmmc::spec_for(cfg, cfg.solve.lambda, seed);
            const auto starts = lmmc::codebook_starts(ds.samples, spec.clusters, cfg.starts, seed);
            const lmmc::SolveReport rep = lmmc::alternate_from_starts(ds.samples, {}, spec, ds.dim(), starts);
            nlohmann::json j{{"seed", seed},
                             {"lambda", spec.lambda},
                             {"objective_trace", rep.objective_trace},
                             {"assignment", rep.final_assignment.sample_cluster},
                             {"converged", rep.converged}};
            if (ds.labeled()) {
                const lmmc::LabeledPartition p{rep.final_assignment.sample_cluster, ds.labels};
                j["purity"] = lmmc::purity(p);
                j["nmi"] = lmmc::nmi(p);
                j["rand_index"] = lmmc::rand_index(p);
            }
            std::cout << "seed " << seed << ": objective " << rep.objective_trace.back();
            if (ds.labeled()) std::cout << ", purity " << j["purity"].get<double>();
            std::cout << "\n";
            runs.push_back(std::move(j));
        }
        lmmc::write_file(out / "once.json", runs.dump(2) + "\n");
        return 0;
    }

    double lambda = cfg.lambda_grid.front();
    if (mode == "grid" || cfg.lambda_grid.size() > 1) {
        const lmmc::GridReport g = lmmc::run_grid(cfg);
        write_grid(g, out);
        lambda = g.best_lambda;
        std::cout << "best lambda " << lambda << " (mean purity " << g.mean_purity(lambda)
                  << ", selected with labels)\n";
    }
    if (mode == "curves") {
        const lmmc::CurveReport c = lmmc::run_curves(cfg, lambda);
        lmmc::write_file(out / "curves.csv", lmmc::curves_csv(c));
        lmmc::write_file(out / "curves.json", lmmc::curves_json(c).dump(2) + "\n");
        for (const auto& p : c.curve)
            std::cout << "round " << p.round << ": method " << p.method_mean << " +- " << p.method_std << ", manual "
                      << p.manual_mean << " +- " << p.manual_std << "\n";
    }
    return 0;
}

int synth(const std::string& spec_path, const std::string& out) {
    std::ifstream in(spec_path);
    if (!in) throw lmmc::config_error("cannot open " + spec_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw lmmc::config_error("cannot parse " + spec_path + ": " + e.what());
    }
    // reuse the config parser for the synthetic block
    const lmmc::ExperimentConfig cfg = lmmc::parse_config({{"data", {{"synthetic", doc}}}});
    lmmc::write_file(out, lmmc::synthetic_file_content(lmmc::generate_synthetic(cfg.synthetic)) + "\n");
    return 0;
}

httplib::Server* active_server = nullptr;

int serve(const std::string& config_path, int port, const std::string& snapshot_dir) {
    // validates the file; sessions bring their own config in the request body
    const lmmc::ExperimentConfig cfg = lmmc::load_config(config_path);
    (void)cfg;
    lmmc::SessionManager mgr(fs::path(config_path).parent_path(), snapshot_dir);
    httplib::Server srv;
    lmmc::install_routes(srv, mgr);
    active_server = &srv;
    std::signal(SIGINT, [](int) {
        if (active_server) active_server->stop();
    });
    std::cout << "listening on port " << port << std::endl;
    if (!srv.listen("0.0.0.0", port)) {
        std::cerr << "cannot listen on port " << port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained latent max-margin clustering with simulated or interactive feedback"};
    app.require_subcommand(1);

    std::string config, out = "out", mode = "curves", spec, synth_out, snapshot_dir;
    int port = 8080;

    auto* run_cmd = app.add_subcommand("run", "Run a lambda grid, feedback curves or a single clustering");
    run_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_option("--mode", mode, "grid, curves or once")->check(CLI::IsMember({"grid", "curves", "once"}));

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic trajectory file");
    synth_cmd->add_option("--spec", spec, "Synthetic spec (JSON)")->required();
    synth_cmd->add_option("--out", synth_out, "Output trajectory file")->required();

    auto* serve_cmd = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
    serve_cmd->add_option("--config", config, "Config used to validate the server setup")->required();
    serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--snapshot-dir", snapshot_dir, "Directory for session snapshots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run_cmd) return run(config, out, mode);
        if (*synth_cmd) return synth(spec, synth_out);
        if (*serve_cmd) return serve(config, port, snapshot_dir);
    } catch (const lmmc::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const lmmc::infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const lmmc::contradiction_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
