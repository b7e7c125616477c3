#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dmsim/irl.hpp"
#include "dmsim/scenario.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::string& engine, int n_seeds,
                 const std::string& out_dir, const std::string& weights_file) {
    dmsim::GlobalParams params;
    if (!config_path.empty()) params.load_file(config_path);

    std::vector<std::string> engines;
    if (engine.empty())
        engines = dmsim::engine_names();
    else
        engines.push_back(engine);

    std::vector<dmsim::ScenarioAggregate> aggs;
    for (const auto& name : engines) {
        dmsim::ScenarioConfig cfg;
        cfg.engine = name;
        cfg.params = params;
        cfg.out_dir = out_dir;
        cfg.weights_file = weights_file;
        cfg.seeds.clear();
        for (int s = 1; s <= n_seeds; ++s) cfg.seeds.push_back(params.rng_seed + s - 1);
        std::cerr << "running " << name << " (" << n_seeds << " seeds)...\n";
        aggs.push_back(dmsim::run_scenario(cfg));
    }
    dmsim::write_comparison(aggs, std::cout);
    if (!out_dir.empty()) {
        std::ofstream out(std::filesystem::path(out_dir) / "comparison.txt");
        dmsim::write_comparison(aggs, out);
    }
    return 0;
}

int run_compare(const std::vector<std::string>& dirs) {
    std::vector<dmsim::ScenarioAggregate> aggs;
    for (const auto& dir : dirs) {
        auto path = std::filesystem::path(dir);
        if (std::filesystem::is_directory(path)) {
            for (const auto& entry : std::filesystem::directory_iterator(path)) {
                auto report = entry.path() / "report.txt";
                if (entry.is_directory() && std::filesystem::exists(report))
                    aggs.push_back(dmsim::read_report_file(report.string()));
            }
            auto direct = path / "report.txt";
            if (std::filesystem::exists(direct))
                aggs.push_back(dmsim::read_report_file(direct.string()));
        } else {
            aggs.push_back(dmsim::read_report_file(dir));
        }
    }
    if (aggs.size() < 2) {
        std::cerr << "compare needs at least two scenario reports\n";
        return 1;
    }
    dmsim::write_comparison(aggs, std::cout);
    return 0;
}

int run_irl_fit(const std::string& traces_path, const std::string& out_path, int top_n,
                const std::string& config_path) {
    dmsim::GlobalParams params;
    if (!config_path.empty()) params.load_file(config_path);
    dmsim::TraceLoadOptions opt;
    opt.top_n = top_n;
    auto traces = dmsim::load_traces_file(traces_path, opt);
    if (traces.empty()) {
        std::cerr << "no traces loaded from " << traces_path << "\n";
        return 1;
    }
    std::cerr << "fitting reward weights on " << traces.size() << " traces...\n";
    dmsim::IrlFitResult fit = dmsim::irl_fit(traces, params);
    std::vector<double> raw(fit.action_weights.begin(), fit.action_weights.end());
    std::vector<double> normalized = dmsim::normalize_weights(raw);
    dmsim::UtilityCoefficients c = dmsim::derive_lou(normalized);

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    dmsim::write_weights_file(out, normalized, c);
    std::cerr << "l=" << c.quality << " o=" << c.reputation << " u=" << c.price << "\n";
    if (!fit.converged) {
        std::cerr << "warning: gradient norm " << fit.grad_norm << " after " << fit.iterations
                  << " iterations (tolerance not reached)\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-market reputation simulator"};
    app.require_subcommand(1);

    std::string config_path, engine, out_dir, weights_file;
    int n_seeds = 10;
    auto* simulate = app.add_subcommand("simulate", "run one or all reputation scenarios");
    simulate->add_option("--config", config_path, "key = value parameter file");
    simulate->add_option("--engine", engine,
                         "engine name (timedecay|bayesbeta|pagerank|powertrust|peertrust|betapt|"
                         "blind); default: all");
    simulate->add_option("--seeds", n_seeds, "number of seeds per engine")->default_val(10);
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--weights", weights_file, "IRL weights file overriding l, o, u");

    std::vector<std::string> compare_dirs;
    auto* compare = app.add_subcommand("compare", "tabulate reports from previous runs");
    compare->add_option("--in", compare_dirs, "output directories or report files")->required();

    std::string traces_path, irl_out = "weights.txt", irl_config;
    int top_n = 0;
    auto* irl = app.add_subcommand("irl", "inverse reinforcement learning");
    auto* fit = irl->add_subcommand("fit", "fit reward weights from an event-log trace file");
    fit->add_option("--traces", traces_path, "event log: user_id index action_name per line")
        ->required();
    fit->add_option("--out", irl_out, "weights file to write");
    fit->add_option("--top-n", top_n, "keep top-N users by vote count (0 = all)");
    fit->add_option("--config", irl_config, "parameter file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(config_path, engine, n_seeds, out_dir, weights_file);
        if (compare->parsed()) return run_compare(compare_dirs);
        if (irl->parsed() && fit->parsed()) return run_irl_fit(traces_path, irl_out, top_n, irl_config);
        std::cerr << app.help();
        return 1;
    } catch (const dmsim::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
