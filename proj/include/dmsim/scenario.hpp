#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "dmsim/irl.hpp"
#include "dmsim/market.hpp"
#include "dmsim/metrics.hpp"

namespace dmsim {

struct ScenarioConfig {
    std::string engine;
    GlobalParams params;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string out_dir;  // empty: no files written
    std::string weights_file;  // optional l/o/u overrides
};

struct ScenarioAggregate {
    std::string engine;
    std::vector<ScenarioReport> per_seed;
    // per-indicator mean and standard deviation over seeds
    ScenarioReport mean;
    ScenarioReport stddev;
};

namespace detail {

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= xs.size();
    for (double x : xs) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / xs.size());
}

}  // namespace detail

/// Run one (engine, seed) world to completion and report.
inline ScenarioReport run_single(const std::string& engine_name, const GlobalParams& base,
                                 std::uint64_t seed, const World** world_out = nullptr,
                                 std::unique_ptr<World>* keep = nullptr) {
    GlobalParams p = base;
    p.rng_seed = seed;
    auto world = std::make_unique<World>(p, make_engine(engine_name, p.n_providers, p.n_buyers, p));
    world->run();
    ScenarioReport r = build_report(*world);
    if (world_out) *world_out = world.get();
    if (keep) *keep = std::move(world);
    return r;
}

/// Run all seeds of a scenario, write per-seed outputs and the aggregate
/// report when an output directory is configured.
inline ScenarioAggregate run_scenario(const ScenarioConfig& config) {
    if (config.seeds.empty()) throw config_error("scenario needs at least one seed");
    GlobalParams base = config.params;
    if (!config.weights_file.empty()) apply_weights_file(config.weights_file, base);

    namespace fs = std::filesystem;
    fs::path engine_dir;
    if (!config.out_dir.empty()) {
        engine_dir = fs::path(config.out_dir) / config.engine;
        std::error_code ec;
        fs::create_directories(engine_dir, ec);
        if (ec) throw config_error("cannot create output directory: " + engine_dir.string());
    }

    ScenarioAggregate agg;
    agg.engine = config.engine;
    for (std::uint64_t seed : config.seeds) {
        std::unique_ptr<World> world;
        ScenarioReport rep = run_single(config.engine, base, seed, nullptr, &world);
        if (!engine_dir.empty()) {
            fs::path seed_dir = engine_dir / ("seed_" + std::to_string(seed));
            fs::create_directories(seed_dir);
            {
                std::ofstream log(seed_dir / "transactions.log");
                world->write_transaction_log(log);
            }
            auto write_series = [&](const char* file, const std::vector<double>& series) {
                std::ofstream out(seed_dir / file);
                out << "window,value\n";
                char buf[64];
                for (size_t i = 0; i < series.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", i, series[i]);
                    out << buf;
                }
            };
            write_series("series_quality.csv", rep.series_quality);
            write_series("series_revenue.csv", rep.series_revenue);
        }
        agg.per_seed.push_back(std::move(rep));
    }

    auto collect = [&](auto getter) {
        std::vector<double> xs;
        for (const auto& r : agg.per_seed) xs.push_back(getter(r));
        return xs;
    };
    auto fill = [&](auto getter, double ScenarioReport::* field) {
        double m, s;
        detail::mean_std(collect(getter), m, s);
        agg.mean.*field = m;
        agg.stddev.*field = s;
    };
    agg.mean.engine = agg.stddev.engine = config.engine;
    fill([](const ScenarioReport& r) { return r.welfare; }, &ScenarioReport::welfare);
    fill([](const ScenarioReport& r) { return r.avg_quality; }, &ScenarioReport::avg_quality);
    fill([](const ScenarioReport& r) { return r.success_rate; }, &ScenarioReport::success_rate);
    fill([](const ScenarioReport& r) { return r.mean_price; }, &ScenarioReport::mean_price);
    fill([](const ScenarioReport& r) { return r.platform_revenue; },
         &ScenarioReport::platform_revenue);
    fill([](const ScenarioReport& r) { return r.gini; }, &ScenarioReport::gini);
    fill([](const ScenarioReport& r) { return r.pq_slope; }, &ScenarioReport::pq_slope);
    agg.mean.pq_defined = true;

    if (!engine_dir.empty()) {
        std::ofstream out(engine_dir / "report.txt");
        for (const auto& r : agg.per_seed) {
            write_report(r, out);
            out << "\n";
        }
        out << "# aggregate over " << agg.per_seed.size() << " seeds (mean)\n";
        write_report(agg.mean, out);
        out << "\n# aggregate (stddev)\n";
        write_report(agg.stddev, out);
    }
    return agg;
}

/// Cross-engine comparison table: one row per engine, the headline
/// indicators side by side, with the best value per column marked.
inline void write_comparison(const std::vector<ScenarioAggregate>& aggs, std::ostream& out) {
    out << "engine      welfare        avg_quality  success_rate  mean_price  "
           "platform_rev   gini      pq_slope\n";
    char buf[256];
    for (const auto& a : aggs) {
        const ScenarioReport& m = a.mean;
        std::snprintf(buf, sizeof(buf), "%-10s  %13.2f  %11.4f  %12.4f  %10.2f  %12.2f  %8.4f  %8.2f\n",
                      a.engine.c_str(), m.welfare, m.avg_quality, m.success_rate, m.mean_price,
                      m.platform_revenue, m.gini, m.pq_slope);
        out << buf;
    }
    auto annotate = [&](const char* label, auto getter, bool max_best) {
        if (aggs.size() < 2) return;
        size_t best = 0;
        for (size_t i = 1; i < aggs.size(); ++i) {
            double v = getter(aggs[i].mean), b = getter(aggs[best].mean);
            if (max_best ? v > b : v < b) best = i;
        }
        out << "# " << (max_best ? "highest " : "lowest ") << label << ": "
            << aggs[best].engine << "\n";
    };
    annotate("welfare", [](const ScenarioReport& r) { return r.welfare; }, true);
    annotate("gini", [](const ScenarioReport& r) { return r.gini; }, true);
    annotate("pq_slope", [](const ScenarioReport& r) { return r.pq_slope; }, true);
}

/// Parse an aggregate mean block back out of a report.txt (for `compare`).
inline ScenarioAggregate read_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open report: " + path);
    ScenarioAggregate agg;
    std::string line;
    bool in_mean = false;
    while (std::getline(in, line)) {
        if (line.rfind("# aggregate over", 0) == 0) {
            in_mean = true;
            continue;
        }
        if (line.rfind("# aggregate (stddev)", 0) == 0) in_mean = false;
        if (!in_mean) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "engine") {
            agg.engine = agg.mean.engine = val;
        } else if (val != "undefined") {
            double d = std::stod(val);
            if (key == "welfare") agg.mean.welfare = d;
            else if (key == "avg_quality") agg.mean.avg_quality = d;
            else if (key == "success_rate") agg.mean.success_rate = d;
            else if (key == "mean_price") agg.mean.mean_price = d;
            else if (key == "platform_revenue") agg.mean.platform_revenue = d;
            else if (key == "gini") agg.mean.gini = d;
            else if (key == "pq_slope") agg.mean.pq_slope = d;
        }
    }
    if (agg.engine.empty()) throw config_error("no aggregate block in " + path);
    return agg;
}

/// Run a set of (engine, seed) jobs across worker threads. Each job owns an
/// independent world, so results are identical to a serial run.
inline std::vector<ScenarioReport> run_jobs_parallel(
    const std::vector<std::pair<std::string, std::uint64_t>>& jobs, const GlobalParams& base,
    unsigned n_threads = std::thread::hardware_concurrency()) {
    std::vector<ScenarioReport> results(jobs.size());
    if (n_threads == 0) n_threads = 1;
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            results[i] = run_single(jobs[i].first, base, jobs[i].second);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace dmsim
