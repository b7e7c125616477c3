#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "dmsim/market.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

/// Gini coefficient of a non-negative vector: sum |x_i - x_j| / (2 n sum x).
/// Computed via the sorted O(n log n) identity; returns 0 for a zero total.
inline double gini(std::vector<double> values) {
    const size_t n = values.size();
    if (n == 0) return 0.0;
    double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (total <= 0.0) return 0.0;
    std::sort(values.begin(), values.end());
    double weighted = 0.0;
    for (size_t i = 0; i < n; ++i) weighted += (2.0 * (i + 1) - n - 1) * values[i];
    return weighted / (static_cast<double>(n) * total);
}

inline double success_rate(size_t n_transactions, int n_buyers, int n_steps) {
    if (n_buyers <= 0 || n_steps <= 0) return 0.0;
    return static_cast<double>(n_transactions) / (static_cast<double>(n_buyers) * n_steps);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool defined = false;  // false when all x are equal
};

/// Ordinary least squares of y on x.
inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    OlsFit fit;
    const size_t n = x.size();
    if (n < 2 || n != y.size()) return fit;
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.defined = true;
    return fit;
}

/// Non-overlapping window means; the final partial window is averaged over
/// its actual length.
inline std::vector<double> window_means(const std::vector<double>& series, int window = 20) {
    std::vector<double> out;
    for (size_t start = 0; start < series.size(); start += window) {
        size_t end = std::min(series.size(), start + window);
        double sum = std::accumulate(series.begin() + start, series.begin() + end, 0.0);
        out.push_back(sum / static_cast<double>(end - start));
    }
    return out;
}

/// Headline indicators and figure series for one run.
struct ScenarioReport {
    std::string engine;
    std::uint64_t seed = 0;
    double welfare = 0.0;
    double avg_quality = 0.0;
    double success_rate = 0.0;
    double mean_price = 0.0;
    double platform_revenue = 0.0;
    double gini = 0.0;
    double pq_slope = 0.0;
    double pq_intercept = 0.0;
    bool pq_defined = false;
    std::vector<double> series_quality;  // 20-step means of per-step avg quality
    std::vector<double> series_revenue;  // 20-step means of per-step provider net revenue
};

/// Compute the report from a finished world. Provider revenue (Gini and the
/// revenue series) is net of fees and costs by default; gross_revenue flips
/// it to gross receipts.
inline ScenarioReport build_report(const World& world) {
    const GlobalParams& p = world.params();
    const auto& txs = world.transactions();
    const Ledger& led = world.ledger();

    ScenarioReport r;
    r.engine = world.engine().name();
    r.seed = p.rng_seed;
    r.welfare = led.provider_total() + led.marketplace_revenue + led.operator_revenue;
    r.success_rate = success_rate(txs.size(), p.n_buyers, p.n_steps);
    r.platform_revenue = led.fees_collected;

    std::vector<double> q, price;
    q.reserve(txs.size());
    price.reserve(txs.size());
    for (const auto& tx : txs) {
        q.push_back(tx.quality.mean());
        price.push_back(tx.price);
    }
    if (!txs.empty()) {
        r.avg_quality = std::accumulate(q.begin(), q.end(), 0.0) / q.size();
        r.mean_price = std::accumulate(price.begin(), price.end(), 0.0) / price.size();
    }
    OlsFit fit = ols(q, price);
    r.pq_slope = fit.slope;
    r.pq_intercept = fit.intercept;
    r.pq_defined = fit.defined;

    std::vector<double> revenues(led.provider_revenue);
    if (p.gross_revenue) {
        std::fill(revenues.begin(), revenues.end(), 0.0);
        for (const auto& tx : txs)
            revenues[tx.provider_id] += tx.price - tx.fee + (tx.refund_applied ? tx.fee : 0.0);
    } else {
        for (auto& v : revenues) v = std::max(0.0, v);  // gini needs non-negative input
    }
    r.gini = gini(revenues);

    std::vector<double> step_quality, step_revenue;
    for (const auto& sr : world.step_reports()) {
        step_quality.push_back(sr.n_transactions > 0 ? sr.quality_sum / sr.n_transactions : 0.0);
        step_revenue.push_back(p.n_providers > 0 ? sr.provider_net / p.n_providers : 0.0);
    }
    r.series_quality = window_means(step_quality);
    r.series_revenue = window_means(step_revenue);
    return r;
}

inline void write_report(const ScenarioReport& r, std::ostream& out) {
    char buf[128];
    auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.6f\n", key, v);
        out << buf;
    };
    out << "engine = " << r.engine << "\n";
    out << "seed = " << r.seed << "\n";
    line("welfare", r.welfare);
    line("avg_quality", r.avg_quality);
    line("success_rate", r.success_rate);
    line("mean_price", r.mean_price);
    line("platform_revenue", r.platform_revenue);
    line("gini", r.gini);
    if (r.pq_defined) {
        line("pq_slope", r.pq_slope);
        line("pq_intercept", r.pq_intercept);
    } else {
        out << "pq_slope = undefined\npq_intercept = undefined\n";
    }
}

}  // namespace dmsim
