#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "dmsim/params.hpp"

namespace dmsim {

using Rng = std::mt19937_64;

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

/// Four quality attributes of a dataset, each clamped to [0,1] at construction.
struct QualityVector {
    double accuracy = 0.0;
    double freshness = 0.0;
    double coverage = 0.0;
    double compliance = 0.0;

    QualityVector() = default;
    QualityVector(double acc, double fresh, double cov, double comp)
        : accuracy(clamp01(acc)),
          freshness(clamp01(fresh)),
          coverage(clamp01(cov)),
          compliance(clamp01(comp)) {}

    double mean() const { return (accuracy + freshness + coverage + compliance) / 4.0; }
    /// Contextual transaction quality used by the trust-weighted engines.
    double acc_comp_mean() const { return 0.5 * (accuracy + compliance); }
};

enum class ProviderKind { Trust = 0, Price = 1, Quality = 2, Standard = 3 };
enum class BuyerKind { Price = 0, Quality = 1, Trust = 2 };

constexpr int kNumProviderStrategies = 4;
constexpr int kNumBuyerStrategies = 3;

struct ProviderStrategy {
    ProviderKind kind;
    QualityVector quality_means;
    std::array<double, 4> quality_stds;  // acc, fresh, cov, comp
    double price_mean;
    double price_std;
};

/// The four provider strategy rows: quality mean/std per attribute and price.
inline const std::array<ProviderStrategy, kNumProviderStrategies>& provider_strategies() {
    static const std::array<ProviderStrategy, kNumProviderStrategies> table = {{
        {ProviderKind::Trust, {0.50, 0.72, 0.70, 0.60}, {0.10, 0.10, 0.10, 0.06}, 72.0, 3.0},
        {ProviderKind::Price, {0.70, 0.70, 0.70, 0.65}, {0.12, 0.12, 0.12, 0.10}, 96.0, 4.0},
        {ProviderKind::Quality, {0.80, 0.78, 0.80, 0.78}, {0.08, 0.08, 0.08, 0.08}, 88.0, 4.0},
        {ProviderKind::Standard, {0.75, 0.75, 0.75, 0.75}, {0.09, 0.09, 0.09, 0.09}, 80.0, 3.0},
    }};
    return table;
}

struct BuyerStrategy {
    BuyerKind kind;
    // w_acc, w_fresh, w_cov, w_comp, w_rep, w_price
    std::array<double, 6> weights;
};

/// The three buyer strategy weight rows, as printed.
inline const std::array<BuyerStrategy, kNumBuyerStrategies>& buyer_strategies() {
    static const std::array<BuyerStrategy, kNumBuyerStrategies> table = {{
        {BuyerKind::Price, {0.35, 0.25, 0.25, 0.30, 0.30, 0.20}},
        {BuyerKind::Quality, {0.15, 0.15, 0.15, 0.20, 0.20, 0.45}},
        {BuyerKind::Trust, {0.25, 0.20, 0.20, 0.44, 0.45, 0.20}},
    }};
    return table;
}

struct Offer {
    int provider_id = -1;
    QualityVector quality;
    double price = 0.0;
    double cost = 0.0;
    int step = 0;
};

struct Transaction {
    int step = 0;
    int provider_id = -1;
    int buyer_id = -1;
    double price = 0.0;
    double cost = 0.0;
    double fee = 0.0;  // paid by each party
    bool refund_applied = false;
    double buyer_utility = 0.0;
    double review = 0.0;
    QualityVector quality;
    double rep_before = 0.0;  // engine score of the provider entering this step
};

/// Quadratic production cost of a quality vector. Ranges [8, 72] under defaults.
inline double compute_cost(const QualityVector& q, const GlobalParams& p) {
    return p.cost_scale *
           (p.cost_bias + p.cost_w_acc * q.accuracy * q.accuracy +
            p.cost_w_comp * q.compliance * q.compliance +
            p.cost_w_fresh * q.freshness * q.freshness +
            p.cost_w_cov * q.coverage * q.coverage);
}

/// Draw one offer for a provider following the given strategy. Quality
/// components are normal draws clamped to [0,1]; price is a normal draw
/// clamped to the floor. Exactly five draws are consumed per call.
inline Offer sample_offer(const ProviderStrategy& s, const GlobalParams& p, Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const auto& m = s.quality_means;
    Offer o;
    o.quality = QualityVector(m.accuracy + s.quality_stds[0] * n01(rng),
                              m.freshness + s.quality_stds[1] * n01(rng),
                              m.coverage + s.quality_stds[2] * n01(rng),
                              m.compliance + s.quality_stds[3] * n01(rng));
    o.price = std::max(p.price_floor, s.price_mean + s.price_std * n01(rng));
    o.cost = compute_cost(o.quality, p);
    return o;
}

inline const char* to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::Trust: return "trust";
        case ProviderKind::Price: return "price";
        case ProviderKind::Quality: return "quality";
        case ProviderKind::Standard: return "standard";
    }
    return "?";
}

inline const char* to_string(BuyerKind k) {
    switch (k) {
        case BuyerKind::Price: return "price";
        case BuyerKind::Quality: return "quality";
        case BuyerKind::Trust: return "trust";
    }
    return "?";
}

}  // namespace dmsim
