#pragma once

#include <stdexcept>

#include "dmsim/qlearn.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

/// Buyer utility of an offer.
///
/// The quality term aggregates the four attributes with the strategy's
/// quality weights renormalized to sum 1, scaled by the quality coefficient.
/// The reputation term is the reputation coefficient times the provider's
/// prior score. The price term rewards cheap offers: w_price * (1 - p/p_ref),
/// scaled by the price coefficient; with literal_price_term the raw price
/// enters positively instead. Set blind to drop the reputation term.
inline double buyer_utility(const Offer& offer, double rep_before, const BuyerStrategy& strategy,
                            const GlobalParams& p, bool blind = false) {
    if (rep_before < 0.0 || rep_before > 1.0)
        throw std::invalid_argument("rep_before outside [0,1]");
    const auto& w = strategy.weights;
    double wsum = w[0] + w[1] + w[2] + w[3];
    double q_agg = (w[0] * offer.quality.accuracy + w[1] * offer.quality.freshness +
                    w[2] * offer.quality.coverage + w[3] * offer.quality.compliance) /
                   wsum;
    double u = p.utility_w_quality * q_agg;
    if (!blind) u += p.utility_w_reputation * rep_before;
    if (p.literal_price_term)
        u += p.utility_w_price * offer.price;
    else
        u += p.utility_w_price * w[5] * (1.0 - offer.price / p.price_ref);
    return u;
}

/// Provider reward for one settled transaction: rebate-boosted profit plus
/// utility and reputation-uplift bonuses.
inline double provider_reward(const Transaction& tx, double rep_before, const GlobalParams& p) {
    double refund = tx.refund_applied ? p.fee_rate : 0.0;
    double profit = std::max(0.0, tx.price - tx.cost - tx.fee) * (1.0 + refund);
    return profit + p.reward_w_utility * tx.buyer_utility +
           p.reward_w_uplift * std::max(0.0, tx.buyer_utility - rep_before);
}

}  // namespace dmsim
