#pragma once

#include <cstdio>
#include <deque>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "dmsim/agents.hpp"
#include "dmsim/qlearn.hpp"
#include "dmsim/reputation.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

/// Money flows of the market. marketplace_revenue holds fees net of the
/// annual operator transfer; operator_revenue holds transfers net of the
/// compliance rebates it pays out.
struct Ledger {
    std::vector<double> provider_revenue;  // net: price - fee - cost + rebate
    double marketplace_revenue = 0.0;
    double operator_revenue = 0.0;
    double rebates_paid = 0.0;
    double fees_collected = 0.0;
    double buyer_spend = 0.0;
    std::vector<double> marketplace_step_accrual;  // fee income per step

    explicit Ledger(int n_providers) : provider_revenue(n_providers, 0.0) {}

    double provider_total() const {
        return std::accumulate(provider_revenue.begin(), provider_revenue.end(), 0.0);
    }
};

struct StepReport {
    int step = 0;
    int n_transactions = 0;
    double volume = 0.0;          // sum of prices
    double quality_sum = 0.0;     // sum of per-tx mean quality
    double provider_net = 0.0;    // net provider revenue earned this step
};

/// The full simulation state for one (engine, seed) run.
class World {
public:
    World(const GlobalParams& params, std::unique_ptr<ReputationEngine> engine)
        : params_(params),
          engine_(std::move(engine)),
          blind_(engine_->name() == "blind"),
          rng_(params.rng_seed),
          ledger_(params.n_providers) {
        providers_.resize(params_.n_providers);
        buyers_.resize(params_.n_buyers);
        const int ns = params_.n_buckets * params_.n_buckets;
        for (auto& pr : providers_) pr.q = QTable(ns, kNumProviderStrategies, params_);
        for (auto& by : buyers_) by.q = QTable(ns, kNumBuyerStrategies, params_);

        // initial reputations: clamped normal draws around neutral
        std::normal_distribution<double> init(0.5, 0.1);
        std::vector<double> r0(params_.n_providers);
        for (auto& v : r0) v = clamp01(init(rng_));
        if (!blind_) engine_->init_scores(r0);
        scores_prev_.resize(params_.n_providers);
        for (int i = 0; i < params_.n_providers; ++i) scores_prev_[i] = engine_->score(i);
    }

    const GlobalParams& params() const { return params_; }
    const Ledger& ledger() const { return ledger_; }
    const std::vector<Transaction>& transactions() const { return tx_log_; }
    const std::vector<StepReport>& step_reports() const { return step_reports_; }
    const ReputationEngine& engine() const { return *engine_; }
    double purchase_threshold() const {
        return blind_ ? params_.purchase_threshold - params_.blind_threshold_delta
                      : params_.purchase_threshold;
    }

    void run() {
        for (int t = 1; t <= params_.n_steps; ++t) run_step(t);
    }

    /// One month of market activity: strategy selection and offer posting,
    /// candidate evaluation and purchases, settlement with fees and
    /// compliance rebates, review emission, reputation recompute, learning
    /// updates, exploration decay, and (every 12th step) the annual
    /// marketplace-to-operator transfer.
    void run_step(int t) {
        StepReport rep;
        rep.step = t;

        // (a) providers pick a strategy and post one offer each
        offers_.clear();
        offers_.reserve(providers_.size());
        for (size_t i = 0; i < providers_.size(); ++i) {
            auto& pr = providers_[i];
            pr.state = provider_state(pr);
            pr.action = pr.q.select_action(pr.state, rng_);
            Offer o = sample_offer(provider_strategies()[pr.action], params_, rng_);
            o.provider_id = static_cast<int>(i);
            o.step = t;
            offers_.push_back(o);
            if (params_.cost_on_post) {
                ledger_.provider_revenue[i] -= o.cost;
                pr.cumulative_profit -= o.cost;
            }
            pr.step_reward = 0.0;
        }

        // (b) buyers sample candidates and decide
        const double threshold = purchase_threshold();
        std::uniform_int_distribution<int> pick(0, static_cast<int>(offers_.size()) - 1);
        for (size_t b = 0; b < buyers_.size(); ++b) {
            auto& by = buyers_[b];
            by.state = buyer_state(by);
            by.action = by.q.select_action(by.state, rng_);
            const BuyerStrategy& strat = buyer_strategies()[by.action];
            int best = -1;
            double best_u = 0.0;
            for (int c = 0; c < params_.k_candidates; ++c) {
                int idx = pick(rng_);
                double u = buyer_utility(offers_[idx], scores_prev_[offers_[idx].provider_id],
                                         strat, params_, blind_);
                if (best < 0 || u > best_u) {
                    best = idx;
                    best_u = u;
                }
            }
            by.bought = best >= 0 && best_u >= threshold;
            by.chosen_offer = by.bought ? best : -1;
            by.utility = by.bought ? best_u : 0.0;
        }

        // (c)+(d) settlement and review emission, in buyer-id order
        for (size_t b = 0; b < buyers_.size(); ++b) {
            auto& by = buyers_[b];
            if (!by.bought) continue;
            const Offer& o = offers_[by.chosen_offer];
            Transaction tx;
            tx.step = t;
            tx.provider_id = o.provider_id;
            tx.buyer_id = static_cast<int>(b);
            tx.price = o.price;
            tx.cost = o.cost;
            tx.fee = params_.fee_rate * o.price;
            tx.refund_applied = o.quality.compliance >= params_.rebate_compliance_threshold;
            tx.buyer_utility = by.utility;
            tx.quality = o.quality;
            tx.rep_before = scores_prev_[o.provider_id];
            tx.review = make_review(by.utility, params_);

            double provider_net = tx.price - tx.fee;
            if (!params_.cost_on_post) provider_net -= tx.cost;
            if (tx.refund_applied) {
                provider_net += tx.fee;
                ledger_.operator_revenue -= tx.fee;
                ledger_.rebates_paid += tx.fee;
            }
            ledger_.provider_revenue[tx.provider_id] += provider_net;
            ledger_.marketplace_revenue += 2.0 * tx.fee;  // both parties pay
            ledger_.fees_collected += 2.0 * tx.fee;
            ledger_.buyer_spend += tx.price + tx.fee;
            step_fee_accrual_ += 2.0 * tx.fee;

            auto& pr = providers_[tx.provider_id];
            pr.cumulative_profit += provider_net;
            pr.step_reward += provider_reward(tx, tx.rep_before, params_);
            running_max_profit_ = std::max(running_max_profit_, pr.cumulative_profit);

            rep.n_transactions += 1;
            rep.volume += tx.price;
            rep.quality_sum += tx.quality.mean();
            rep.provider_net += provider_net;

            engine_->observe({tx.provider_id, tx.buyer_id, t, tx.review,
                              tx.quality.acc_comp_mean()});
            tx_log_.push_back(tx);
        }

        // (e) reputation recompute
        engine_->recompute(t);

        // (f) learning updates, serial in agent-id order
        for (auto& pr : providers_) {
            int s_next = provider_state(pr);
            pr.q.update(pr.state, pr.action, pr.step_reward, s_next);
        }
        for (auto& by : buyers_) {
            by.recent.push_back({by.bought, by.utility});
            while (static_cast<int>(by.recent.size()) > params_.recent_window)
                by.recent.pop_front();
            int s_next = buyer_state(by);
            by.q.update(by.state, by.action, by.bought ? by.utility : 0.0, s_next);
        }

        // (g) exploration decay
        for (auto& pr : providers_) pr.q.decay_exploration();
        for (auto& by : buyers_) by.q.decay_exploration();

        for (int i = 0; i < params_.n_providers; ++i) scores_prev_[i] = engine_->score(i);

        ledger_.marketplace_step_accrual.push_back(step_fee_accrual_);
        step_fee_accrual_ = 0.0;
        if (t % 12 == 0) annual_transfer(t);

        step_reports_.push_back(rep);
    }

    /// Move 10% of the trailing 12 steps' marketplace fee income to the
    /// platform operator.
    void annual_transfer(int step) {
        const auto& acc = ledger_.marketplace_step_accrual;
        double year = 0.0;
        for (int s = step - 12; s < step; ++s)
            if (s >= 0 && s < static_cast<int>(acc.size())) year += acc[s];
        double transfer = params_.operator_transfer_rate * year;
        ledger_.marketplace_revenue -= transfer;
        ledger_.operator_revenue += transfer;
    }

    /// Transaction log in the documented delimited-text schema, one line per
    /// trade. Formatting is fixed-precision so identical runs are
    /// byte-identical.
    void write_transaction_log(std::ostream& out) const {
        out << "step\tprovider\tbuyer\tprice\tq_acc\tq_fresh\tq_cov\tq_comp\tfee\trebate\t"
               "utility\treview\trep_before\n";
        char buf[320];
        for (const auto& tx : tx_log_) {
            std::snprintf(buf, sizeof(buf),
                          "%d\t%d\t%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%d\t%.6f\t%.6f\t%.6f\n",
                          tx.step, tx.provider_id, tx.buyer_id, tx.price, tx.quality.accuracy,
                          tx.quality.freshness, tx.quality.coverage, tx.quality.compliance, tx.fee,
                          tx.refund_applied ? 1 : 0, tx.buyer_utility, tx.review, tx.rep_before);
            out << buf;
        }
    }

private:
    struct ProviderAgent {
        QTable q;
        double cumulative_profit = 0.0;
        double step_reward = 0.0;
        int state = 0;
        int action = 0;
    };
    struct BuyerOutcome {
        bool bought;
        double utility;
    };
    struct BuyerAgent {
        QTable q;
        std::deque<BuyerOutcome> recent;
        int state = 0;
        int action = 0;
        bool bought = false;
        int chosen_offer = -1;
        double utility = 0.0;
    };

    int provider_state(const ProviderAgent& pr) const {
        int id = &pr - providers_.data();
        return discretize_provider_state(pr.cumulative_profit, running_max_profit_,
                                         scores_prev_[id], params_);
    }

    int buyer_state(const BuyerAgent& by) const {
        if (by.recent.empty()) return discretize_buyer_state(0.0, 0.0, params_);
        double succ = 0.0, util = 0.0;
        for (const auto& o : by.recent) {
            succ += o.bought ? 1.0 : 0.0;
            util += o.utility;
        }
        return discretize_buyer_state(succ / by.recent.size(), util / by.recent.size(), params_);
    }

    GlobalParams params_;
    std::unique_ptr<ReputationEngine> engine_;
    bool blind_;
    Rng rng_;
    Ledger ledger_;
    std::vector<ProviderAgent> providers_;
    std::vector<BuyerAgent> buyers_;
    std::vector<Offer> offers_;
    std::vector<double> scores_prev_;
    std::vector<Transaction> tx_log_;
    std::vector<StepReport> step_reports_;
    double running_max_profit_ = 0.0;
    double step_fee_accrual_ = 0.0;
};

}  // namespace dmsim
