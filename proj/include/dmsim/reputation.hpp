#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dmsim/types.hpp"

namespace dmsim {

/// One review as seen by the reputation engines. tx_quality is the mean of
/// the traded offer's accuracy and compliance.
struct ReviewEvent {
    int provider = -1;
    int buyer = -1;
    int step = 0;
    double value = 0.0;
    double tx_quality = 0.0;
};

/// Review emitted by a buyer after a trade: clamp01(v + y * U).
inline double make_review(double utility, const GlobalParams& p) {
    return clamp01(p.review_bias + p.review_gain * utility);
}

/// Common engine interface. Engines ingest reviews during settlement and
/// refresh their per-provider score cache once per step; score() reads the
/// cache and is safe to call between steps. Providers with no data keep
/// whatever score they were initialized with.
class ReputationEngine {
public:
    ReputationEngine(int n_providers, int n_buyers)
        : n_providers_(n_providers), n_buyers_(n_buyers), scores_(n_providers, 0.5) {}
    virtual ~ReputationEngine() = default;

    virtual std::string name() const = 0;
    virtual void observe(const ReviewEvent& ev) = 0;
    virtual void recompute(int now) = 0;

    double score(int provider) const { return scores_[provider]; }
    void init_scores(const std::vector<double>& s) { scores_ = s; }
    int n_providers() const { return n_providers_; }

protected:
    int n_providers_;
    int n_buyers_;
    std::vector<double> scores_;
};

// ---------------------------------------------------------------------------
// Buyer trust (shared by PowerTrust, PeerTrust, Beta-PT)
// ---------------------------------------------------------------------------

/// Per-buyer statistics folded into a trust score T in [0,1]:
/// raw = (|M|/max|M| + mean tx quality + mean issued review) / 3, then
/// min-max normalized over buyers with at least one transaction. Inactive
/// buyers get T = 0; a degenerate (all-equal) population gets T = 1.
class BuyerTrustTracker {
public:
    explicit BuyerTrustTracker(int n_buyers)
        : count_(n_buyers, 0), sum_quality_(n_buyers, 0.0), sum_review_(n_buyers, 0.0) {}

    void observe(const ReviewEvent& ev) {
        ++count_[ev.buyer];
        sum_quality_[ev.buyer] += ev.tx_quality;
        sum_review_[ev.buyer] += ev.value;
    }

    int count(int buyer) const { return count_[buyer]; }

    std::vector<double> trust() const {
        const size_t n = count_.size();
        std::vector<double> t(n, 0.0);
        int max_count = 0;
        for (int c : count_) max_count = std::max(max_count, c);
        if (max_count == 0) return t;
        double lo = 2.0, hi = -1.0;
        std::vector<double> raw(n, 0.0);
        for (size_t b = 0; b < n; ++b) {
            if (count_[b] == 0) continue;
            double m = static_cast<double>(count_[b]) / max_count;
            double L = sum_quality_[b] / count_[b];
            double r = sum_review_[b] / count_[b];
            raw[b] = (m + L + r) / 3.0;
            lo = std::min(lo, raw[b]);
            hi = std::max(hi, raw[b]);
        }
        for (size_t b = 0; b < n; ++b) {
            if (count_[b] == 0) continue;
            t[b] = (hi > lo) ? (raw[b] - lo) / (hi - lo) : 1.0;
        }
        return t;
    }

private:
    std::vector<int> count_;
    std::vector<double> sum_quality_;
    std::vector<double> sum_review_;
};

// ---------------------------------------------------------------------------
// Time-decay
// ---------------------------------------------------------------------------

/// Exponentially decayed mean of reviews with weight exp(-lambda * age),
/// lambda = ln2 / half_life. Kept incrementally: numerator and denominator
/// are rescaled as the clock advances, which is algebraically identical to
/// the direct weighted sum.
class TimeDecayEngine : public ReputationEngine {
public:
    TimeDecayEngine(int n_providers, int n_buyers, const GlobalParams& p)
        : ReputationEngine(n_providers, n_buyers),
          lambda_(std::log(2.0) / p.half_life),
          num_(n_providers, 0.0),
          den_(n_providers, 0.0),
          last_(n_providers, 0) {}

    std::string name() const override { return "timedecay"; }

    static double decay_weight(double age, double half_life) {
        return std::exp(-std::log(2.0) / half_life * age);
    }

    void observe(const ReviewEvent& ev) override {
        advance(ev.provider, ev.step);
        num_[ev.provider] += ev.value;
        den_[ev.provider] += 1.0;
    }

    void recompute(int now) override {
        for (int i = 0; i < n_providers_; ++i) {
            if (den_[i] <= 0.0) continue;
            advance(i, now);
            scores_[i] = num_[i] / den_[i];
        }
    }

private:
    void advance(int provider, int to) {
        if (to > last_[provider] && den_[provider] > 0.0) {
            double f = std::exp(-lambda_ * (to - last_[provider]));
            num_[provider] *= f;
            den_[provider] *= f;
        }
        last_[provider] = std::max(last_[provider], to);
    }

    double lambda_;
    std::vector<double> num_, den_;
    std::vector<int> last_;
};

// ---------------------------------------------------------------------------
// Bayesian-beta
// ---------------------------------------------------------------------------

/// Beta-posterior score with uniform prior A = D = 1: each review adds R to
/// A and 1-R to D; the score blends the posterior mean with a confidence
/// weight so sparse histories stay near 0.5.
class BayesBetaEngine : public ReputationEngine {
public:
    BayesBetaEngine(int n_providers, int n_buyers, const GlobalParams&)
        : ReputationEngine(n_providers, n_buyers), a_(n_providers, 1.0), d_(n_providers, 1.0) {}

    std::string name() const override { return "bayesbeta"; }

    static double blend(double a, double d) {
        double mean = a / (a + d);
        double conf = (a + d) / (a + d + 2.0);
        return 0.5 * (mean + conf * mean + 0.5 * (1.0 - conf));
    }

    void observe(const ReviewEvent& ev) override {
        a_[ev.provider] += ev.value;
        d_[ev.provider] += 1.0 - ev.value;
        touched_ = true;
    }

    void recompute(int) override {
        if (!touched_) return;
        for (int i = 0; i < n_providers_; ++i)
            if (a_[i] + d_[i] > 2.0) scores_[i] = blend(a_[i], d_[i]);
    }

    double positive_mass(int provider) const { return a_[provider]; }
    double negative_mass(int provider) const { return d_[provider]; }

private:
    std::vector<double> a_, d_;
    bool touched_ = false;
};

// ---------------------------------------------------------------------------
// PageRank
// ---------------------------------------------------------------------------

/// Trust propagation over the buyer->provider transaction graph. The node
/// set is all providers plus every buyer that ever purchased; a buyer's
/// outbound mass splits proportionally to its transaction counts, so the
/// chain is row-stochastic. Dangling mass (providers have no out-edges) is
/// redistributed uniformly, keeping the raw vector summing to 1. Provider
/// raw scores are then min-max normalized to [0,1].
class PageRankEngine : public ReputationEngine {
public:
    PageRankEngine(int n_providers, int n_buyers, const GlobalParams& p)
        : ReputationEngine(n_providers, n_buyers),
          damping_(p.pagerank_damping),
          edges_(n_buyers),
          out_total_(n_buyers, 0),
          buyer_node_(n_buyers, -1) {}

    std::string name() const override { return "pagerank"; }

    void observe(const ReviewEvent& ev) override {
        if (buyer_node_[ev.buyer] < 0) {
            buyer_node_[ev.buyer] = n_providers_ + static_cast<int>(active_buyers_.size());
            active_buyers_.push_back(ev.buyer);
        }
        ++edges_[ev.buyer][ev.provider];
        ++out_total_[ev.buyer];
        ++total_tx_;
    }

    void recompute(int) override {
        if (total_tx_ == 0) return;
        const int n = n_providers_ + static_cast<int>(active_buyers_.size());
        // warm start from the previous stationary vector when the node set is
        // unchanged; the fixed point is unique, so only iteration count differs
        if (static_cast<int>(raw_.size()) != n) raw_.assign(n, 1.0 / n);
        std::vector<double> next(n);
        for (int it = 0; it < max_iters_; ++it) {
            // dangling mass: every node without out-edges (all providers here)
            double dangling = 0.0;
            for (int i = 0; i < n_providers_; ++i) dangling += raw_[i];
            double base = (1.0 - damping_) / n + damping_ * dangling / n;
            std::fill(next.begin(), next.end(), base);
            for (int b : active_buyers_) {
                double mass = damping_ * raw_[buyer_node_[b]] / out_total_[b];
                for (const auto& [prov, cnt] : edges_[b]) next[prov] += mass * cnt;
            }
            double diff = 0.0;
            for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - raw_[i]));
            raw_.swap(next);
            if (diff < tol_) break;
        }
        double lo = raw_[0], hi = raw_[0];
        for (int i = 1; i < n_providers_; ++i) {
            lo = std::min(lo, raw_[i]);
            hi = std::max(hi, raw_[i]);
        }
        for (int i = 0; i < n_providers_; ++i)
            scores_[i] = (hi > lo) ? (raw_[i] - lo) / (hi - lo) : 0.0;
    }

    /// Raw stationary vector from the last recompute; providers occupy
    /// nodes [0, n_providers), active buyers follow in first-purchase order.
    const std::vector<double>& raw_scores() const { return raw_; }
    int node_of_buyer(int buyer) const { return buyer_node_[buyer]; }
    int node_count() const { return n_providers_ + static_cast<int>(active_buyers_.size()); }

private:
    double damping_;
    double tol_ = 1e-8;
    int max_iters_ = 200;
    std::vector<std::unordered_map<int, int>> edges_;
    std::vector<int> out_total_;
    std::vector<int> buyer_node_;
    std::vector<int> active_buyers_;
    long total_tx_ = 0;
    std::vector<double> raw_;
};

// ---------------------------------------------------------------------------
// PowerTrust
// ---------------------------------------------------------------------------

/// Trust-weighted review mean with amplified hub reviewers: the top 1% of
/// buyers by trust count as power nodes and aggregate with T = 1. With
/// power_nodes_only set, only power-node reviews are aggregated (falling
/// back to the plain mean when a provider has none).
class PowerTrustEngine : public ReputationEngine {
public:
    PowerTrustEngine(int n_providers, int n_buyers, const GlobalParams& p)
        : ReputationEngine(n_providers, n_buyers),
          power_nodes_only_(p.power_nodes_only),
          trust_(n_buyers),
          reviews_(n_providers) {}

    std::string name() const override { return "powertrust"; }

    static double weight_of_trust(double t) { return 0.5 + 0.5 * t; }

    void observe(const ReviewEvent& ev) override {
        trust_.observe(ev);
        reviews_[ev.provider].push_back({ev.buyer, ev.value});
    }

    void recompute(int) override {
        std::vector<double> t = trust_.trust();
        std::vector<char> is_power = pick_power_nodes(t);
        for (int i = 0; i < n_providers_; ++i) {
            const auto& rs = reviews_[i];
            if (rs.empty()) continue;
            double num = 0.0, den = 0.0;
            for (const auto& [buyer, value] : rs) {
                if (power_nodes_only_ && !is_power[buyer]) continue;
                double w = weight_of_trust(is_power[buyer] ? 1.0 : t[buyer]);
                num += w * value;
                den += w;
            }
            if (den <= 0.0) {  // no power-node reviews: plain mean
                for (const auto& [buyer, value] : rs) num += value;
                den = static_cast<double>(rs.size());
            }
            scores_[i] = num / den;
        }
    }

private:
    std::vector<char> pick_power_nodes(const std::vector<double>& t) const {
        std::vector<int> active;
        for (size_t b = 0; b < t.size(); ++b)
            if (trust_.count(static_cast<int>(b)) > 0) active.push_back(static_cast<int>(b));
        std::vector<char> is_power(t.size(), 0);
        if (active.empty()) return is_power;
        size_t n_power = std::max<size_t>(1, (active.size() + 99) / 100);
        std::partial_sort(active.begin(), active.begin() + n_power, active.end(),
                          [&](int a, int b) { return t[a] > t[b] || (t[a] == t[b] && a < b); });
        for (size_t i = 0; i < n_power; ++i) is_power[active[i]] = 1;
        return is_power;
    }

    bool power_nodes_only_;
    BuyerTrustTracker trust_;
    std::vector<std::vector<std::pair<int, double>>> reviews_;
};

// ---------------------------------------------------------------------------
// PeerTrust
// ---------------------------------------------------------------------------

struct ContextReview {
    int buyer;
    int step;
    double value;
    double tx_quality;
};

/// Contextual weighting: each review weighs in with the time-decay factor
/// times the geometric mean of (review, buyer trust, transaction quality).
class PeerTrustEngine : public ReputationEngine {
public:
    PeerTrustEngine(int n_providers, int n_buyers, const GlobalParams& p)
        : ReputationEngine(n_providers, n_buyers),
          lambda_(std::log(2.0) / p.half_life),
          trust_(n_buyers),
          reviews_(n_providers) {}

    std::string name() const override { return "peertrust"; }

    void observe(const ReviewEvent& ev) override {
        trust_.observe(ev);
        reviews_[ev.provider].push_back({ev.buyer, ev.step, ev.value, ev.tx_quality});
    }

    void recompute(int now) override {
        std::vector<double> t = trust_.trust();
        for (int i = 0; i < n_providers_; ++i) {
            const auto& rs = reviews_[i];
            if (rs.empty()) continue;
            double num = 0.0, den = 0.0, plain = 0.0;
            for (const auto& r : rs) {
                double w1 = std::exp(-lambda_ * (now - r.step));
                double ctx = std::cbrt(r.value * t[r.buyer] * r.tx_quality);
                num += w1 * ctx * r.value;
                den += w1 * ctx;
                plain += r.value;
            }
            scores_[i] = den > 0.0 ? num / den : plain / rs.size();
        }
    }

private:
    double lambda_;
    BuyerTrustTracker trust_;
    std::vector<std::vector<ContextReview>> reviews_;
};

// ---------------------------------------------------------------------------
// Beta-PT
// ---------------------------------------------------------------------------

/// Hybrid engine: PeerTrust-style contextual weights damped by a beta
/// confidence factor conf = (A+D)/(A+D+4) with an empty prior, plus an
/// anti-monopoly cap on buyers holding many of a provider's reviews:
/// w_z = min(1, z * W / W_b) with W the provider's review count and W_b the
/// reviews this buyer gave it (literal_eq29 divides by the review weight
/// instead, as printed in the source formula).
class BetaPTEngine : public ReputationEngine {
public:
    BetaPTEngine(int n_providers, int n_buyers, const GlobalParams& p)
        : ReputationEngine(n_providers, n_buyers),
          lambda_(std::log(2.0) / p.half_life),
          z_(p.beta_pt_z),
          literal_eq29_(p.literal_eq29),
          trust_(n_buyers),
          reviews_(n_providers),
          a_(n_providers, 0.0),
          d_(n_providers, 0.0),
          buyer_counts_(n_providers) {}

    std::string name() const override { return "betapt"; }

    static double confidence(double a, double d) { return (a + d) / (a + d + 4.0); }

    void observe(const ReviewEvent& ev) override {
        trust_.observe(ev);
        reviews_[ev.provider].push_back({ev.buyer, ev.step, ev.value, ev.tx_quality});
        a_[ev.provider] += ev.value;
        d_[ev.provider] += 1.0 - ev.value;
        ++buyer_counts_[ev.provider][ev.buyer];
    }

    void recompute(int now) override {
        std::vector<double> t = trust_.trust();
        for (int i = 0; i < n_providers_; ++i) {
            const auto& rs = reviews_[i];
            if (rs.empty()) continue;
            double conf = force_conf_one ? 1.0 : confidence(a_[i], d_[i]);
            double total = static_cast<double>(rs.size());
            double num = 0.0, den = 0.0, plain = 0.0;
            for (const auto& r : rs) {
                double w1 = std::exp(-lambda_ * (now - r.step));
                double w6 = w1 * t[r.buyer] * r.tx_quality * conf;
                double wz = 1.0;
                if (!force_wz_one && total > 0.0 && w6 > 0.0) {
                    double denom = literal_eq29_ ? w6
                                                 : static_cast<double>(buyer_counts_[i].at(r.buyer));
                    wz = std::min(1.0, z_ * total / denom);
                }
                num += w6 * wz * r.value;
                den += w6 * wz;
                plain += r.value;
            }
            scores_[i] = den > 0.0 ? num / den : plain / rs.size();
        }
    }

    // test hooks: force the confidence / anti-monopoly factors to 1
    bool force_conf_one = false;
    bool force_wz_one = false;

private:
    double lambda_;
    double z_;
    bool literal_eq29_;
    BuyerTrustTracker trust_;
    std::vector<std::vector<ContextReview>> reviews_;
    std::vector<double> a_, d_;
    std::vector<std::unordered_map<int, int>> buyer_counts_;
};

// ---------------------------------------------------------------------------
// Blind baseline
// ---------------------------------------------------------------------------

/// No reputation signal: every provider scores 0 and the buyer utility
/// drops its reputation term.
class BlindEngine : public ReputationEngine {
public:
    BlindEngine(int n_providers, int n_buyers, const GlobalParams&)
        : ReputationEngine(n_providers, n_buyers) {
        std::fill(scores_.begin(), scores_.end(), 0.0);
    }
    std::string name() const override { return "blind"; }
    void observe(const ReviewEvent&) override {}
    void recompute(int) override { std::fill(scores_.begin(), scores_.end(), 0.0); }
};

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& engine_names() {
    static const std::vector<std::string> names = {
        "timedecay", "bayesbeta", "pagerank", "powertrust", "peertrust", "betapt", "blind"};
    return names;
}

inline std::unique_ptr<ReputationEngine> make_engine(const std::string& name, int n_providers,
                                                     int n_buyers, const GlobalParams& p) {
    if (name == "timedecay") return std::make_unique<TimeDecayEngine>(n_providers, n_buyers, p);
    if (name == "bayesbeta") return std::make_unique<BayesBetaEngine>(n_providers, n_buyers, p);
    if (name == "pagerank") return std::make_unique<PageRankEngine>(n_providers, n_buyers, p);
    if (name == "powertrust") return std::make_unique<PowerTrustEngine>(n_providers, n_buyers, p);
    if (name == "peertrust") return std::make_unique<PeerTrustEngine>(n_providers, n_buyers, p);
    if (name == "betapt") return std::make_unique<BetaPTEngine>(n_providers, n_buyers, p);
    if (name == "blind") return std::make_unique<BlindEngine>(n_providers, n_buyers, p);
    throw config_error("unknown reputation engine: " + name);
}

}  // namespace dmsim
