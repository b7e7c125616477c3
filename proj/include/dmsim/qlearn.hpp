#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dmsim/types.hpp"

namespace dmsim {

/// Tabular state-action value store with epsilon-greedy selection.
/// Values start at zero; exploration decays multiplicatively per step.
class QTable {
public:
    QTable() = default;
    QTable(int n_states, int n_actions, const GlobalParams& p)
        : n_states_(n_states),
          n_actions_(n_actions),
          alpha_(p.learning_rate),
          beta_(p.discount),
          eps_(p.exploration_init),
          eps_decay_(p.exploration_decay),
          eps_min_(p.exploration_min),
          q_(static_cast<size_t>(n_states) * n_actions, 0.0) {}

    double value(int s, int a) const { return q_[index(s, a)]; }
    void set_value(int s, int a, double v) { q_[index(s, a)] = v; }
    double exploration_rate() const { return eps_; }
    int n_actions() const { return n_actions_; }

    double max_value(int s) const {
        const double* row = &q_[index(s, 0)];
        return *std::max_element(row, row + n_actions_);
    }

    /// Bellman update of a single entry.
    void update(int s, int a, double r, int s_next) {
        double& q = q_[index(s, a)];
        q += alpha_ * (r + beta_ * max_value(s_next) - q);
    }

    /// Uniform random action with probability eps, else argmax with ties
    /// broken by the lowest action index.
    int select_action(int s, Rng& rng) const {
        if (eps_ > 0.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng) < eps_) {
                std::uniform_int_distribution<int> pick(0, n_actions_ - 1);
                return pick(rng);
            }
        }
        const double* row = &q_[index(s, 0)];
        int best = 0;
        for (int a = 1; a < n_actions_; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    }

    void decay_exploration() { eps_ = std::max(eps_min_, eps_ * eps_decay_); }

private:
    size_t index(int s, int a) const { return static_cast<size_t>(s) * n_actions_ + a; }

    int n_states_ = 0;
    int n_actions_ = 0;
    double alpha_ = 0.15;
    double beta_ = 0.92;
    double eps_ = 1.0;
    double eps_decay_ = 0.995;
    double eps_min_ = 0.05;
    std::vector<double> q_;
};

/// Bucket a unit-interval value into n uniform buckets.
inline int uniform_bucket(double x, int n) {
    int b = static_cast<int>(std::floor(clamp01(x) * n));
    return std::min(b, n - 1);
}

/// Bucket a non-negative value into n logarithmically spaced buckets over
/// [0, running_max]. Monotone in the value for a fixed running_max.
inline int log_bucket(double value, double running_max, int n) {
    if (running_max <= 0.0) return 0;
    double v = std::max(0.0, std::min(value, running_max));
    double x = std::log1p(v) / std::log1p(running_max);
    return uniform_bucket(x, n);
}

/// Provider state: (cumulative-profit bucket, recent-reputation bucket).
inline int discretize_provider_state(double cumulative_profit, double running_max_profit,
                                     double recent_reputation, const GlobalParams& p) {
    int pb = log_bucket(cumulative_profit, running_max_profit, p.n_buckets);
    int rb = uniform_bucket(recent_reputation, p.n_buckets);
    return pb * p.n_buckets + rb;
}

/// Buyer state: (recent-success-rate bucket, recent-mean-utility bucket).
/// Utility is clamped to [0, utility_clamp] and rescaled before bucketing.
inline int discretize_buyer_state(double recent_success_rate, double recent_avg_utility,
                                  const GlobalParams& p) {
    int sb = uniform_bucket(recent_success_rate, p.n_buckets);
    double u = std::max(0.0, std::min(recent_avg_utility, p.utility_clamp)) / p.utility_clamp;
    int ub = uniform_bucket(u, p.n_buckets);
    return sb * p.n_buckets + ub;
}

}  // namespace dmsim
