#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmsim/params.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

// ---------------------------------------------------------------------------
// Event-log traces
// ---------------------------------------------------------------------------

enum class TraceAction {
    DatasetCreate = 0,
    KernelCreate = 1,
    Submission = 2,
    ForumPost = 3,
    DatasetVote = 4,
    ForumVote = 5,
    KernelVote = 6,
};

constexpr int kNumTraceActions = 7;

inline const std::array<std::string, kNumTraceActions>& trace_action_names() {
    static const std::array<std::string, kNumTraceActions> names = {
        "dataset_create", "kernel_create", "submission", "forum_post",
        "dataset_vote",   "forum_vote",    "kernel_vote"};
    return names;
}

inline int trace_action_index(const std::string& name) {
    const auto& names = trace_action_names();
    for (int i = 0; i < kNumTraceActions; ++i)
        if (names[i] == name) return i;
    throw config_error("unknown trace action: " + name);
}

/// One user's ordered action sequence. The state at step t is the
/// cumulative action count, i.e. t itself.
using Trace = std::vector<int>;

struct TraceLoadOptions {
    // keep only the top_n users by vote count whose dataset-creation count
    // is below the given percentile of the population; top_n <= 0 keeps all
    int top_n = 0;
    double creation_percentile = 0.5;
};

/// Load traces from delimited text: one event per line,
/// "user_id <sep> order_index <sep> action_name" with whitespace or comma
/// separators.
inline std::vector<Trace> load_traces(std::istream& in, const TraceLoadOptions& opt = {}) {
    std::map<std::string, std::vector<std::pair<long, int>>> by_user;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        std::string user, action;
        long idx;
        if (!(ss >> user >> idx >> action)) continue;
        by_user[user].push_back({idx, trace_action_index(action)});
    }
    struct UserTrace {
        Trace trace;
        int votes = 0;
        int creations = 0;
    };
    std::vector<UserTrace> users;
    for (auto& [user, events] : by_user) {
        std::stable_sort(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        UserTrace ut;
        for (const auto& [idx, a] : events) {
            ut.trace.push_back(a);
            if (a == static_cast<int>(TraceAction::DatasetVote) ||
                a == static_cast<int>(TraceAction::ForumVote) ||
                a == static_cast<int>(TraceAction::KernelVote))
                ++ut.votes;
            if (a == static_cast<int>(TraceAction::DatasetCreate)) ++ut.creations;
        }
        users.push_back(std::move(ut));
    }
    if (opt.top_n > 0 && !users.empty()) {
        std::vector<int> creations;
        for (const auto& u : users) creations.push_back(u.creations);
        std::sort(creations.begin(), creations.end());
        size_t ci = std::min(creations.size() - 1,
                             static_cast<size_t>(opt.creation_percentile * creations.size()));
        int creation_cap = creations[ci];
        std::erase_if(users, [&](const UserTrace& u) { return u.creations > creation_cap; });
        std::stable_sort(users.begin(), users.end(),
                         [](const UserTrace& a, const UserTrace& b) { return a.votes > b.votes; });
        if (users.size() > static_cast<size_t>(opt.top_n)) users.resize(opt.top_n);
    }
    std::vector<Trace> traces;
    for (auto& u : users)
        if (!u.trace.empty()) traces.push_back(std::move(u.trace));
    return traces;
}

inline std::vector<Trace> load_traces_file(const std::string& path,
                                           const TraceLoadOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open trace file: " + path);
    return load_traces(in, opt);
}

// ---------------------------------------------------------------------------
// Soft value iteration over a generic finite MDP
// ---------------------------------------------------------------------------

/// Sparse row-stochastic transition model: transitions[s][a] is a list of
/// (next state, probability).
using TransitionModel = std::vector<std::vector<std::vector<std::pair<int, double>>>>;

struct SoftVIResult {
    std::vector<std::vector<double>> q;   // [s][a]
    std::vector<double> v;                // [s]
    std::vector<std::vector<double>> pi;  // [s][a], rows sum to 1
    bool converged = false;
    int sweeps = 0;
};

inline double logsumexp(const std::vector<double>& xs) {
    double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

/// Iterate the soft Bellman backup Q = r + gamma E[V'], V = logsumexp_a Q
/// until max|dV| < tol, then read off the softmax policy.
inline SoftVIResult soft_value_iteration(const std::vector<std::vector<double>>& rewards,
                                         const TransitionModel& transitions, double gamma,
                                         double tol = 1e-6, int max_sweeps = 1000) {
    const int S = static_cast<int>(rewards.size());
    SoftVIResult res;
    res.v.assign(S, 0.0);
    res.q.resize(S);
    for (int s = 0; s < S; ++s) res.q[s].assign(rewards[s].size(), 0.0);

    for (res.sweeps = 1; res.sweeps <= max_sweeps; ++res.sweeps) {
        double max_dv = 0.0;
        for (int s = 0; s < S; ++s) {
            const int A = static_cast<int>(rewards[s].size());
            for (int a = 0; a < A; ++a) {
                double ev = 0.0;
                for (const auto& [s2, p] : transitions[s][a]) ev += p * res.v[s2];
                res.q[s][a] = rewards[s][a] + gamma * ev;
            }
            double v_new = logsumexp(res.q[s]);
            max_dv = std::max(max_dv, std::abs(v_new - res.v[s]));
            res.v[s] = v_new;
        }
        if (max_dv < tol) {
            res.converged = true;
            break;
        }
    }
    res.pi.resize(S);
    for (int s = 0; s < S; ++s) {
        res.pi[s].resize(res.q[s].size());
        for (size_t a = 0; a < res.q[s].size(); ++a)
            res.pi[s][a] = std::exp(res.q[s][a] - res.v[s]);
    }
    return res;
}

// ---------------------------------------------------------------------------
// The behavior model: count states, bucketed features
// ---------------------------------------------------------------------------

/// MDP over cumulative action counts 0..max_count (absorbing at the cap)
/// with a deterministic count increment regardless of action. Features are
/// a one-hot over the 7 actions concatenated with a one-hot over 10 count
/// buckets (0-4, 5-9, ..., >=45).
struct BehaviorModel {
    int max_count = 49;
    int n_buckets = 10;
    int bucket_width = 5;

    int n_states() const { return max_count + 1; }
    int feature_dim() const { return kNumTraceActions + n_buckets; }

    int bucket(int count) const { return std::min(count / bucket_width, n_buckets - 1); }

    // feature indices of (s, a): the action slot and the bucket slot
    std::pair<int, int> phi(int s, int a) const { return {a, kNumTraceActions + bucket(s)}; }

    TransitionModel transitions() const {
        TransitionModel tm(n_states());
        for (int s = 0; s < n_states(); ++s) {
            tm[s].resize(kNumTraceActions);
            int s2 = std::min(s + 1, max_count);
            for (int a = 0; a < kNumTraceActions; ++a) tm[s][a] = {{s2, 1.0}};
        }
        return tm;
    }

    std::vector<std::vector<double>> rewards(const std::vector<double>& theta) const {
        std::vector<std::vector<double>> r(n_states(), std::vector<double>(kNumTraceActions));
        for (int s = 0; s < n_states(); ++s)
            for (int a = 0; a < kNumTraceActions; ++a) {
                auto [ia, ib] = phi(s, a);
                r[s][a] = theta[ia] + theta[ib];
            }
        return r;
    }
};

/// Discounted empirical feature expectations, averaged over traces.
inline std::vector<double> empirical_feature_expectations(const std::vector<Trace>& traces,
                                                          const BehaviorModel& model,
                                                          double delta) {
    std::vector<double> mu(model.feature_dim(), 0.0);
    if (traces.empty()) return mu;
    for (const auto& trace : traces) {
        double disc = 1.0;
        int count = 0;
        for (int a : trace) {
            int s = std::min(count, model.max_count);
            auto [ia, ib] = model.phi(s, a);
            mu[ia] += disc;
            mu[ib] += disc;
            disc *= delta;
            ++count;
        }
    }
    for (auto& v : mu) v /= static_cast<double>(traces.size());
    return mu;
}

/// Model-side feature expectations by discounted occupancy propagation from
/// a start-state distribution until the remaining discounted mass drops
/// below the cutoff.
inline std::vector<double> model_feature_expectations(const std::vector<std::vector<double>>& pi,
                                                      const TransitionModel& transitions,
                                                      const std::vector<double>& start_dist,
                                                      const BehaviorModel& model, double delta,
                                                      double mass_cutoff = 1e-8) {
    const int S = static_cast<int>(pi.size());
    std::vector<double> mu(model.feature_dim(), 0.0);
    std::vector<double> occ = start_dist;
    double disc = 1.0;
    while (disc > mass_cutoff) {
        std::vector<double> next(S, 0.0);
        for (int s = 0; s < S; ++s) {
            if (occ[s] <= 0.0) continue;
            for (int a = 0; a < kNumTraceActions; ++a) {
                double w = occ[s] * pi[s][a];
                if (w <= 0.0) continue;
                auto [ia, ib] = model.phi(s, a);
                mu[ia] += disc * w;
                mu[ib] += disc * w;
                for (const auto& [s2, p] : transitions[s][a]) next[s2] += w * p;
            }
        }
        occ.swap(next);
        disc *= delta;
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Gradient-ascent fit
// ---------------------------------------------------------------------------

struct IrlFitResult {
    std::vector<double> theta;
    std::array<double, kNumTraceActions> action_weights{};  // action block of theta
    bool converged = false;
    double grad_norm = 0.0;
    int iterations = 0;
};

struct IrlFitOptions {
    double step_size = 0.1;
    double grad_tol = 1e-4;
    int max_iters = 2000;
};

/// Maximum causal entropy fit: ascend theta along mu_E - mu_theta - eps*theta
/// until the gradient norm falls under tolerance.
inline IrlFitResult irl_fit(const std::vector<Trace>& traces, const GlobalParams& params,
                            const BehaviorModel& model = {}, const IrlFitOptions& opt = {}) {
    if (traces.empty()) throw std::invalid_argument("irl_fit needs at least one trace");
    const int D = model.feature_dim();
    const TransitionModel tm = model.transitions();

    std::vector<double> mu_e = empirical_feature_expectations(traces, model, params.trace_discount);
    std::vector<double> start(model.n_states(), 0.0);
    for (const auto& t : traces) {
        (void)t;
        start[0] += 1.0 / traces.size();  // every trace starts at count 0
    }

    IrlFitResult res;
    res.theta.assign(D, 0.0);
    for (res.iterations = 1; res.iterations <= opt.max_iters; ++res.iterations) {
        SoftVIResult vi = soft_value_iteration(model.rewards(res.theta), tm, params.irl_discount);
        std::vector<double> mu_m =
            model_feature_expectations(vi.pi, tm, start, model, params.trace_discount);
        double norm2 = 0.0;
        std::vector<double> grad(D);
        for (int i = 0; i < D; ++i) {
            grad[i] = mu_e[i] - mu_m[i] - params.irl_reg * res.theta[i];
            norm2 += grad[i] * grad[i];
        }
        res.grad_norm = std::sqrt(norm2);
        if (res.grad_norm < opt.grad_tol) {
            res.converged = true;
            break;
        }
        double eta = opt.step_size / (1.0 + res.iterations / 500.0);
        for (int i = 0; i < D; ++i) res.theta[i] += eta * grad[i];
    }
    for (int a = 0; a < kNumTraceActions; ++a) res.action_weights[a] = res.theta[a];
    return res;
}

// ---------------------------------------------------------------------------
// Weight post-processing
// ---------------------------------------------------------------------------

/// Min-max normalization to [0,1]; rejects an all-equal input.
inline std::vector<double> normalize_weights(const std::vector<double>& raw) {
    if (raw.size() < 2) throw std::invalid_argument("normalize_weights needs >= 2 values");
    double lo = *std::min_element(raw.begin(), raw.end());
    double hi = *std::max_element(raw.begin(), raw.end());
    if (hi <= lo) throw std::invalid_argument("normalize_weights: all values equal");
    std::vector<double> out(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
    return out;
}

struct UtilityCoefficients {
    double quality;     // l
    double reputation;  // o
    double price;       // u
};

/// Map normalized per-action weights to the utility coefficients: quality is
/// the mean of the content-creation discussion actions (kernel creation,
/// forum post), reputation the mean of the three voting actions, price the
/// dataset-vote weight (votes proxy purchases).
inline UtilityCoefficients derive_lou(const std::vector<double>& normalized) {
    if (normalized.size() != kNumTraceActions)
        throw std::invalid_argument("derive_lou expects 7 normalized weights");
    auto at = [&](TraceAction a) { return normalized[static_cast<int>(a)]; };
    UtilityCoefficients c{};
    c.quality = 0.5 * (at(TraceAction::KernelCreate) + at(TraceAction::ForumPost));
    c.reputation = (at(TraceAction::DatasetVote) + at(TraceAction::ForumVote) +
                    at(TraceAction::KernelVote)) / 3.0;
    c.price = at(TraceAction::DatasetVote);
    return c;
}

/// Plain-text name=value weights file consumable by the scenario runner.
inline void write_weights_file(std::ostream& out, const std::vector<double>& normalized,
                               const UtilityCoefficients& c) {
    char buf[96];
    for (int a = 0; a < kNumTraceActions; ++a) {
        std::snprintf(buf, sizeof(buf), "action_%s = %.6f\n", trace_action_names()[a].c_str(),
                      normalized[a]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "l = %.6f\no = %.6f\nu = %.6f\n", c.quality, c.reputation,
                  c.price);
    out << buf;
}

/// Read l/o/u overrides from a weights file into the parameter set.
inline void apply_weights_file(const std::string& path, GlobalParams& params) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open weights file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key == "l" || key == "o" || key == "u") params.set(key, val);
    }
}

}  // namespace dmsim
