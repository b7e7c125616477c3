#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dmsim {

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Global parameter set. Defaults are the calibrated simulation values;
/// every field can be overridden from a key = value config file, either by
/// its member name or by the short equation-symbol alias noted per field.
struct GlobalParams {
    // market scale
    int n_providers = 2000;
    int n_buyers = 2000;
    int n_steps = 120;  // one step = one month

    // cost function weights (aliases b..g)
    double cost_scale = 40.0;    // b
    double cost_bias = 0.2;      // c
    double cost_w_acc = 0.6;     // d
    double cost_w_comp = 0.6;    // e
    double cost_w_fresh = 0.2;   // f
    double cost_w_cov = 0.2;     // g

    // provider reward weights (aliases h, k)
    double reward_w_utility = 10.0;  // h
    double reward_w_uplift = 5.0;    // k

    // buyer utility coefficients (aliases l, o, u)
    double utility_w_quality = 0.31;     // l
    double utility_w_reputation = 0.68;  // o
    double utility_w_price = 0.45;       // u

    // review generation (aliases v, y)
    double review_bias = 0.5;  // v
    double review_gain = 0.8;  // y

    // Q-learning (aliases alpha, beta)
    double learning_rate = 0.15;  // alpha
    double discount = 0.92;       // beta
    double exploration_decay = 0.995;
    double exploration_min = 0.05;
    double exploration_init = 1.0;

    // IRL (aliases gamma, delta, epsilon)
    double irl_discount = 0.9;    // gamma, soft Bellman
    double trace_discount = 0.9;  // delta, feature expectations
    double irl_reg = 1e-3;        // epsilon

    // reputation engines
    double pagerank_damping = 0.85;  // zeta
    double half_life = 25.0;
    double beta_pt_z = 0.35;
    double rebate_compliance_threshold = 0.75;

    // market mechanics
    double price_floor = 10.01;
    double price_ref = 120.0;  // reference price for the utility price term
    int k_candidates = 10;
    double purchase_threshold = 0.35;
    double blind_threshold_delta = 0.10;  // blind scenario uses threshold - delta
    double fee_rate = 0.10;
    double operator_transfer_rate = 0.10;  // share of annual marketplace revenue

    // state discretization
    int n_buckets = 5;
    int recent_window = 5;
    double utility_clamp = 1.5;

    // behavior switches
    bool literal_price_term = false;  // utility uses +u*p as printed
    bool literal_eq29 = false;        // Beta-PT anti-monopoly cap divides by w6
    bool power_nodes_only = false;    // PowerTrust aggregates only top-1% reviews
    bool cost_on_post = false;        // charge production cost on posting, not sale
    bool quality_over_posted = false; // avg quality over posted instead of traded
    bool gross_revenue = false;       // provider revenue series gross of fee/cost

    std::uint64_t rng_seed = 1;

    void set(const std::string& key, const std::string& value);
    void load_file(const std::string& path);
};

namespace detail {

inline bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw config_error("not a boolean: " + v);
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void GlobalParams::set(const std::string& key, const std::string& value) {
    using detail::parse_bool;
    const double d = [&] {
        try {
            return std::stod(value);
        } catch (...) {
            return 0.0;  // boolean keys fall through
        }
    }();

    static const std::map<std::string, std::string> aliases = {
        {"b", "cost_scale"},      {"c", "cost_bias"},
        {"d", "cost_w_acc"},      {"e", "cost_w_comp"},
        {"f", "cost_w_fresh"},    {"g", "cost_w_cov"},
        {"h", "reward_w_utility"},{"k", "reward_w_uplift"},
        {"l", "utility_w_quality"},{"o", "utility_w_reputation"},
        {"u", "utility_w_price"}, {"v", "review_bias"},
        {"y", "review_gain"},     {"alpha", "learning_rate"},
        {"beta", "discount"},     {"gamma", "irl_discount"},
        {"delta", "trace_discount"},{"epsilon", "irl_reg"},
        {"zeta", "pagerank_damping"},
    };
    std::string k = key;
    if (auto it = aliases.find(k); it != aliases.end()) k = it->second;

    if (k == "n_providers") n_providers = static_cast<int>(d);
    else if (k == "n_buyers") n_buyers = static_cast<int>(d);
    else if (k == "n_steps") n_steps = static_cast<int>(d);
    else if (k == "cost_scale") cost_scale = d;
    else if (k == "cost_bias") cost_bias = d;
    else if (k == "cost_w_acc") cost_w_acc = d;
    else if (k == "cost_w_comp") cost_w_comp = d;
    else if (k == "cost_w_fresh") cost_w_fresh = d;
    else if (k == "cost_w_cov") cost_w_cov = d;
    else if (k == "reward_w_utility") reward_w_utility = d;
    else if (k == "reward_w_uplift") reward_w_uplift = d;
    else if (k == "utility_w_quality") utility_w_quality = d;
    else if (k == "utility_w_reputation") utility_w_reputation = d;
    else if (k == "utility_w_price") utility_w_price = d;
    else if (k == "review_bias") review_bias = d;
    else if (k == "review_gain") review_gain = d;
    else if (k == "learning_rate") learning_rate = d;
    else if (k == "discount") discount = d;
    else if (k == "exploration_decay") exploration_decay = d;
    else if (k == "exploration_min") exploration_min = d;
    else if (k == "exploration_init") exploration_init = d;
    else if (k == "irl_discount") irl_discount = d;
    else if (k == "trace_discount") trace_discount = d;
    else if (k == "irl_reg") irl_reg = d;
    else if (k == "pagerank_damping") pagerank_damping = d;
    else if (k == "half_life") half_life = d;
    else if (k == "beta_pt_z") beta_pt_z = d;
    else if (k == "rebate_compliance_threshold") rebate_compliance_threshold = d;
    else if (k == "price_floor") price_floor = d;
    else if (k == "price_ref") price_ref = d;
    else if (k == "k_candidates") k_candidates = static_cast<int>(d);
    else if (k == "purchase_threshold") purchase_threshold = d;
    else if (k == "blind_threshold_delta") blind_threshold_delta = d;
    else if (k == "fee_rate") fee_rate = d;
    else if (k == "operator_transfer_rate") operator_transfer_rate = d;
    else if (k == "n_buckets") n_buckets = static_cast<int>(d);
    else if (k == "recent_window") recent_window = static_cast<int>(d);
    else if (k == "utility_clamp") utility_clamp = d;
    else if (k == "literal_price_term") literal_price_term = parse_bool(value);
    else if (k == "literal_eq29") literal_eq29 = parse_bool(value);
    else if (k == "power_nodes_only") power_nodes_only = parse_bool(value);
    else if (k == "cost_on_post") cost_on_post = parse_bool(value);
    else if (k == "quality_over_posted") quality_over_posted = parse_bool(value);
    else if (k == "gross_revenue") gross_revenue = parse_bool(value);
    else if (k == "rng_seed") rng_seed = static_cast<std::uint64_t>(std::stoull(value));
    else throw config_error("unknown config key: " + key);
}

inline void GlobalParams::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

}  // namespace dmsim
