#include <catch2/catch_amalgamated.hpp>

#include "dmsim/metrics.hpp"

using namespace dmsim;

namespace {

// O(n^2) brute-force double sum
double gini_bruteforce(const std::vector<double>& x) {
    double total = 0.0, diff = 0.0;
    for (double v : x) total += v;
    if (total <= 0.0) return 0.0;
    for (double a : x)
        for (double b : x) diff += std::abs(a - b);
    return diff / (2.0 * x.size() * total);
}

// closed-form OLS via raw moment sums
OlsFit ols_closed_form(const std::vector<double>& x, const std::vector<double>& y) {
    OlsFit fit;
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double var = sxx - sx * sx / n;
    if (var <= 0.0) return fit;
    fit.slope = (sxy - sx * sy / n) / var;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.defined = true;
    return fit;
}

}  // namespace

TEST_CASE("gini hand values") {
    CHECK(gini({5, 5, 5, 5}) == 0.0);
    CHECK_THAT(gini({1, 0, 0, 0}), Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK(gini({0, 0, 0}) == 0.0);
    CHECK(gini({}) == 0.0);
}

TEST_CASE("gini matches the brute-force double sum on random vectors") {
    Rng rng(13);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(2 + rep % 40);
        for (auto& v : x) v = u(rng);
        CHECK_THAT(gini(x), Catch::Matchers::WithinAbs(gini_bruteforce(x), 1e-12));
    }
}

TEST_CASE("gini is scale invariant") {
    std::vector<double> x = {3, 1, 4, 1, 5, 9, 2, 6};
    double g = gini(x);
    for (double c : {0.5, 2.0, 1000.0}) {
        std::vector<double> scaled = x;
        for (auto& v : scaled) v *= c;
        CHECK_THAT(gini(scaled), Catch::Matchers::WithinAbs(g, 1e-12));
    }
}

TEST_CASE("success rate") {
    CHECK(success_rate(0, 10, 10) == 0.0);
    CHECK(success_rate(100, 10, 10) == 1.0);
    CHECK_THAT(success_rate(120, 2, 120), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("ols hand values") {
    OlsFit fit = ols({0, 1}, {0, 1});
    REQUIRE(fit.defined);
    CHECK_THAT(fit.slope, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(fit.intercept, Catch::Matchers::WithinAbs(0.0, 1e-12));

    OlsFit flat = ols({0, 1, 2}, {3, 3, 3});
    REQUIRE(flat.defined);
    CHECK_THAT(flat.slope, Catch::Matchers::WithinAbs(0.0, 1e-12));

    CHECK_FALSE(ols({2, 2, 2}, {1, 2, 3}).defined);  // degenerate x
    CHECK_FALSE(ols({1}, {1}).defined);
}

TEST_CASE("ols matches the closed-form oracle on random logs") {
    Rng rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        size_t n = 2 + rep % 50;
        std::vector<double> x(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = 50.0 + 30.0 * x[i] + 10.0 * u(rng);
        }
        OlsFit a = ols(x, y), b = ols_closed_form(x, y);
        REQUIRE(a.defined == b.defined);
        if (a.defined) {
            // two-point draws can be nearly collinear; compare relatively there
            CHECK_THAT(a.slope, Catch::Matchers::WithinAbs(b.slope, 1e-9) ||
                                    Catch::Matchers::WithinRel(b.slope, 1e-8));
            CHECK_THAT(a.intercept, Catch::Matchers::WithinAbs(b.intercept, 1e-9) ||
                                        Catch::Matchers::WithinRel(b.intercept, 1e-8));
        }
    }
}

TEST_CASE("ols slope is invariant under price shifts, intercept is not") {
    std::vector<double> x = {0.1, 0.4, 0.7, 0.9};
    std::vector<double> y = {20, 40, 60, 90};
    OlsFit base = ols(x, y);
    std::vector<double> shifted = y;
    for (auto& v : shifted) v += 25.0;
    OlsFit moved = ols(x, shifted);
    CHECK_THAT(moved.slope, Catch::Matchers::WithinAbs(base.slope, 1e-9));
    CHECK_THAT(moved.intercept, Catch::Matchers::WithinAbs(base.intercept + 25.0, 1e-9));
}

TEST_CASE("20-step window means") {
    SECTION("constant series") {
        std::vector<double> series(120, 3.25);
        auto w = window_means(series);
        REQUIRE(w.size() == 6);
        for (double v : w) CHECK_THAT(v, Catch::Matchers::WithinAbs(3.25, 1e-12));
    }
    SECTION("partial final window averages over its actual length") {
        std::vector<double> series = {1, 1, 1};
        auto w = window_means(series, 2);
        REQUIRE(w.size() == 2);
        CHECK(w[0] == 1.0);
        CHECK(w[1] == 1.0);
    }
    SECTION("matches brute-force slicing on random series") {
        Rng rng(19);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> series(1 + rep * 3);
            for (auto& v : series) v = u(rng);
            auto w = window_means(series);
            size_t expected = (series.size() + 19) / 20;
            REQUIRE(w.size() == expected);
            for (size_t i = 0; i < w.size(); ++i) {
                size_t lo = i * 20, hi = std::min(series.size(), lo + 20);
                double sum = 0.0;
                for (size_t j = lo; j < hi; ++j) sum += series[j];
                CHECK_THAT(w[i], Catch::Matchers::WithinAbs(sum / (hi - lo), 1e-12));
            }
        }
    }
}

TEST_CASE("scenario report ties welfare to the ledger") {
    GlobalParams p;
    p.n_providers = 20;
    p.n_buyers = 20;
    p.n_steps = 24;
    World w(p, make_engine("bayesbeta", p.n_providers, p.n_buyers, p));
    w.run();
    ScenarioReport r = build_report(w);
    const Ledger& led = w.ledger();
    CHECK_THAT(r.welfare,
               Catch::Matchers::WithinAbs(
                   led.provider_total() + led.marketplace_revenue + led.operator_revenue, 1e-9));
    CHECK(r.avg_quality >= 0.0);
    CHECK(r.avg_quality <= 1.0);
    CHECK(r.success_rate >= 0.0);
    CHECK(r.success_rate <= 1.0);
    CHECK(r.gini >= 0.0);
    CHECK(r.gini <= 1.0);
    CHECK(r.series_quality.size() == 2);  // 24 steps -> 2 windows
}
