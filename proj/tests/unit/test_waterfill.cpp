#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cachecast/lcu.hpp"
#include "cachecast/oracles.hpp"
#include "cachecast/random.hpp"
#include "cachecast/waterfill.hpp"

using namespace cachecast;

TEST_CASE("single file takes the whole budget") {
    SourceLibrary lib;
    lib.variances = {2.0};
    const auto wf = lcu_cache_allocation(lib, {1.0}, 1.7);
    REQUIRE(wf.allocation.size() == 1);
    CHECK(wf.allocation[0] == Catch::Approx(1.7).margin(1e-12));
    CHECK(wf.active_set == std::vector<std::size_t>{0});
}

TEST_CASE("symmetric files split the budget evenly") {
    SourceLibrary lib;
    lib.variances = {1.0, 1.0};
    const auto wf = lcu_cache_allocation(lib, {0.5, 0.5}, 2.0);
    CHECK(wf.allocation[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(wf.allocation[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("cache allocation matches the simplex grid oracle") {
    SourceLibrary lib;
    lib.variances = {1.6, 1.0, 0.7};
    const std::vector<double> q = {0.6, 0.3, 0.1};
    const double budget = 1.5;
    const auto wf = lcu_cache_allocation(lib, q, budget);
    double objective = 0.0;
    std::vector<double> coeff(3);
    for (std::size_t j = 0; j < 3; ++j) {
        coeff[j] = q[j] * lib.variances[j];
        objective += coeff[j] * std::exp2(-2.0 * wf.allocation[j]);
    }
    const double oracle = oracle::grid_min_weighted_distortion(coeff, budget, 0.001);
    CHECK(objective <= oracle + 1e-3);
}

TEST_CASE("degenerate cache inputs") {
    SourceLibrary lib;
    lib.variances = {1.0, 2.0};
    const auto zero_budget = lcu_cache_allocation(lib, {0.5, 0.5}, 0.0);
    CHECK(zero_budget.allocation == std::vector<double>{0.0, 0.0});
    CHECK(zero_budget.active_set.empty());
    CHECK_THROWS_AS(lcu_cache_allocation(lib, {0.0, 0.0}, 1.0), std::domain_error);
}

TEST_CASE("files with zero popularity never activate") {
    SourceLibrary lib;
    lib.variances = {1.0, 5.0, 1.2};
    const auto wf = lcu_cache_allocation(lib, {0.6, 0.0, 0.4}, 2.0);
    CHECK(wf.allocation[1] == 0.0);
    CHECK(wf.total() == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("transmission rates") {
    SourceLibrary lib;
    lib.variances = {1.0, 1.0};

    SECTION("single receiver absorbs the link") {
        CachePlan cache;
        cache.rates = {{0.3, 0.1}};
        cache.budgets = {0.4};
        const auto wf = lcu_transmission_rates(lib, cache, {{1}}, 2.5);
        CHECK(wf.allocation[0] == Catch::Approx(2.5).margin(1e-12));
    }

    SECTION("symmetric receivers split the link") {
        CachePlan cache;
        cache.rates = {{0.5, 0.0}, {0.5, 0.0}};
        cache.budgets = {0.5, 0.5};
        const auto wf = lcu_transmission_rates(lib, cache, {{0, 0}}, 3.0);
        CHECK(wf.allocation[0] == Catch::Approx(1.5).margin(1e-9));
        CHECK(wf.allocation[1] == Catch::Approx(1.5).margin(1e-9));
    }

    SECTION("unequal cached rates match the grid oracle") {
        SourceLibrary lib3;
        lib3.variances = {1.4, 0.9, 1.1};
        CachePlan cache;
        cache.rates = {{0.8, 0.0, 0.0}, {0.0, 0.2, 0.0}, {0.0, 0.0, 0.5}};
        cache.budgets = {0.8, 0.2, 0.5};
        const DemandRealization d{{0, 1, 2}};
        const double capacity = 1.2;
        const auto wf = lcu_transmission_rates(lib3, cache, d, capacity);
        std::vector<double> coeff(3);
        double objective = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            coeff[i] = lib3.variances[d.files[i]] * std::exp2(-2.0 * cache.rates[i][d.files[i]]);
            objective += coeff[i] * std::exp2(-2.0 * wf.allocation[i]);
        }
        const double oracle = oracle::grid_min_weighted_distortion(coeff, capacity, 0.001);
        CHECK(objective <= oracle + 1e-3);
    }
}

TEST_CASE("KKT conditions and budget saturation on random instances") {
    RandomStream rng(13);
    for (int t = 0; t < 40; ++t) {
        const std::size_t m = 1 + rng.uniform_below(8);
        std::vector<double> coeff(m);
        for (double& c : coeff) c = rng.uniform01() < 0.15 ? 0.0 : rng.uniform(0.05, 2.0);
        bool any = false;
        for (double c : coeff) any |= c > 0.0;
        if (!any) coeff[0] = 1.0;
        const double budget = rng.uniform(0.0, 3.0);
        const auto wf = reverse_waterfill(coeff, budget);
        const auto rep = waterfill_kkt_report(coeff, budget, wf);
        CHECK(rep.stationarity_gap <= 1e-6);
        CHECK(rep.slackness_gap <= 1e-6);
        CHECK(rep.budget_gap <= 1e-6);
        // allocation > 0 exactly on the active set
        for (std::size_t j = 0; j < m; ++j)
            CHECK((wf.allocation[j] > 0.0) ==
                  (std::find(wf.active_set.begin(), wf.active_set.end(), j) !=
                   wf.active_set.end()));
    }
}

TEST_CASE("weighted-cost waterfill satisfies weighted stationarity") {
    RandomStream rng(29);
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = 2 + rng.uniform_below(5);
        std::vector<double> coeff(m), cost(m);
        for (std::size_t j = 0; j < m; ++j) {
            coeff[j] = rng.uniform(0.05, 2.0);
            cost[j] = rng.uniform(0.1, 2.0);
        }
        const double budget = rng.uniform(0.1, 2.0);
        const auto wf = reverse_waterfill(coeff, cost, budget);
        const auto rep = waterfill_kkt_report(coeff, cost, budget, wf);
        CHECK(rep.worst() <= 1e-6);
        double spent = 0.0;
        for (std::size_t j = 0; j < m; ++j) spent += cost[j] * wf.allocation[j];
        CHECK(spent == Catch::Approx(budget).margin(1e-9));
    }
}

TEST_CASE("cache allocation depends only on the receiver's own row") {
    SourceLibrary lib;
    lib.variances = {1.0, 1.3, 0.8};
    DemandModel a = zipf_demand(3, 0.5, 2);
    DemandModel b = a;
    b.q[1] = {0.1, 0.1, 0.8}; // perturb the other receiver
    const auto plan_a = lcu_cache_plan(lib, a, {1.0, 1.0});
    const auto plan_b = lcu_cache_plan(lib, b, {1.0, 1.0});
    CHECK(plan_a.rates[0] == plan_b.rates[0]);
}

TEST_CASE("lcu expected distortion compositions") {
    SourceLibrary lib;
    lib.variances = {1.2, 0.9};
    const DemandModel model = zipf_demand(2, 0.6, 2);
    const std::vector<double> budgets = {0.8, 0.8};

    SECTION("zero capacity reduces to cached-only distortion") {
        const auto est =
            lcu_expected_distortion(lib, model, budgets, 0.0, ExpectationMode::Exact);
        const CachePlan cache = lcu_cache_plan(lib, model, budgets);
        double expected = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                expected += model.q[i][j] * distortion(lib.variances[j], cache.rates[i][j]);
        expected /= 2.0;
        CHECK(est.value == Catch::Approx(expected).margin(1e-12));
    }

    SECTION("single receiver with no cache water-fills the link per demand") {
        const DemandModel one = zipf_demand(2, 0.6, 1);
        const auto est = lcu_expected_distortion(lib, one, {0.0}, 1.5, ExpectationMode::Exact);
        double expected = 0.0;
        for (std::size_t j = 0; j < 2; ++j)
            expected += one.q[0][j] * distortion(lib.variances[j], 1.5);
        CHECK(est.value == Catch::Approx(expected).margin(1e-9));
    }

    SECTION("exact enumeration agrees with Monte Carlo") {
        const auto exact =
            lcu_expected_distortion(lib, model, budgets, 1.0, ExpectationMode::Exact);
        const auto mc = lcu_expected_distortion(lib, model, budgets, 1.0,
                                                ExpectationMode::MonteCarlo, 20000, 17);
        CHECK(std::abs(exact.value - mc.value) <= 4.0 * mc.std_error);
    }
}
