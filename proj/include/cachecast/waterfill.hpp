#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cachecast {

inline constexpr double kTwoLn2 = 2.0 * 0.6931471805599453;

// Solution of min sum_k coeff_k 2^{-2 x_k} s.t. sum_k cost_k x_k = budget,
// x >= 0. Active entries equalize the marginal value
// 2 ln2 * coeff_k * 2^{-2 x_k} / cost_k at the water level.
struct WaterfillResult {
    std::vector<double> allocation;
    double water_level = 0.0;
    std::vector<std::size_t> active_set;

    double total() const {
        double s = 0.0;
        for (double x : allocation) s += x;
        return s;
    }
};

namespace detail {

inline double waterfill_alloc(double coeff, double cost, double level) {
    if (coeff <= 0.0) return 0.0;
    const double arg = kTwoLn2 * coeff / (cost * level);
    if (arg <= 1.0) return 0.0;
    return 0.5 * std::log2(arg);
}

} // namespace detail

// Reverse water-filling with per-unit budget costs. coeff_k is the product
// weight_k * variance_k from the objective; cost_k the budget consumed per
// allocated bit. Entries with coeff_k == 0 never activate. The water level
// is found by bisection (200 iterations or 1e-12 relative interval width);
// the residual is then spread over the active set so the budget binds to
// machine precision.
inline WaterfillResult reverse_waterfill(const std::vector<double>& coeff,
                                         const std::vector<double>& cost, double budget) {
    const std::size_t k = coeff.size();
    if (cost.size() != k) throw std::invalid_argument("reverse_waterfill: size mismatch");
    if (budget < 0.0) throw std::invalid_argument("reverse_waterfill: negative budget");
    double hi = 0.0;
    double cost_floor = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (coeff[j] < 0.0) throw std::invalid_argument("reverse_waterfill: negative coefficient");
        if (coeff[j] > 0.0 && !(cost[j] > 0.0))
            throw std::invalid_argument("reverse_waterfill: non-positive cost on active entry");
        if (coeff[j] > 0.0) {
            hi = std::max(hi, kTwoLn2 * coeff[j] / cost[j]);
            cost_floor = cost_floor == 0.0 ? cost[j] : std::min(cost_floor, cost[j]);
        }
    }

    WaterfillResult res;
    res.allocation.assign(k, 0.0);
    if (budget == 0.0 || hi == 0.0) {
        if (budget > 0.0 && hi == 0.0)
            throw std::domain_error("reverse_waterfill: all coefficients are zero");
        res.water_level = hi;
        return res;
    }

    auto spend = [&](double level) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            s += cost[j] * detail::waterfill_alloc(coeff[j], cost[j], level);
        return s;
    };

    // Bracket: spend(hi) == 0 <= budget; walk lo down until spend(lo) >= budget.
    double lo = hi;
    while (spend(lo) < budget) lo *= 0.25;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (spend(mid) >= budget)
            lo = mid;
        else
            hi = mid;
    }
    const double level = 0.5 * (lo + hi);

    double spent = 0.0, active_cost = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        res.allocation[j] = detail::waterfill_alloc(coeff[j], cost[j], level);
        if (res.allocation[j] > 0.0) {
            res.active_set.push_back(j);
            spent += cost[j] * res.allocation[j];
            active_cost += cost[j];
        }
    }
    // Exact budget saturation: distribute the bisection residual uniformly
    // over the active set (a pure shift of the common water line).
    if (!res.active_set.empty() && active_cost > 0.0) {
        const double shift = (budget - spent) / active_cost;
        for (std::size_t j : res.active_set) res.allocation[j] += shift;
    }
    res.water_level = level;
    return res;
}

inline WaterfillResult reverse_waterfill(const std::vector<double>& coeff, double budget) {
    return reverse_waterfill(coeff, std::vector<double>(coeff.size(), 1.0), budget);
}

// Largest relative KKT violation of a claimed water-filling solution:
// stationarity on the active set (marginal value equals the water level)
// and complementary slackness off it (marginal value below the level).
struct KktReport {
    double stationarity_gap = 0.0;
    double slackness_gap = 0.0;
    double budget_gap = 0.0;

    double worst() const { return std::max({stationarity_gap, slackness_gap, budget_gap}); }
};

inline KktReport waterfill_kkt_report(const std::vector<double>& coeff,
                                      const std::vector<double>& cost, double budget,
                                      const WaterfillResult& res) {
    KktReport rep;
    const double level = res.water_level;
    for (std::size_t j = 0; j < coeff.size(); ++j) {
        if (coeff[j] <= 0.0) continue;
        const double marginal = kTwoLn2 * coeff[j] * std::exp2(-2.0 * res.allocation[j]) / cost[j];
        if (res.allocation[j] > 0.0)
            rep.stationarity_gap =
                std::max(rep.stationarity_gap, std::abs(marginal - level) / level);
        else if (marginal > level)
            rep.slackness_gap = std::max(rep.slackness_gap, (marginal - level) / level);
    }
    double spent = 0.0;
    for (std::size_t j = 0; j < coeff.size(); ++j) spent += cost[j] * res.allocation[j];
    rep.budget_gap = std::abs(spent - budget) / std::max(1.0, budget);
    return rep;
}

inline KktReport waterfill_kkt_report(const std::vector<double>& coeff, double budget,
                                      const WaterfillResult& res) {
    return waterfill_kkt_report(coeff, std::vector<double>(coeff.size(), 1.0), budget, res);
}

} // namespace cachecast
