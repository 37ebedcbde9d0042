#pragma once

// Brute-force reference implementations used only by tests and the validate
// command. Everything here is deliberately independent of the closed-form /
// solver code paths it cross-checks: grid enumeration instead of KKT
// solutions, backtracking coloring instead of greedy coloring.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cachecast/gcc_sim.hpp"
#include "cachecast/multicast_rate.hpp"
#include "cachecast/source_model.hpp"

namespace cachecast::oracle {

// Minimum of sum_j coeff_j 2^{-2 x_j} over the grid {x >= 0, sum x = budget}
// with the given step (the objective is strictly decreasing, so the budget
// binds at the optimum).
inline double grid_min_weighted_distortion(const std::vector<double>& coeff, double budget,
                                           double step) {
    if (coeff.empty() || step <= 0.0 || budget < 0.0)
        throw std::invalid_argument("grid_min_weighted_distortion: bad arguments");
    const std::size_t k = coeff.size();
    std::vector<double> x(k, 0.0);
    double best = std::numeric_limits<double>::infinity();
    const long long ticks = std::llround(budget / step);

    std::function<void(std::size_t, long long, double)> rec = [&](std::size_t dim,
                                                                  long long left, double acc) {
        if (acc >= best) return; // partial sums only grow
        if (dim + 1 == k) {
            const double v = acc + coeff[dim] * std::exp2(-2.0 * static_cast<double>(left) * step);
            best = std::min(best, v);
            return;
        }
        for (long long t = 0; t <= left; ++t)
            rec(dim + 1, left - t,
                acc + coeff[dim] * std::exp2(-2.0 * static_cast<double>(t) * step));
    };
    rec(0, ticks, 0.0);
    return best;
}

// Exact chromatic number by iterative-deepening backtracking; intended for
// graphs of at most ~16 vertices.
inline int chromatic_number(const ConflictGraph& g) {
    const std::size_t total = g.size();
    if (total == 0) return 0;

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });

    std::vector<int> color(total, -1);
    std::function<bool(std::size_t, int)> assign = [&](std::size_t pos, int k) {
        if (pos == total) return true;
        const std::size_t v = order[pos];
        int used_max = -1;
        for (std::size_t p = 0; p < pos; ++p) used_max = std::max(used_max, color[order[p]]);
        const int limit = std::min(k - 1, used_max + 1); // new colors in canonical order
        for (int c = 0; c <= limit; ++c) {
            bool ok = true;
            for (std::size_t p = 0; p < pos && ok; ++p)
                if (g.edge(v, order[p]) && color[order[p]] == c) ok = false;
            if (!ok) continue;
            color[v] = c;
            if (assign(pos + 1, k)) return true;
            color[v] = -1;
        }
        return false;
    };

    for (int k = 1; k <= static_cast<int>(total); ++k) {
        std::fill(color.begin(), color.end(), -1);
        if (assign(0, k)) return k;
    }
    return static_cast<int>(total);
}

// Average aggregate coded multicast rate by exhaustive demand enumeration of
// the per-demand closed form (cross-checks the averaged Theorem 2 route).
inline double enumerated_average_rate(const MulticastRatePlan& plan, const DemandModel& model) {
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    if (demand_space_size_capped(m, n, kExactDemandCap) > kExactDemandCap)
        throw std::length_error("enumerated_average_rate: demand space too large");
    double acc = 0.0;
    for_each_demand(m, n, [&](const DemandRealization& d) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p *= model.q[i][d.files[i]];
        if (p > 0.0) acc += p * rate_gcc_demand(plan, d);
    });
    return acc;
}

// Exhaustive grid search for the user-symmetric CC-CM design at tiny sizes:
// per-file cached, multicast, and unicast rates on a lattice, feasibility
// through the symmetric coded load plus the expected unicast load. Returns
// the best objective found (an upper bound on the true optimum).
inline double grid_ccm_symmetric(const SourceLibrary& lib, const std::vector<double>& q_row,
                                 double cache_budget, double capacity, std::size_t n, double step,
                                 double rate_max) {
    const std::size_t m = lib.file_count();
    const long long cache_ticks = std::llround(cache_budget / step);
    const long long rate_ticks = std::llround(rate_max / step);
    std::vector<double> cached(m, 0.0), multicast(m, 0.0), unicast(m, 0.0);
    double best = std::numeric_limits<double>::infinity();

    std::function<void(std::size_t)> rec_unicast;
    std::function<void(std::size_t, double)> rec_multicast;
    std::function<void(std::size_t, long long)> rec_cached;

    auto objective = [&]() {
        double obj = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            obj += q_row[j] * lib.variances[j] *
                   std::exp2(-2.0 * (cached[j] + multicast[j] + unicast[j]));
        return obj;
    };

    rec_unicast = [&](std::size_t dim) {
        if (dim == m) {
            double load = rate_symmetric(cached, multicast, q_row, n);
            for (std::size_t j = 0; j < m; ++j)
                load += static_cast<double>(n) * q_row[j] * unicast[j];
            if (load <= capacity + 1e-12) best = std::min(best, objective());
            return;
        }
        for (long long t = 0; t <= rate_ticks; ++t) {
            unicast[dim] = static_cast<double>(t) * step;
            rec_unicast(dim + 1);
        }
        unicast[dim] = 0.0;
    };
    rec_multicast = [&](std::size_t dim, double coded_budget_hint) {
        if (dim == m) {
            rec_unicast(0);
            return;
        }
        for (long long t = 0; t <= rate_ticks; ++t) {
            multicast[dim] = static_cast<double>(t) * step;
            rec_multicast(dim + 1, coded_budget_hint);
        }
        multicast[dim] = 0.0;
    };
    rec_cached = [&](std::size_t dim, long long left) {
        if (dim == m) {
            rec_multicast(0, 0.0);
            return;
        }
        for (long long t = 0; t <= left; ++t) {
            cached[dim] = static_cast<double>(t) * step;
            rec_cached(dim + 1, left - t);
        }
        cached[dim] = 0.0;
    };
    rec_cached(0, cache_ticks);
    return best;
}

// 2-D grid search for the fully uniform design: best Mt + Rt over the lattice
// subject to the closed-form load and the cache bound.
inline double grid_uniform_best_total(double cache_bound, double capacity, std::size_t n,
                                      double step) {
    double best = 0.0;
    const long long mt_ticks = std::llround(cache_bound / step);
    for (long long a = 0; a <= mt_ticks; ++a) {
        const double mt = static_cast<double>(a) * step;
        double rt = 0.0;
        while (rate_uniform(mt, rt + step, n) <= capacity) rt += step;
        best = std::max(best, mt + rt);
    }
    return best;
}

} // namespace cachecast::oracle
