#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cachecast/lcu.hpp"
#include "cachecast/multicast_rate.hpp"
#include "cachecast/source_model.hpp"
#include "cachecast/waterfill.hpp"

namespace cachecast {

struct OptimizerConfig {
    int restarts = 8;
    int max_iterations = 400;       // compass sweeps per restart
    std::string step_rule = "compass-halving"; // accepted-step rule descriptor
    double step_init = 0.5;         // initial step, in units of the per-dim scale
    double step_min = 1e-7;
    double tolerance = 1e-9;        // constraint feasibility tolerance
    std::uint64_t seed = 1;
    std::size_t gamma_samples = 10000;
    std::size_t rlfu_scan_max = 50; // at most this many cutoff candidates
    std::size_t rlfu_cutoff_lo = 0; // explicit scan range; 0 = derive from
    std::size_t rlfu_cutoff_hi = 0; // the cache budget and library size
    enum class UnicastMode { PerFile, PerDemand };
    UnicastMode unicast_mode = UnicastMode::PerFile;

    void validate() const {
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts >= 1 required");
        if (!(tolerance > 0.0)) throw std::invalid_argument("OptimizerConfig: tolerance > 0 required");
        if (max_iterations < 1 || gamma_samples == 0 || rlfu_scan_max == 0)
            throw std::invalid_argument("OptimizerConfig: bad iteration/sample counts");
    }
};

struct SolverIterate {
    int restart = 0;
    int iteration = 0;
    double objective = 0.0;
    double step = 0.0;
};

struct CcCmSolution {
    MulticastRatePlan plan;
    double objective = std::numeric_limits<double>::infinity();
    double constraint_slack = 0.0; // R - (coded + expected unicast load)
    std::vector<SolverIterate> trace;
    bool feasible = false;
    std::size_t m_tilde = 0; // RLFU cutoff (file count), 0 when not applicable
    // Per-demand unicast table in odometer demand order (PerDemand mode only).
    std::vector<std::vector<double>> unicast_per_demand;
};

namespace detail {

// Projection onto {x >= 0, sum x <= budget}.
inline void project_capped_simplex(std::vector<double>& x, std::size_t begin, std::size_t count,
                                   double budget) {
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        double& v = x[begin + k];
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (sum <= budget) return;
    if (budget <= 0.0) {
        for (std::size_t k = 0; k < count; ++k) x[begin + k] = 0.0;
        return;
    }
    std::vector<double> sorted(x.begin() + begin, x.begin() + begin + count);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        cum += sorted[k];
        const double t = (cum - budget) / static_cast<double>(k + 1);
        if (k + 1 == count || sorted[k + 1] <= t) {
            tau = t;
            break;
        }
    }
    for (std::size_t k = 0; k < count; ++k)
        x[begin + k] = std::max(0.0, x[begin + k] - tau);
}

// Compass (pattern) search with halving steps. Greedy over coordinate moves:
// takes the best improving +-step move per sweep, halves the step when no
// move improves. Deterministic given the start point.
inline std::pair<std::vector<double>, double> compass_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<void(std::vector<double>&)>& project, std::vector<double> x,
    const std::vector<double>& scale, const OptimizerConfig& cfg, int restart_id,
    std::vector<SolverIterate>* trace) {
    project(x);
    double fx = objective(x);
    double step = cfg.step_init;
    for (int iter = 0; iter < cfg.max_iterations && step > cfg.step_min; ++iter) {
        std::vector<double> best_x;
        double best_f = fx;
        for (std::size_t dmn = 0; dmn < x.size(); ++dmn) {
            for (double sign : {1.0, -1.0}) {
                std::vector<double> cand = x;
                cand[dmn] += sign * step * scale[dmn];
                project(cand);
                const double f = objective(cand);
                if (f < best_f - 1e-15) {
                    best_f = f;
                    best_x = std::move(cand);
                }
            }
        }
        if (best_x.empty()) {
            step *= 0.5;
            continue;
        }
        x = std::move(best_x);
        fx = best_f;
        if (trace && trace->size() < 4096)
            trace->push_back({restart_id, iter, fx, step});
    }
    return {std::move(x), fx};
}

inline bool lexicographically_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Optimal per-file unicast given the rates already in place: minimizes the
// expected distortion with expected link load sum_{i,j} q_{i,j} Rh_{i,j}
// capped by the leftover budget. Returns the rates and the resulting exact
// expected distortion.
struct UnicastSolve {
    std::vector<std::vector<double>> rates;
    double objective = 0.0;
};

inline UnicastSolve solve_unicast_per_file(const SourceLibrary& lib, const DemandModel& model,
                                           const std::vector<std::vector<double>>& base_rate,
                                           double leftover) {
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    std::vector<double> coeff, cost;
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    coeff.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double q = model.q[i][j];
            if (q <= 0.0) continue;
            coeff.push_back(q * lib.variances[j] * std::exp2(-2.0 * base_rate[i][j]));
            cost.push_back(q);
            slots.emplace_back(i, j);
        }
    UnicastSolve out;
    out.rates.assign(n, std::vector<double>(m, 0.0));
    if (leftover > 0.0 && !coeff.empty()) {
        const WaterfillResult wf = reverse_waterfill(coeff, cost, leftover);
        for (std::size_t k = 0; k < slots.size(); ++k)
            out.rates[slots[k].first][slots[k].second] = wf.allocation[k];
    }
    std::vector<std::vector<double>> total = base_rate;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) total[i][j] += out.rates[i][j];
    out.objective = expected_distortion_per_file(lib, model, total);
    return out;
}

// Symmetric single-row variant; unicast load costs n * q_j per allocated bit.
inline UnicastSolve solve_unicast_symmetric(const SourceLibrary& lib,
                                            const std::vector<double>& q_row,
                                            const std::vector<double>& base_row, double leftover,
                                            std::size_t n) {
    const std::size_t m = q_row.size();
    std::vector<double> coeff(m, 0.0), cost(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        coeff[j] = q_row[j] * lib.variances[j] * std::exp2(-2.0 * base_row[j]);
        cost[j] = std::max(static_cast<double>(n) * q_row[j], 1e-300);
    }
    UnicastSolve out;
    out.rates.assign(1, std::vector<double>(m, 0.0));
    if (leftover > 0.0) {
        const WaterfillResult wf = reverse_waterfill(coeff, cost, leftover);
        out.rates[0] = wf.allocation;
    }
    out.objective = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        if (q_row[j] > 0.0)
            out.objective +=
                q_row[j] * lib.variances[j] * std::exp2(-2.0 * (base_row[j] + out.rates[0][j]));
    return out;
}

} // namespace detail

// Fully uniform two-variable design: maximize Mt + Rt with the closed-form
// coded-multicast load under the capacity, Mt capped by the per-file cache
// budget. Mt = cap is verified against a coarse Mt grid each call rather
// than assumed.
inline CcCmSolution optimize_uniform(double sigma2, double cache_bound, double capacity,
                                     std::size_t n) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("optimize_uniform: sigma2 must be positive");
    if (cache_bound < 0.0 || capacity < 0.0 || n == 0)
        throw std::invalid_argument("optimize_uniform: bad arguments");

    auto max_multicast = [&](double mt) {
        if (capacity <= 0.0) return 0.0;
        double hi = 1.0;
        int guard = 0;
        while (rate_uniform(mt, hi, n) <= capacity && guard++ < 200) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rate_uniform(mt, mid, n) <= capacity)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    };

    double best_mt = cache_bound;
    double best_rt = max_multicast(cache_bound);
    for (int k = 1; k <= 16; ++k) {
        const double mt = cache_bound * static_cast<double>(16 - k) / 16.0;
        const double rt = max_multicast(mt);
        if (mt + rt > best_mt + best_rt + 1e-12) {
            best_mt = mt;
            best_rt = rt;
        }
    }

    CcCmSolution sol;
    sol.plan.cached.assign(n, std::vector<double>(1, best_mt));
    sol.plan.multicast.assign(n, std::vector<double>(1, best_rt));
    sol.plan.unicast.assign(n, std::vector<double>(1, 0.0));
    sol.objective = sigma2 * std::exp2(-2.0 * (best_mt + best_rt));
    sol.constraint_slack = capacity - rate_uniform(best_mt, best_rt, n);
    sol.feasible = sol.constraint_slack >= -1e-9;
    return sol;
}

// RLFU design: scan the cutoff m_tilde, and for each cutoff run a projected
// compass search over the per-file cached and multicast rates of the covered
// files, with the unicast stage solved in closed form from the leftover.
inline CcCmSolution optimize_rlfu(const SourceLibrary& lib, const std::vector<double>& q_row,
                                  double cache_budget, double capacity, std::size_t n,
                                  const OptimizerConfig& cfg) {
    lib.validate();
    cfg.validate();
    const std::size_t m = lib.file_count();
    if (q_row.size() != m) throw std::invalid_argument("optimize_rlfu: row size mismatch");
    if (cache_budget < 0.0 || capacity < 0.0 || n == 0)
        throw std::invalid_argument("optimize_rlfu: bad arguments");

    std::size_t scan_begin, scan_end;
    if (cfg.rlfu_cutoff_lo != 0 || cfg.rlfu_cutoff_hi != 0) {
        scan_begin = cfg.rlfu_cutoff_lo;
        scan_end = cfg.rlfu_cutoff_hi;
        if (scan_begin < 1 || scan_begin > scan_end || scan_end > m)
            throw std::invalid_argument("optimize_rlfu: empty or out-of-range cutoff scan");
    } else {
        scan_begin = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(cache_budget - 1e-9)));
        scan_begin = std::min(scan_begin, m);
        scan_end = m;
    }
    std::vector<std::size_t> cutoffs;
    {
        const std::size_t span = scan_end - scan_begin + 1;
        const std::size_t stride = std::max<std::size_t>(1, (span + cfg.rlfu_scan_max - 1) /
                                                                cfg.rlfu_scan_max);
        for (std::size_t c = scan_begin; c <= scan_end; c += stride) cutoffs.push_back(c);
        if (cutoffs.back() != scan_end) cutoffs.push_back(scan_end);
    }

    CcCmSolution best;
    RandomStream root(cfg.seed);
    double scale0 = 0.0;
    for (std::size_t j = 0; j < m; ++j) scale0 += q_row[j] * lib.variances[j];
    const double rho = 1e4 * (1.0 + scale0) / std::max(1.0, capacity * capacity);
    for (std::size_t mt_count : cutoffs) {
        const double mt_cap = cache_budget / static_cast<double>(mt_count);
        double g = 0.0;
        for (std::size_t j = 0; j < mt_count; ++j) g += q_row[j];

        double rt_hi = 1.0;
        int guard = 0;
        while (rate_rlfu(mt_cap, rt_hi, mt_count, q_row, n) <= capacity && guard++ < 200)
            rt_hi *= 2.0;

        auto evaluate = [&](const std::vector<double>& x) {
            const double mt = x[0], rt = x[1];
            const double coded = rate_rlfu(mt, rt, mt_count, q_row, n);
            const double leftover = capacity - coded;
            std::vector<double> base(m, 0.0);
            for (std::size_t j = 0; j < mt_count; ++j) base[j] = mt + rt;
            if (leftover < 0.0) {
                const auto sub = detail::solve_unicast_symmetric(lib, q_row, base, 0.0, n);
                return sub.objective + rho * leftover * leftover;
            }
            return detail::solve_unicast_symmetric(lib, q_row, base, leftover, n).objective;
        };
        auto project = [&](std::vector<double>& x) {
            x[0] = std::clamp(x[0], 0.0, mt_cap);
            x[1] = std::clamp(x[1], 0.0, rt_hi);
        };

        std::vector<std::vector<double>> starts = {{mt_cap, 0.0}, {mt_cap, 0.5 * rt_hi}};
        RandomStream rng = root.fork(mt_count);
        while (starts.size() < static_cast<std::size_t>(cfg.restarts))
            starts.push_back({rng.uniform(0.0, mt_cap), rng.uniform(0.0, rt_hi)});

        std::vector<double> scale = {std::max(mt_cap, 0.25), std::max(rt_hi * 0.25, 0.25)};
        std::vector<double> cand_best;
        double cand_val = std::numeric_limits<double>::infinity();
        std::vector<SolverIterate> trace;
        for (std::size_t s = 0; s < starts.size(); ++s) {
            auto [pt, val] = detail::compass_minimize(evaluate, project, starts[s], scale, cfg,
                                                      static_cast<int>(s), &trace);
            if (val < cand_val ||
                (val == cand_val && detail::lexicographically_less(pt, cand_best))) {
                cand_val = val;
                cand_best = pt;
            }
        }

        const double mt = cand_best[0];
        double rt = cand_best[1];
        // Repair: scale the multicast rate back inside the capacity so the
        // soft-penalty search always yields a feasible plan.
        if (rate_rlfu(mt, rt, mt_count, q_row, n) > capacity) {
            double lo = 0.0, hi = rt;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (rate_rlfu(mt, mid, mt_count, q_row, n) <= capacity)
                    lo = mid;
                else
                    hi = mid;
            }
            rt = lo;
        }
        const double coded = rate_rlfu(mt, rt, mt_count, q_row, n);
        const double leftover = std::max(0.0, capacity - coded);
        std::vector<double> base(m, 0.0);
        for (std::size_t j = 0; j < mt_count; ++j) base[j] = mt + rt;
        const auto uni = detail::solve_unicast_symmetric(lib, q_row, base, leftover, n);

        if (uni.objective < best.objective) {
            best = CcCmSolution{};
            best.m_tilde = mt_count;
            best.objective = uni.objective;
            best.trace = std::move(trace);
            std::vector<double> cached_row(m, 0.0), multicast_row(m, 0.0);
            for (std::size_t j = 0; j < mt_count; ++j) {
                cached_row[j] = mt;
                multicast_row[j] = rt;
            }
            best.plan.cached.assign(n, cached_row);
            best.plan.multicast.assign(n, multicast_row);
            best.plan.unicast.assign(n, uni.rates[0]);
            double load = coded;
            for (std::size_t j = 0; j < m; ++j)
                load += static_cast<double>(n) * q_row[j] * uni.rates[0][j];
            best.constraint_slack = capacity - load;
            best.feasible = best.constraint_slack >= -cfg.tolerance;
        }
    }
    return best;
}

// User-symmetric design: per-file cached and multicast rates shared by all
// receivers, coded load through the exact binomial form, unicast in closed
// form from the leftover. Multi-start projected compass search.
inline CcCmSolution optimize_symmetric(const SourceLibrary& lib, const std::vector<double>& q_row,
                                       double cache_budget, double capacity, std::size_t n,
                                       const OptimizerConfig& cfg) {
    lib.validate();
    cfg.validate();
    const std::size_t m = lib.file_count();
    if (q_row.size() != m) throw std::invalid_argument("optimize_symmetric: row size mismatch");
    if (cache_budget < 0.0 || capacity < 0.0 || n == 0)
        throw std::invalid_argument("optimize_symmetric: bad arguments");

    const double rt_hi = cache_budget + capacity + 10.0;
    double scale0 = 0.0;
    for (std::size_t j = 0; j < m; ++j) scale0 += q_row[j] * lib.variances[j];
    const double rho = 1e4 * (1.0 + scale0) / std::max(1.0, capacity * capacity);
    auto evaluate = [&](const std::vector<double>& x) {
        std::vector<double> cached(x.begin(), x.begin() + m);
        std::vector<double> multicast(x.begin() + m, x.end());
        const double coded = rate_symmetric(cached, multicast, q_row, n);
        const double leftover = capacity - coded;
        std::vector<double> base(m);
        for (std::size_t j = 0; j < m; ++j) base[j] = cached[j] + multicast[j];
        if (leftover < 0.0) {
            const auto sub = detail::solve_unicast_symmetric(lib, q_row, base, 0.0, n);
            return sub.objective + rho * leftover * leftover;
        }
        return detail::solve_unicast_symmetric(lib, q_row, base, leftover, n).objective;
    };
    auto project = [&](std::vector<double>& x) {
        detail::project_capped_simplex(x, 0, m, cache_budget);
        for (std::size_t j = 0; j < m; ++j) x[m + j] = std::clamp(x[m + j], 0.0, rt_hi);
    };

    std::vector<std::vector<double>> starts;
    {
        // Local-caching start: per-row waterfill placement, no multicast.
        std::vector<double> start(2 * m, 0.0);
        const auto wf = lcu_cache_allocation(lib, q_row, cache_budget);
        for (std::size_t j = 0; j < m; ++j) start[j] = wf.allocation[j];
        starts.push_back(start);
        // Uniform-spread start.
        std::vector<double> uniform(2 * m, 0.0);
        for (std::size_t j = 0; j < m; ++j) uniform[j] = cache_budget / static_cast<double>(m);
        starts.push_back(uniform);
    }
    RandomStream rng(cfg.seed);
    while (starts.size() < static_cast<std::size_t>(cfg.restarts)) {
        std::vector<double> s(2 * m);
        for (std::size_t j = 0; j < m; ++j) s[j] = rng.uniform01() * cache_budget;
        for (std::size_t j = 0; j < m; ++j) s[m + j] = rng.uniform01() * std::max(capacity, 1.0);
        starts.push_back(std::move(s));
    }

    std::vector<double> scale(2 * m);
    for (std::size_t j = 0; j < m; ++j) scale[j] = std::max(cache_budget * 0.5, 0.25);
    for (std::size_t j = 0; j < m; ++j) scale[m + j] = std::max(capacity * 0.5, 0.25);

    CcCmSolution sol;
    std::vector<double> best_x;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        auto [pt, val] = detail::compass_minimize(evaluate, project, starts[s], scale, cfg,
                                                  static_cast<int>(s), &sol.trace);
        if (val < sol.objective ||
            (val == sol.objective && detail::lexicographically_less(pt, best_x))) {
            sol.objective = val;
            best_x = pt;
        }
    }

    std::vector<double> cached(best_x.begin(), best_x.begin() + m);
    std::vector<double> multicast(best_x.begin() + m, best_x.end());
    if (rate_symmetric(cached, multicast, q_row, n) > capacity) {
        double lo = 0.0, hi = 1.0;
        auto scaled = [&](double s) {
            std::vector<double> mt = multicast;
            for (double& v : mt) v *= s;
            return mt;
        };
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rate_symmetric(cached, scaled(mid), q_row, n) <= capacity)
                lo = mid;
            else
                hi = mid;
        }
        multicast = scaled(lo);
    }
    const double coded = rate_symmetric(cached, multicast, q_row, n);
    const double leftover = std::max(0.0, capacity - coded);
    std::vector<double> base(m);
    for (std::size_t j = 0; j < m; ++j) base[j] = cached[j] + multicast[j];
    const auto uni = detail::solve_unicast_symmetric(lib, q_row, base, leftover, n);
    sol.objective = uni.objective;
    sol.plan.cached.assign(n, cached);
    sol.plan.multicast.assign(n, multicast);
    sol.plan.unicast.assign(n, uni.rates[0]);
    double load = coded;
    for (std::size_t j = 0; j < m; ++j)
        load += static_cast<double>(n) * q_row[j] * uni.rates[0][j];
    sol.constraint_slack = capacity - load;
    sol.feasible = sol.constraint_slack >= -cfg.tolerance;
    return sol;
}

// General heterogeneous design over per-(receiver, file) cached and coded
// multicast rates. The coded load is Theorem 2's average with frozen Monte
// Carlo argmax draws (common random numbers across all evaluations); the
// unicast stage is solved in closed form from the leftover. The reported
// objective is the exact per-file expectation, not the solver surrogate.
inline CcCmSolution optimize_general(const SourceLibrary& lib, const DemandModel& model,
                                     const std::vector<double>& budgets, double capacity,
                                     const OptimizerConfig& cfg) {
    lib.validate();
    model.validate();
    cfg.validate();
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    if (budgets.size() != n) throw std::invalid_argument("optimize_general: budget count mismatch");
    if (capacity < 0.0) throw std::invalid_argument("optimize_general: negative capacity");
    if (n > kSubsetEnumerationCap)
        throw std::length_error("optimize_general: n above subset cap; use optimize_symmetric");

    const GammaSampleSet frozen = GammaSampleSet::draw(model, cfg.gamma_samples, mix64(cfg.seed));

    const bool per_demand = cfg.unicast_mode == OptimizerConfig::UnicastMode::PerDemand;
    constexpr std::size_t kPerDemandCap = 4096;
    if (per_demand && demand_space_size_capped(m, n, kPerDemandCap) > kPerDemandCap)
        throw std::length_error("optimize_general: demand space too large for per-demand unicast");

    auto make_plan = [&](const std::vector<double>& x) {
        MulticastRatePlan plan;
        plan.cached.assign(n, std::vector<double>(m, 0.0));
        plan.multicast.assign(n, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                plan.cached[i][j] = x[i * m + j];
                plan.multicast[i][j] = x[n * m + i * m + j];
            }
        return plan;
    };

    // Per-demand unicast: water-fill over all (receiver, demand) slots with
    // expected-load costs Pi_d; under the averaged constraint the optimum
    // collapses to a per-(receiver, requested file) profile.
    auto solve_unicast_per_demand = [&](const std::vector<std::vector<double>>& base,
                                        double leftover,
                                        std::vector<std::vector<double>>* table) {
        std::vector<double> coeff, cost;
        std::vector<double> probs;
        std::vector<DemandRealization> demands;
        for_each_demand(m, n, [&](const DemandRealization& d) {
            double p = 1.0;
            for (std::size_t i = 0; i < n; ++i) p *= model.q[i][d.files[i]];
            demands.push_back(d);
            probs.push_back(p);
        });
        for (std::size_t r = 0; r < demands.size(); ++r)
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t f = demands[r].files[i];
                coeff.push_back(probs[r] / static_cast<double>(n) * lib.variances[f] *
                                std::exp2(-2.0 * base[i][f]));
                cost.push_back(std::max(probs[r], 1e-300));
            }
        std::vector<double> alloc(coeff.size(), 0.0);
        if (leftover > 0.0) alloc = reverse_waterfill(coeff, cost, leftover).allocation;
        double obj = 0.0;
        if (table) table->assign(demands.size(), std::vector<double>(n, 0.0));
        for (std::size_t r = 0; r < demands.size(); ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t f = demands[r].files[i];
                const double a = alloc[r * n + i];
                acc += lib.variances[f] * std::exp2(-2.0 * (base[i][f] + a));
                if (table) (*table)[r][i] = a;
            }
            obj += probs[r] * acc / static_cast<double>(n);
        }
        return obj;
    };

    double scale0 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) scale0 += model.q[i][j] * lib.variances[j];
    scale0 /= static_cast<double>(n);
    const double rho = 1e4 * (1.0 + scale0) / std::max(1.0, capacity * capacity);

    auto evaluate = [&](const std::vector<double>& x) {
        const MulticastRatePlan plan = make_plan(x);
        const double coded = rate_gcc_average_with(plan, model, frozen);
        const double leftover = capacity - coded;
        std::vector<std::vector<double>> base(n, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                base[i][j] = plan.cached[i][j] + plan.multicast[i][j];
        if (leftover < 0.0) {
            const double obj = expected_distortion_per_file(lib, model, base);
            return obj + rho * leftover * leftover;
        }
        if (per_demand) return solve_unicast_per_demand(base, leftover, nullptr);
        return detail::solve_unicast_per_file(lib, model, base, leftover).objective;
    };

    const double rt_hi = capacity + *std::max_element(budgets.begin(), budgets.end()) + 10.0;
    auto project = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i)
            detail::project_capped_simplex(x, i * m, m, budgets[i]);
        for (std::size_t k = n * m; k < 2 * n * m; ++k) x[k] = std::clamp(x[k], 0.0, rt_hi);
    };

    std::vector<std::vector<double>> starts;
    {
        // Local-caching emulation start: per-receiver waterfill, no multicast.
        std::vector<double> s(2 * n * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto wf = lcu_cache_allocation(lib, model.q[i], budgets[i]);
            for (std::size_t j = 0; j < m; ++j) s[i * m + j] = wf.allocation[j];
        }
        starts.push_back(s);
        starts.push_back(std::vector<double>(2 * n * m, 0.0));
    }
    RandomStream rng(cfg.seed);
    while (starts.size() < static_cast<std::size_t>(cfg.restarts)) {
        std::vector<double> s(2 * n * m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                s[i * m + j] = rng.uniform01() * budgets[i];
                s[n * m + i * m + j] = rng.uniform01() * std::max(capacity, 1.0);
            }
        starts.push_back(std::move(s));
    }

    std::vector<double> scale(2 * n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            scale[i * m + j] = std::max(budgets[i] * 0.5, 0.25);
            scale[n * m + i * m + j] = std::max(capacity * 0.5, 0.25);
        }

    CcCmSolution sol;
    std::vector<double> best_x;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        auto [pt, val] = detail::compass_minimize(evaluate, project, starts[s], scale, cfg,
                                                  static_cast<int>(s), &sol.trace);
        if (val < sol.objective ||
            (val == sol.objective && detail::lexicographically_less(pt, best_x))) {
            sol.objective = val;
            best_x = pt;
        }
    }

    MulticastRatePlan plan = make_plan(best_x);
    if (rate_gcc_average_with(plan, model, frozen) > capacity) {
        double lo = 0.0, hi = 1.0;
        auto scaled = [&](double s) {
            MulticastRatePlan p = plan;
            for (auto& row : p.multicast)
                for (double& v : row) v *= s;
            return p;
        };
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rate_gcc_average_with(scaled(mid), model, frozen) <= capacity)
                lo = mid;
            else
                hi = mid;
        }
        plan = scaled(lo);
    }
    const double coded = rate_gcc_average_with(plan, model, frozen);
    const double leftover = std::max(0.0, capacity - coded);
    std::vector<std::vector<double>> base(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) base[i][j] = plan.cached[i][j] + plan.multicast[i][j];

    double unicast_load = 0.0;
    if (per_demand) {
        sol.objective = solve_unicast_per_demand(base, leftover, &sol.unicast_per_demand);
        std::size_t rank = 0;
        double load = 0.0;
        for_each_demand(m, n, [&](const DemandRealization& d) {
            double p = 1.0;
            for (std::size_t i = 0; i < n; ++i) p *= model.q[i][d.files[i]];
            for (std::size_t i = 0; i < n; ++i) load += p * sol.unicast_per_demand[rank][i];
            ++rank;
        });
        unicast_load = load;
        plan.unicast.assign(n, std::vector<double>(m, 0.0));
    } else {
        const auto uni = detail::solve_unicast_per_file(lib, model, base, leftover);
        sol.objective = uni.objective;
        plan.unicast = uni.rates;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                unicast_load += model.q[i][j] * plan.unicast[i][j];
    }
    sol.plan = std::move(plan);
    sol.constraint_slack = capacity - (coded + unicast_load);
    sol.feasible = sol.constraint_slack >= -cfg.tolerance;
    return sol;
}

} // namespace cachecast
