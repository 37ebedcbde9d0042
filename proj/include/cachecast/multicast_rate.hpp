#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cachecast/random.hpp"
#include "cachecast/source_model.hpp"

namespace cachecast {

// Joint caching / delivery rate plan: per (receiver, file) cached rate
// M_{i,j}, coded-multicast rate Rt_{i,j} and (optionally) per-file unicast
// rate Rh_{i,j}, all in bits/source-sample.
struct MulticastRatePlan {
    std::vector<std::vector<double>> cached;
    std::vector<std::vector<double>> multicast;
    std::vector<std::vector<double>> unicast; // may be empty

    std::size_t receiver_count() const { return cached.size(); }
    std::size_t file_count() const { return cached.empty() ? 0 : cached.front().size(); }

    void validate() const {
        const std::size_t n = receiver_count();
        const std::size_t m = file_count();
        if (n == 0 || m == 0) throw std::invalid_argument("MulticastRatePlan: empty plan");
        auto check = [&](const std::vector<std::vector<double>>& mat, const char* what) {
            if (mat.size() != n) throw std::invalid_argument(std::string(what) + ": row mismatch");
            for (const auto& row : mat) {
                if (row.size() != m)
                    throw std::invalid_argument(std::string(what) + ": column mismatch");
                for (double v : row)
                    if (v < 0.0) throw std::invalid_argument(std::string(what) + ": negative rate");
            }
        };
        check(cached, "cached");
        check(multicast, "multicast");
        if (!unicast.empty()) check(unicast, "unicast");
    }

    // Probability that a packet within the storing range of file j is cached
    // at receiver i: p^c = M/(M + Rt), defined as 1 when both vanish.
    double cache_prob(std::size_t i, std::size_t j) const {
        const double total = cached[i][j] + multicast[i][j];
        if (total <= 0.0) return 1.0;
        return cached[i][j] / total;
    }

    double range_rate(std::size_t i, std::size_t j) const {
        return cached[i][j] + multicast[i][j];
    }

    // Full exponent rate per (receiver, file) for the distortion objective.
    std::vector<std::vector<double>> total_rate_matrix() const {
        std::vector<std::vector<double>> total = cached;
        for (std::size_t i = 0; i < total.size(); ++i)
            for (std::size_t j = 0; j < total[i].size(); ++j) {
                total[i][j] += multicast[i][j];
                if (!unicast.empty()) total[i][j] += unicast[i][j];
            }
        return total;
    }
};

inline constexpr std::size_t kSubsetEnumerationCap = 20;

inline bool is_user_symmetric(const MulticastRatePlan& plan, const DemandModel& model,
                              double tol = 1e-12) {
    if (!model.rows_identical(tol)) return false;
    for (std::size_t i = 1; i < plan.receiver_count(); ++i)
        for (std::size_t j = 0; j < plan.file_count(); ++j)
            if (std::abs(plan.cached[i][j] - plan.cached[0][j]) > tol ||
                std::abs(plan.multicast[i][j] - plan.multicast[0][j]) > tol)
                return false;
    return true;
}

// Probability that a packet of file f needed by receiver i (member of the
// given subset) is cached at exactly the other subset members and at none of
// the receivers outside the subset.
inline double lambda_prob(const MulticastRatePlan& plan, std::size_t i, std::size_t f,
                          std::uint32_t subset_mask) {
    const std::size_t n = plan.receiver_count();
    if (i >= n || f >= plan.file_count())
        throw std::out_of_range("lambda_prob: index out of range");
    if (!((subset_mask >> i) & 1u))
        throw std::invalid_argument("lambda_prob: receiver not in subset");
    double p = 1.0 - plan.cache_prob(i, f);
    for (std::size_t u = 0; u < n; ++u) {
        if (u == i) continue;
        const double pc = plan.cache_prob(u, f);
        p *= ((subset_mask >> u) & 1u) ? pc : (1.0 - pc);
    }
    return p;
}

// Uncoded multicast fallback: each requested file shipped once over its
// largest storing range.
inline double naive_multicast_rate(const MulticastRatePlan& plan, const DemandRealization& d) {
    plan.validate();
    if (d.files.size() != plan.receiver_count())
        throw std::invalid_argument("naive_multicast_rate: receiver count mismatch");
    d.validate(plan.file_count());
    std::vector<bool> requested(plan.file_count(), false);
    for (std::size_t f : d.files) requested[f] = true;
    double total = 0.0;
    for (std::size_t f = 0; f < requested.size(); ++f) {
        if (!requested[f]) continue;
        double widest = 0.0;
        for (std::size_t i = 0; i < plan.receiver_count(); ++i)
            widest = std::max(widest, plan.range_rate(i, f));
        total += widest;
    }
    return total;
}

// Aggregate coded multicast rate for one demand in the fine-packetization
// limit: min over the coded-coloring estimate psi_d (a sum over all receiver
// subsets of the heaviest member's exclusively-cached load) and the naive
// multicast rate. Exponential in n; refused above kSubsetEnumerationCap
// (use the user-symmetric form instead), and noticeably slow above n = 15.
inline double rate_gcc_demand(const MulticastRatePlan& plan, const DemandRealization& d) {
    plan.validate();
    const std::size_t n = plan.receiver_count();
    if (n > kSubsetEnumerationCap)
        throw std::length_error(
            "rate_gcc_demand: subset enumeration capped at n = 20; use rate_symmetric");
    if (d.files.size() != n) throw std::invalid_argument("rate_gcc_demand: receiver mismatch");
    d.validate(plan.file_count());

    const double naive = naive_multicast_rate(plan, d);
    double psi = 0.0;
    const std::uint32_t full = (n == 32) ? 0xffffffffu : ((1u << n) - 1u);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!((mask >> i) & 1u)) continue;
            const double v = lambda_prob(plan, i, d.files[i], mask) * plan.range_rate(i, d.files[i]);
            best = std::max(best, v);
        }
        psi += best;
    }
    return std::min(psi, naive);
}

// Frozen demand draws for the per-subset argmax probabilities: one array of
// sampled files per subset member, reused across evaluations so optimizer
// sweeps see a deterministic constraint (common random numbers).
struct GammaSampleSet {
    std::size_t receiver_count = 0;
    std::size_t samples = 0;
    // draws[mask] holds samples * popcount(mask) file indices, sample-major,
    // members in ascending receiver order.
    std::vector<std::vector<std::uint32_t>> draws;

    static GammaSampleSet draw(const DemandModel& model, std::size_t samples,
                               std::uint64_t seed) {
        model.validate();
        const std::size_t n = model.receiver_count();
        if (n > kSubsetEnumerationCap)
            throw std::length_error("GammaSampleSet: subset enumeration capped at n = 20");
        if (samples == 0) throw std::invalid_argument("GammaSampleSet: samples must be positive");
        // Storage is samples * n * 2^(n-1) file ids; refuse plainly infeasible
        // requests before allocating gigabytes.
        constexpr double kMaxEntries = 268435456.0; // 2^28 ids, ~1 GiB
        const double entries =
            static_cast<double>(samples) * static_cast<double>(n) *
            std::exp2(static_cast<double>(n) - 1.0);
        if (entries > kMaxEntries)
            throw std::length_error(
                "GammaSampleSet: draw table too large; reduce gamma_samples or use the "
                "user-symmetric path");
        GammaSampleSet set;
        set.receiver_count = n;
        set.samples = samples;
        std::vector<DiscreteSampler> row_samplers;
        row_samplers.reserve(n);
        for (const auto& row : model.q) row_samplers.emplace_back(row);
        RandomStream root(seed);
        const std::uint32_t full = (1u << n) - 1u;
        set.draws.resize(full + 1);
        for (std::uint32_t mask = 1; mask <= full; ++mask) {
            if (__builtin_popcount(mask) < 2) continue; // singleton subsets are exact
            RandomStream rng = root.fork(mask);
            auto& out = set.draws[mask];
            out.reserve(samples * static_cast<std::size_t>(__builtin_popcount(mask)));
            for (std::size_t s = 0; s < samples; ++s)
                for (std::size_t u = 0; u < n; ++u)
                    if ((mask >> u) & 1u)
                        out.push_back(static_cast<std::uint32_t>(row_samplers[u].sample(rng)));
        }
        return set;
    }
};

// Empirical argmax-winner probabilities for one subset: gamma[u][f] is the
// fraction of demand draws in which receiver u's requested file f attains
// the subset maximum of lambda * (M + Rt). Ties break toward the lowest
// file index, then the lowest receiver index.
inline std::vector<std::vector<double>> gamma_table(const MulticastRatePlan& plan,
                                                    std::uint32_t subset_mask,
                                                    const GammaSampleSet& set) {
    const std::size_t n = plan.receiver_count();
    if (subset_mask == 0 || set.receiver_count != n)
        throw std::invalid_argument("gamma_table: bad subset or sample set");
    if (__builtin_popcount(subset_mask) < 2)
        throw std::invalid_argument("gamma_table: singleton subsets are evaluated exactly");
    std::vector<std::size_t> members;
    for (std::size_t u = 0; u < n; ++u)
        if ((subset_mask >> u) & 1u) members.push_back(u);

    std::vector<std::vector<double>> gamma(n, std::vector<double>(plan.file_count(), 0.0));
    const auto& flat = set.draws[subset_mask];
    const std::size_t k = members.size();
    for (std::size_t s = 0; s < set.samples; ++s) {
        double best = -1.0;
        std::size_t best_u = 0, best_f = 0;
        for (std::size_t idx = 0; idx < k; ++idx) {
            const std::size_t u = members[idx];
            const std::size_t f = flat[s * k + idx];
            const double v = lambda_prob(plan, u, f, subset_mask) * plan.range_rate(u, f);
            const bool wins = v > best || (v == best && (f < best_f || (f == best_f && u < best_u)));
            if (wins) {
                best = v;
                best_u = u;
                best_f = f;
            }
        }
        gamma[best_u][best_f] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(set.samples);
    for (auto& row : gamma)
        for (double& g : row) g *= inv;
    return gamma;
}

inline double rate_symmetric(const std::vector<double>& cached_row,
                             const std::vector<double>& multicast_row,
                             const std::vector<double>& q_row, std::size_t n);

// Average aggregate coded multicast rate over the demand distribution,
// with the per-subset argmax probabilities estimated from the given draws.
inline double rate_gcc_average_with(const MulticastRatePlan& plan, const DemandModel& model,
                                    const GammaSampleSet& set) {
    plan.validate();
    const std::size_t n = plan.receiver_count();
    const std::size_t m = plan.file_count();
    if (model.receiver_count() != n || model.file_count() != m)
        throw std::invalid_argument("rate_gcc_average: dimension mismatch");

    double mbar = 0.0;
    for (std::size_t f = 0; f < m; ++f) {
        double miss = 1.0;
        for (std::size_t i = 0; i < n; ++i) miss *= 1.0 - model.q[i][f];
        double widest = 0.0;
        for (std::size_t i = 0; i < n; ++i) widest = std::max(widest, plan.range_rate(i, f));
        mbar += (1.0 - miss) * widest;
    }

    double psi = 0.0;
    const std::uint32_t full = (1u << n) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        if (__builtin_popcount(mask) == 1) {
            // Singleton subsets need no argmax sampling: the expected value
            // is the exact popularity-weighted sum.
            const std::size_t u = static_cast<std::size_t>(__builtin_ctz(mask));
            for (std::size_t f = 0; f < m; ++f)
                if (model.q[u][f] > 0.0)
                    psi += model.q[u][f] * lambda_prob(plan, u, f, mask) * plan.range_rate(u, f);
            continue;
        }
        const auto gamma = gamma_table(plan, mask, set);
        for (std::size_t u = 0; u < n; ++u) {
            if (!((mask >> u) & 1u)) continue;
            for (std::size_t f = 0; f < m; ++f)
                if (gamma[u][f] > 0.0)
                    psi += gamma[u][f] * lambda_prob(plan, u, f, mask) * plan.range_rate(u, f);
        }
    }
    return std::min(psi, mbar);
}

// Average aggregate coded multicast rate. Symmetric inputs are detected and
// routed to the closed binomial form; otherwise all receiver subsets are
// enumerated with Monte Carlo argmax probabilities (seeded, gamma_samples
// draws per subset).
inline double rate_gcc_average(const MulticastRatePlan& plan, const DemandModel& model,
                               std::size_t gamma_samples, std::uint64_t seed) {
    plan.validate();
    if (is_user_symmetric(plan, model))
        return rate_symmetric(plan.cached[0], plan.multicast[0], model.q[0],
                              plan.receiver_count());
    if (plan.receiver_count() > kSubsetEnumerationCap)
        throw std::length_error(
            "rate_gcc_average: subset enumeration capped at n = 20; use rate_symmetric");
    const GammaSampleSet set = GammaSampleSet::draw(model, gamma_samples, seed);
    return rate_gcc_average_with(plan, model, set);
}

namespace detail {

inline double binomial_coefficient(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

} // namespace detail

// User-symmetric reduction: identical popularity rows and per-file (M_j, Rt_j)
// across receivers. The subset sum collapses to binomial weights, and the
// argmax probabilities over an i.i.d. l-subset of requested files have an
// exact order-statistics form, so the result is deterministic.
inline double rate_symmetric(const std::vector<double>& cached_row,
                             const std::vector<double>& multicast_row,
                             const std::vector<double>& q_row, std::size_t n) {
    const std::size_t m = q_row.size();
    if (cached_row.size() != m || multicast_row.size() != m || m == 0 || n == 0)
        throw std::invalid_argument("rate_symmetric: bad dimensions");

    std::vector<double> size(m), pc(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (cached_row[j] < 0.0 || multicast_row[j] < 0.0)
            throw std::invalid_argument("rate_symmetric: negative rate");
        size[j] = cached_row[j] + multicast_row[j];
        pc[j] = size[j] > 0.0 ? cached_row[j] / size[j] : 1.0;
    }

    double mbar = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        mbar += (1.0 - std::pow(1.0 - q_row[j], static_cast<double>(n))) * size[j];

    double psi = 0.0;
    std::vector<std::size_t> order(m);
    std::vector<double> value(m);
    for (std::size_t l = 1; l <= n; ++l) {
        for (std::size_t j = 0; j < m; ++j)
            value[j] = std::pow(pc[j], static_cast<double>(l - 1)) *
                       std::pow(1.0 - pc[j], static_cast<double>(n - l + 1)) * size[j];
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (value[a] != value[b]) return value[a] > value[b];
            return a < b;
        });
        // P(file j wins the argmax over l i.i.d. draws) = P(every draw has
        // priority <= j and at least one equals j): accumulate the q mass
        // from the lowest-priority end.
        double expected_max = 0.0;
        double cum = 0.0;
        const double dl = static_cast<double>(l);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t j = *it;
            const double prev = cum;
            cum += q_row[j];
            if (q_row[j] > 0.0 && value[j] > 0.0)
                expected_max += (std::pow(cum, dl) - std::pow(prev, dl)) * value[j];
        }
        psi += detail::binomial_coefficient(n, l) * expected_max;
    }
    return std::min(psi, mbar);
}

// Truncated-uniform (RLFU) coded multicast load: all receivers cache the
// m_tilde most popular files at rate Mt each and receive Rt more of them via
// coded multicast; requests outside the cut are charged as unicast. G is the
// popularity mass of the cut. The first factor Rt/Mt follows the uniform
// form (and the source it is derived from); the Mt -> 0 limit is n G Rt.
inline double rate_rlfu(double cached_rate, double multicast_rate, std::size_t m_tilde,
                        const std::vector<double>& q_row, std::size_t n) {
    if (m_tilde == 0 || m_tilde > q_row.size())
        throw std::invalid_argument("rate_rlfu: cutoff out of range");
    if (cached_rate < 0.0 || multicast_rate < 0.0)
        throw std::invalid_argument("rate_rlfu: negative rate");
    if (multicast_rate == 0.0) return 0.0;
    double g = 0.0;
    for (std::size_t j = 0; j < m_tilde; ++j) g += q_row[j];
    g = std::min(g, 1.0);
    const double nn = static_cast<double>(n);
    double covered;
    if (cached_rate == 0.0) {
        covered = nn * g * multicast_rate;
    } else {
        const double total = cached_rate + multicast_rate;
        const double ratio = multicast_rate / total;
        covered = (multicast_rate / cached_rate) * (1.0 - std::pow(ratio, nn * g)) * total;
    }
    return covered + nn * (1.0 - g) * multicast_rate;
}

// Fully uniform coded multicast load (common per-file Mt, Rt, uniform
// popularity): (Rt/Mt)(1 - (Rt/(Mt+Rt))^n)(Mt+Rt). Mt -> 0 limit is n Rt.
inline double rate_uniform(double cached_rate, double multicast_rate, std::size_t n) {
    if (cached_rate < 0.0 || multicast_rate < 0.0)
        throw std::invalid_argument("rate_uniform: negative rate");
    if (multicast_rate == 0.0) return 0.0;
    if (cached_rate == 0.0) return static_cast<double>(n) * multicast_rate;
    const double total = cached_rate + multicast_rate;
    const double ratio = multicast_rate / total;
    return (multicast_rate / cached_rate) * (1.0 - std::pow(ratio, static_cast<double>(n))) *
           total;
}

} // namespace cachecast
