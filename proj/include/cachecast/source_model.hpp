#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cachecast/random.hpp"

namespace cachecast {

// Content catalog: per-file Gaussian variances. Rates throughout the
// library are in bits/source-sample; samples_per_file (F) only matters
// when converting to total bits for reporting.
struct SourceLibrary {
    std::vector<double> variances;
    std::size_t samples_per_file = 1;

    std::size_t file_count() const { return variances.size(); }

    void validate() const {
        if (variances.empty())
            throw std::invalid_argument("SourceLibrary: needs at least one file");
        for (double v : variances)
            if (!(v > 0.0))
                throw std::invalid_argument("SourceLibrary: variances must be positive");
        if (samples_per_file == 0)
            throw std::invalid_argument("SourceLibrary: samples_per_file must be positive");
    }
};

// Per-receiver request distribution over the library (n rows, m columns).
struct DemandModel {
    std::vector<std::vector<double>> q;

    std::size_t receiver_count() const { return q.size(); }
    std::size_t file_count() const { return q.empty() ? 0 : q.front().size(); }

    void validate() const {
        if (q.empty() || q.front().empty())
            throw std::invalid_argument("DemandModel: empty matrix");
        const std::size_t m = q.front().size();
        for (const auto& row : q) {
            if (row.size() != m)
                throw std::invalid_argument("DemandModel: ragged rows");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0) throw std::invalid_argument("DemandModel: negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("DemandModel: row does not sum to 1");
        }
    }

    bool rows_identical(double tol = 1e-12) const {
        for (std::size_t i = 1; i < q.size(); ++i)
            for (std::size_t j = 0; j < q[i].size(); ++j)
                if (std::abs(q[i][j] - q[0][j]) > tol) return false;
        return true;
    }
};

// One slot's requests: file index (0-based) per receiver.
struct DemandRealization {
    std::vector<std::size_t> files;

    std::size_t receiver_count() const { return files.size(); }

    void validate(std::size_t m) const {
        for (std::size_t f : files)
            if (f >= m) throw std::out_of_range("DemandRealization: file index out of range");
    }
};

// Cache placement: M_{i,j} bits/source-sample per (receiver, file) plus
// per-receiver budgets M_i.
struct CachePlan {
    std::vector<std::vector<double>> rates;
    std::vector<double> budgets;

    std::size_t receiver_count() const { return rates.size(); }
    std::size_t file_count() const { return rates.empty() ? 0 : rates.front().size(); }

    void validate() const {
        if (rates.size() != budgets.size())
            throw std::invalid_argument("CachePlan: rates/budgets size mismatch");
        for (std::size_t i = 0; i < rates.size(); ++i) {
            double sum = 0.0;
            for (double r : rates[i]) {
                if (r < 0.0) throw std::invalid_argument("CachePlan: negative cached rate");
                sum += r;
            }
            if (budgets[i] < 0.0) throw std::invalid_argument("CachePlan: negative budget");
            if (sum > budgets[i] + 1e-9)
                throw std::invalid_argument("CachePlan: row exceeds cache budget");
        }
    }

    // Caching distribution p_{i,j} = M_{i,j}/M_i; all-zero when M_i == 0.
    std::vector<double> caching_distribution(std::size_t i) const {
        std::vector<double> p(rates[i].size(), 0.0);
        if (budgets[i] > 0.0)
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = rates[i][j] / budgets[i];
        return p;
    }
};

// Gaussian squared-error distortion-rate value sigma^2 * 2^{-2r}.
inline double distortion(double variance, double rate) {
    if (!(variance > 0.0)) throw std::domain_error("distortion: variance must be positive");
    if (rate < 0.0) throw std::domain_error("distortion: rate must be non-negative");
    return variance * std::exp2(-2.0 * rate);
}

// Zipf(alpha) popularity shared by all n receivers: q_j proportional to j^-alpha.
inline DemandModel zipf_demand(std::size_t m, double alpha, std::size_t n) {
    if (m == 0 || n == 0) throw std::invalid_argument("zipf_demand: m and n must be positive");
    if (alpha < 0.0) throw std::invalid_argument("zipf_demand: alpha must be non-negative");
    std::vector<double> row(m);
    double norm = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        row[j] = std::pow(static_cast<double>(j + 1), -alpha);
        norm += row[j];
    }
    for (double& x : row) x /= norm;
    DemandModel model;
    model.q.assign(n, row);
    return model;
}

// Probability of a demand vector under independent per-receiver requests.
inline double demand_probability(const DemandModel& model, const DemandRealization& d) {
    if (d.files.size() != model.receiver_count())
        throw std::out_of_range("demand_probability: receiver count mismatch");
    d.validate(model.file_count());
    double p = 1.0;
    for (std::size_t i = 0; i < d.files.size(); ++i) p *= model.q[i][d.files[i]];
    return p;
}

inline DemandRealization sample_demand(const DemandModel& model, RandomStream& rng) {
    DemandRealization d;
    d.files.reserve(model.receiver_count());
    for (const auto& row : model.q) {
        DiscreteSampler sampler(row);
        d.files.push_back(sampler.sample(rng));
    }
    return d;
}

// Pre-built per-row samplers for hot loops.
class DemandSampler {
public:
    explicit DemandSampler(const DemandModel& model) {
        rows_.reserve(model.q.size());
        for (const auto& row : model.q) rows_.emplace_back(row);
    }
    DemandRealization sample(RandomStream& rng) const {
        DemandRealization d;
        d.files.reserve(rows_.size());
        for (const auto& s : rows_) d.files.push_back(s.sample(rng));
        return d;
    }

private:
    std::vector<DiscreteSampler> rows_;
};

// Enumerates all m^n demand vectors in odometer order (last receiver fastest).
// fn is called with each realization.
template <typename Fn>
inline void for_each_demand(std::size_t m, std::size_t n, Fn&& fn) {
    DemandRealization d;
    d.files.assign(n, 0);
    while (true) {
        fn(static_cast<const DemandRealization&>(d));
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++d.files[pos] < m) break;
            d.files[pos] = 0;
            if (pos == 0) return;
        }
    }
}

inline std::size_t demand_space_size_capped(std::size_t m, std::size_t n, std::size_t cap) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > cap / m) return cap + 1;
        total *= m;
    }
    return total;
}

inline constexpr std::size_t kExactDemandCap = 1000000;

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

enum class ExpectationMode { Exact, MonteCarlo };

// Expected distortion over the demand distribution: for each demand d,
// averages sigma_{d_i}^2 2^{-2(M_{i,d_i} + rate(i,d))} across receivers.
// Exact mode enumerates all m^n demands and is refused above kExactDemandCap;
// Monte Carlo mode reports the sample standard error alongside the mean.
inline Estimate expected_distortion(
    const SourceLibrary& lib, const DemandModel& model, const CachePlan& cache,
    const std::function<double(std::size_t, const DemandRealization&)>& per_user_rate,
    ExpectationMode mode, std::size_t samples = 10000, std::uint64_t seed = 1) {
    lib.validate();
    model.validate();
    cache.validate();
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    if (lib.file_count() != m || cache.receiver_count() != n || cache.file_count() != m)
        throw std::invalid_argument("expected_distortion: dimension mismatch");

    auto demand_value = [&](const DemandRealization& d) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t f = d.files[i];
            const double rate = per_user_rate(i, d);
            if (rate < 0.0) throw std::domain_error("expected_distortion: negative per-user rate");
            acc += distortion(lib.variances[f], cache.rates[i][f] + rate);
        }
        return acc / static_cast<double>(n);
    };

    if (mode == ExpectationMode::Exact) {
        if (demand_space_size_capped(m, n, kExactDemandCap) > kExactDemandCap)
            throw std::length_error("expected_distortion: demand space exceeds exact-mode cap");
        double total = 0.0;
        for_each_demand(m, n, [&](const DemandRealization& d) {
            double p = 1.0;
            for (std::size_t i = 0; i < n; ++i) p *= model.q[i][d.files[i]];
            if (p > 0.0) total += p * demand_value(d);
        });
        return {total, 0.0};
    }

    if (samples == 0) throw std::invalid_argument("expected_distortion: samples must be positive");
    RandomStream rng(seed);
    DemandSampler sampler(model);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double v = demand_value(sampler.sample(rng));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(samples);
    double var = (sum_sq / static_cast<double>(samples)) - mean * mean;
    if (var < 0.0) var = 0.0;
    if (samples > 1) var *= static_cast<double>(samples) / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

// Exact expectation for plans whose per-user rate depends only on the
// requested file: linearity collapses the m^n sum to a single n x m pass.
// total_rate[i][j] is the full exponent rate (cached + delivered) receiver i
// ends with when requesting file j.
inline double expected_distortion_per_file(const SourceLibrary& lib, const DemandModel& model,
                                           const std::vector<std::vector<double>>& total_rate) {
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    if (total_rate.size() != n)
        throw std::invalid_argument("expected_distortion_per_file: row count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (total_rate[i].size() != m)
            throw std::invalid_argument("expected_distortion_per_file: column count mismatch");
        for (std::size_t j = 0; j < m; ++j)
            if (model.q[i][j] > 0.0)
                acc += model.q[i][j] * distortion(lib.variances[j], total_rate[i][j]);
    }
    return acc / static_cast<double>(n);
}

} // namespace cachecast
