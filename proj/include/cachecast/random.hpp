#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cachecast {

// splitmix64 finalizer; used only to derive seeds for substreams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic random stream around mt19937_64. All randomness in the
// library flows through this class so runs are reproducible from a single
// root seed. Substreams are derived by hashing (seed, tag), which makes
// parallel tasks independent of scheduling order. Copying a stream clones
// its state.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed)
        : seed_(seed), gen_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Child stream identified by (seed, tag); does not consume parent state.
    RandomStream fork(std::uint64_t tag) const {
        return RandomStream(mix64(seed_ ^ mix64(tag ^ 0xa02913ull)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

// Samples indices from a fixed discrete distribution via its CDF.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights) {
        if (weights.empty()) throw std::invalid_argument("DiscreteSampler: empty weights");
        cdf_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("DiscreteSampler: negative weight");
            acc += w;
            cdf_.push_back(acc);
        }
        if (acc <= 0.0) throw std::invalid_argument("DiscreteSampler: zero total weight");
        for (double& c : cdf_) c /= acc;
        cdf_.back() = 1.0;
    }

    std::size_t sample(RandomStream& rng) const {
        const double u = rng.uniform01();
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf_[mid] <= u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

private:
    std::vector<double> cdf_;
};

} // namespace cachecast
