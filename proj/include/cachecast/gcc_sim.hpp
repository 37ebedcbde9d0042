#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cachecast/multicast_rate.hpp"
#include "cachecast/random.hpp"
#include "cachecast/source_model.hpp"
#include "cachecast/waterfill.hpp"

namespace cachecast {

namespace detail {

struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Best continued-fraction convergent with denominator <= max_den.
inline Rational approx_rational(double x, long long max_den) {
    Rational best{static_cast<long long>(std::llround(x)), 1};
    long long p0 = 1, q0 = 0;
    long long p1 = static_cast<long long>(std::floor(x)), q1 = 1;
    double frac = x - std::floor(x);
    best = {p1, q1};
    for (int iter = 0; iter < 64 && frac > 1e-15; ++iter) {
        const double inv = 1.0 / frac;
        const double a_f = std::floor(inv);
        if (a_f > 1e18) break;
        const long long a = static_cast<long long>(a_f);
        const long long p2 = a * p1 + p0;
        const long long q2 = a * q1 + q0;
        if (q2 > max_den || q2 <= 0) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        best = {p1, q1};
        frac = inv - a_f;
    }
    return best;
}

} // namespace detail

// Layer/packet decomposition of a rate plan plus the randomly drawn cached
// packet sets. Layers all carry rate b bits/source-sample and are split into
// B packets each; receiver i caches cached_count(i,j) packets drawn uniformly
// from the omega_{i,j} * B packets of its storing range for file j.
struct PacketizedPlacement {
    double layer_rate = 0.0; // b
    int packets_per_layer = 0; // B
    bool fractional = false; // rates were not exactly representable within the denominator cap

    std::vector<std::vector<int>> cached_layers;    // mu (floor in fractional mode)
    std::vector<std::vector<int>> multicast_layers; // rho~ (omega - mu)
    std::vector<std::vector<int>> storing_range;    // omega
    std::vector<std::vector<int>> cached_counts;    // |cached packet set|
    std::vector<std::vector<std::vector<bool>>> cache; // packet membership, size omega*B

    std::size_t receiver_count() const { return storing_range.size(); }
    std::size_t file_count() const {
        return storing_range.empty() ? 0 : storing_range.front().size();
    }

    double packet_rate() const {
        return packets_per_layer > 0 ? layer_rate / packets_per_layer : 0.0;
    }

    bool is_cached(std::size_t receiver, std::size_t file, std::uint32_t packet) const {
        const auto& bits = cache[receiver][file];
        return packet < bits.size() && bits[packet];
    }

    double cached_bits(std::size_t receiver, std::size_t file) const {
        return cached_counts[receiver][file] * packet_rate();
    }

    // Effective rates after layer quantization; unicast carried through.
    MulticastRatePlan quantized_plan(const MulticastRatePlan& original) const {
        MulticastRatePlan q = original;
        const double pr = packet_rate();
        for (std::size_t i = 0; i < receiver_count(); ++i)
            for (std::size_t j = 0; j < file_count(); ++j) {
                q.cached[i][j] = cached_counts[i][j] * pr;
                q.multicast[i][j] =
                    (storing_range[i][j] * packets_per_layer - cached_counts[i][j]) * pr;
            }
        return q;
    }
};

// Quantizes a rate plan onto a common layer rate b and draws the RAP cache
// contents. b is derived from rational approximations of the plan rates with
// denominators <= denom_cap; when the rates are not representable (or the
// resulting layer count explodes) the placement falls back to fractional
// mode with b = max storing range / denom_cap, flagged on the result.
inline PacketizedPlacement packetize(const MulticastRatePlan& plan, int packets_per_layer,
                                     long long denom_cap, RandomStream& rng) {
    plan.validate();
    if (packets_per_layer < 1) throw std::invalid_argument("packetize: B must be >= 1");
    if (denom_cap < 1) throw std::invalid_argument("packetize: denom_cap must be >= 1");
    const std::size_t n = plan.receiver_count();
    const std::size_t m = plan.file_count();

    constexpr long long kMaxLayers = 200000;
    constexpr double kRelTol = 1e-9;

    bool exact = true;
    long long lcm_den = 1;
    double max_range = 0.0;
    for (std::size_t i = 0; i < n && exact; ++i)
        for (std::size_t j = 0; j < m && exact; ++j)
            for (double r : {plan.cached[i][j], plan.multicast[i][j]}) {
                max_range = std::max(max_range, plan.range_rate(i, j));
                if (r == 0.0) continue;
                const auto rat = detail::approx_rational(r, denom_cap);
                if (std::abs(r - rat.value()) > kRelTol * std::max(1.0, r)) {
                    exact = false;
                    break;
                }
                lcm_den = std::lcm(lcm_den, rat.den);
                if (lcm_den > kMaxLayers) {
                    exact = false;
                    break;
                }
            }

    double b = 1.0;
    if (exact) {
        long long g = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (double r : {plan.cached[i][j], plan.multicast[i][j]}) {
                    const long long units = std::llround(r * static_cast<double>(lcm_den));
                    if (units > 0) g = std::gcd(g, units);
                }
        if (g > 0) b = static_cast<double>(g) / static_cast<double>(lcm_den);
        if (max_range / b > static_cast<double>(kMaxLayers)) exact = false;
    }
    if (!exact && max_range > 0.0) b = max_range / static_cast<double>(denom_cap);

    PacketizedPlacement placement;
    placement.layer_rate = b;
    placement.packets_per_layer = packets_per_layer;
    placement.fractional = !exact;
    placement.cached_layers.assign(n, std::vector<int>(m, 0));
    placement.multicast_layers.assign(n, std::vector<int>(m, 0));
    placement.storing_range.assign(n, std::vector<int>(m, 0));
    placement.cached_counts.assign(n, std::vector<int>(m, 0));
    placement.cache.assign(n, std::vector<std::vector<bool>>(m));

    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double mu_real = plan.cached[i][j] / b;
            const double range_real = plan.range_rate(i, j) / b;
            int omega, count;
            if (exact) {
                omega = static_cast<int>(std::llround(range_real));
                count = static_cast<int>(std::llround(mu_real)) * packets_per_layer;
            } else {
                omega = static_cast<int>(std::ceil(range_real - 1e-9));
                count = static_cast<int>(std::llround(mu_real * packets_per_layer));
            }
            const int total_pkts = omega * packets_per_layer;
            count = std::clamp(count, 0, total_pkts);
            placement.storing_range[i][j] = omega;
            placement.cached_layers[i][j] = count / packets_per_layer;
            placement.multicast_layers[i][j] = omega - placement.cached_layers[i][j];
            placement.cached_counts[i][j] = count;

            auto& bits = placement.cache[i][j];
            bits.assign(total_pkts, false);
            if (count > 0) {
                ids.resize(total_pkts);
                std::iota(ids.begin(), ids.end(), 0u);
                RandomStream local = rng.fork(i * m + j + 1);
                for (int k = 0; k < count; ++k) {
                    const std::size_t pick =
                        k + static_cast<std::size_t>(local.uniform_below(total_pkts - k));
                    std::swap(ids[k], ids[pick]);
                    bits[ids[k]] = true;
                }
            }
        }
    return placement;
}

// Index-coding conflict graph: one vertex per packet that still needs
// delivery, an edge whenever two packets cannot ride one coded transmission.
struct ConflictVertex {
    std::uint32_t receiver = 0;
    std::uint32_t file = 0;
    std::uint32_t packet = 0;
    std::uint32_t cachers_mask = 0; // receivers holding this packet
};

struct ConflictGraph {
    std::vector<ConflictVertex> vertices;
    std::vector<std::vector<std::uint64_t>> adjacency; // bitset per vertex

    std::size_t size() const { return vertices.size(); }

    bool edge(std::size_t u, std::size_t v) const {
        return (adjacency[u][v >> 6] >> (v & 63)) & 1ull;
    }

    std::size_t degree(std::size_t u) const {
        std::size_t d = 0;
        for (std::uint64_t w : adjacency[u]) d += static_cast<std::size_t>(__builtin_popcountll(w));
        return d;
    }

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (std::size_t u = 0; u < size(); ++u) total += degree(u);
        return total / 2;
    }
};

// Builds the conflict graph for explicit per-receiver needed packet lists
// (packets of the receiver's requested file, ascending ids).
inline ConflictGraph build_conflict_graph_from_needs(
    const PacketizedPlacement& placement, const DemandRealization& d,
    const std::vector<std::vector<std::uint32_t>>& needed) {
    const std::size_t n = placement.receiver_count();
    if (d.files.size() != n || needed.size() != n)
        throw std::invalid_argument("build_conflict_graph: receiver count mismatch");
    ConflictGraph g;
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t pkt : needed[i]) {
            ConflictVertex v;
            v.receiver = static_cast<std::uint32_t>(i);
            v.file = static_cast<std::uint32_t>(d.files[i]);
            v.packet = pkt;
            for (std::size_t r = 0; r < n; ++r)
                if (r != i && placement.is_cached(r, v.file, pkt))
                    v.cachers_mask |= 1u << r;
            g.vertices.push_back(v);
        }

    const std::size_t total = g.vertices.size();
    const std::size_t words = (total + 63) / 64;
    g.adjacency.assign(total, std::vector<std::uint64_t>(words, 0));
    for (std::size_t u = 0; u < total; ++u) {
        const auto& a = g.vertices[u];
        for (std::size_t v = u + 1; v < total; ++v) {
            const auto& b = g.vertices[v];
            bool conflict;
            if (a.receiver == b.receiver) {
                conflict = true; // one receiver cannot decode two unknowns per transmission
            } else if (a.file == b.file && a.packet == b.packet) {
                conflict = false; // identical packet wanted by both
            } else {
                const bool a_known = (a.cachers_mask >> b.receiver) & 1u;
                const bool b_known = (b.cachers_mask >> a.receiver) & 1u;
                conflict = !(a_known && b_known);
            }
            if (conflict) {
                g.adjacency[u][v >> 6] |= 1ull << (v & 63);
                g.adjacency[v][u >> 6] |= 1ull << (u & 63);
            }
        }
    }
    return g;
}

// Default needs: every packet within the storing range of the requested file
// that the receiver has not cached.
inline ConflictGraph build_conflict_graph(const PacketizedPlacement& placement,
                                          const DemandRealization& d) {
    const std::size_t n = placement.receiver_count();
    d.validate(placement.file_count());
    std::vector<std::vector<std::uint32_t>> needed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t f = d.files[i];
        const std::uint32_t total =
            static_cast<std::uint32_t>(placement.storing_range[i][f]) *
            static_cast<std::uint32_t>(placement.packets_per_layer);
        for (std::uint32_t k = 0; k < total; ++k)
            if (!placement.is_cached(i, f, k)) needed[i].push_back(k);
    }
    return build_conflict_graph_from_needs(placement, d, needed);
}

struct Coloring {
    std::vector<std::uint32_t> color;
    std::uint32_t color_count = 0;
};

// Greedy constrained coloring: vertices in largest-degree-first order (ties
// by receiver, file, packet); each vertex joins the first feasible class
// whose members share its cached-by key when one exists, otherwise the first
// feasible class, otherwise a new one. Each color class is one XOR-coded
// multicast transmission of one packet (layer_rate / B bits/source-sample).
inline Coloring gcc_color(const ConflictGraph& g) {
    const std::size_t total = g.size();
    Coloring out;
    out.color.assign(total, 0);
    if (total == 0) return out;

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> deg(total);
    for (std::size_t u = 0; u < total; ++u) deg[u] = g.degree(u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (deg[a] != deg[b]) return deg[a] > deg[b];
        const auto& va = g.vertices[a];
        const auto& vb = g.vertices[b];
        if (va.receiver != vb.receiver) return va.receiver < vb.receiver;
        if (va.file != vb.file) return va.file < vb.file;
        return va.packet < vb.packet;
    });

    const std::size_t words = g.adjacency.front().size();
    std::vector<std::vector<std::uint64_t>> class_conflicts;
    std::vector<std::uint32_t> class_key;
    auto key_of = [&](std::size_t u) {
        return g.vertices[u].cachers_mask | (1u << g.vertices[u].receiver);
    };

    for (std::size_t u : order) {
        const std::uint32_t key = key_of(u);
        std::size_t chosen = class_conflicts.size();
        std::size_t first_feasible = class_conflicts.size();
        for (std::size_t c = 0; c < class_conflicts.size(); ++c) {
            if ((class_conflicts[c][u >> 6] >> (u & 63)) & 1ull) continue;
            if (first_feasible == class_conflicts.size()) first_feasible = c;
            if (class_key[c] == key) {
                chosen = c;
                break;
            }
        }
        if (chosen == class_conflicts.size()) chosen = first_feasible;
        if (chosen == class_conflicts.size()) {
            class_conflicts.emplace_back(words, 0ull);
            class_key.push_back(key);
        }
        out.color[u] = static_cast<std::uint32_t>(chosen);
        for (std::size_t w = 0; w < words; ++w) class_conflicts[chosen][w] |= g.adjacency[u][w];
    }
    out.color_count = static_cast<std::uint32_t>(class_conflicts.size());
    return out;
}

inline bool coloring_is_proper(const ConflictGraph& g, const Coloring& coloring) {
    for (std::size_t u = 0; u < g.size(); ++u)
        for (std::size_t v = u + 1; v < g.size(); ++v)
            if (g.edge(u, v) && coloring.color[u] == coloring.color[v]) return false;
    return true;
}

struct DeliveryResult {
    std::vector<double> multicast_delivered; // bits/source-sample per receiver
    std::vector<double> unicast_delivered;
    std::vector<double> total_rate; // cached + everything delivered
    std::size_t coded_transmissions = 0;
    double coded_rate = 0.0;   // multicast load charged against the link
    double naive_rate = 0.0;   // uncoded fallback cost before any reduction
    double unicast_rate = 0.0; // unicast load charged against the link
    double aggregate_rate = 0.0;
    bool used_naive = false;
    bool reduced = false; // multicast claims were cut to meet capacity
    double mean_distortion = 0.0;
};

// One delivery round: color the conflict graph, charge the cheaper of coded
// and naive multicast against the link, cut per-user multicast claims in
// decreasing order of requested-file variance (whole packets, top layers
// first) while the capacity is violated, then spend the remaining capacity
// on unicast packets. Unicast honors the plan's per-file rates first and
// water-fills any remaining budget greedily.
inline DeliveryResult simulate_delivery(const SourceLibrary& lib,
                                        const PacketizedPlacement& placement,
                                        const MulticastRatePlan& plan, const DemandRealization& d,
                                        double capacity) {
    lib.validate();
    if (capacity < 0.0) throw std::invalid_argument("simulate_delivery: negative capacity");
    const std::size_t n = placement.receiver_count();
    const std::size_t m = placement.file_count();
    if (d.files.size() != n) throw std::invalid_argument("simulate_delivery: receiver mismatch");
    d.validate(m);

    DeliveryResult res;
    res.multicast_delivered.assign(n, 0.0);
    res.unicast_delivered.assign(n, 0.0);
    res.total_rate.assign(n, 0.0);

    const double pkt_rate = placement.packet_rate();
    const int B = placement.packets_per_layer;

    std::vector<std::vector<std::uint32_t>> needed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t f = d.files[i];
        const std::uint32_t total = static_cast<std::uint32_t>(placement.storing_range[i][f] * B);
        for (std::uint32_t k = 0; k < total; ++k)
            if (!placement.is_cached(i, f, k)) needed[i].push_back(k);
    }

    // Reduction priority: decreasing sigma^2 of the requested file, ties by
    // lower file index then lower receiver index.
    std::vector<std::size_t> priority(n);
    std::iota(priority.begin(), priority.end(), std::size_t{0});
    std::sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
        const double va = lib.variances[d.files[a]];
        const double vb = lib.variances[d.files[b]];
        if (va != vb) return va > vb;
        if (d.files[a] != d.files[b]) return d.files[a] < d.files[b];
        return a < b;
    });

    auto naive_packets = [&]() {
        std::vector<std::uint32_t> top(m, 0);
        for (std::size_t i = 0; i < n; ++i)
            if (!needed[i].empty())
                top[d.files[i]] = std::max(top[d.files[i]], needed[i].back() + 1u);
        std::size_t total = 0;
        for (std::uint32_t t : top) total += t;
        return total;
    };

    std::size_t budget_pkts = 0;
    if (pkt_rate > 0.0)
        budget_pkts = static_cast<std::size_t>(std::floor(capacity / pkt_rate + 1e-9));

    res.naive_rate = static_cast<double>(naive_packets()) * pkt_rate;

    std::size_t transmissions = 0;
    bool used_naive = false;
    if (pkt_rate > 0.0) {
        while (true) {
            const ConflictGraph g = build_conflict_graph_from_needs(placement, d, needed);
            const Coloring coloring = gcc_color(g);
            const std::size_t naive_now = naive_packets();
            transmissions = coloring.color_count;
            used_naive = naive_now < transmissions;
            const std::size_t charged = std::min<std::size_t>(transmissions, naive_now);
            if (charged <= budget_pkts) break;
            res.reduced = true;
            std::size_t excess = charged - budget_pkts;
            for (std::size_t r : priority) {
                while (excess > 0 && !needed[r].empty()) {
                    needed[r].pop_back();
                    --excess;
                }
                if (excess == 0) break;
            }
        }
    }

    res.coded_transmissions = transmissions;
    const std::size_t charged_pkts =
        std::min<std::size_t>(transmissions, naive_packets());
    res.used_naive = used_naive;
    res.coded_rate = static_cast<double>(charged_pkts) * pkt_rate;
    for (std::size_t i = 0; i < n; ++i)
        res.multicast_delivered[i] = static_cast<double>(needed[i].size()) * pkt_rate;

    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i)
        base[i] = placement.cached_bits(i, d.files[i]) + res.multicast_delivered[i];

    // Unicast stage.
    double unicast_budget = capacity - res.coded_rate;
    if (unicast_budget < 0.0) unicast_budget = 0.0;
    if (pkt_rate > 0.0) {
        std::size_t left = budget_pkts - charged_pkts;
        // Planned per-file unicast first, in reduction priority order.
        if (!plan.unicast.empty()) {
            for (std::size_t r : priority) {
                const double want = plan.unicast[r][d.files[r]];
                std::size_t pkts = static_cast<std::size_t>(std::llround(want / pkt_rate));
                pkts = std::min(pkts, left);
                res.unicast_delivered[r] += static_cast<double>(pkts) * pkt_rate;
                left -= pkts;
                if (left == 0) break;
            }
        }
        if (left > 0) {
            // Water-fill the remaining packets on current residual variances.
            std::vector<double> coeff(n);
            for (std::size_t i = 0; i < n; ++i)
                coeff[i] = lib.variances[d.files[i]] *
                           std::exp2(-2.0 * (base[i] + res.unicast_delivered[i]));
            const WaterfillResult wf =
                reverse_waterfill(coeff, static_cast<double>(left) * pkt_rate);
            std::size_t assigned = 0;
            std::vector<std::size_t> grants(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                grants[i] = static_cast<std::size_t>(std::floor(wf.allocation[i] / pkt_rate));
                assigned += grants[i];
            }
            while (assigned < left) {
                std::size_t best = 0;
                double best_v = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double v = coeff[i] * std::exp2(-2.0 * static_cast<double>(grants[i]) *
                                                          pkt_rate);
                    if (v > best_v) {
                        best_v = v;
                        best = i;
                    }
                }
                ++grants[best];
                ++assigned;
            }
            for (std::size_t i = 0; i < n; ++i)
                res.unicast_delivered[i] += static_cast<double>(grants[i]) * pkt_rate;
        }
    } else if (capacity > 0.0) {
        // No layered content anywhere: plain continuous unicast water-filling.
        std::vector<double> coeff(n);
        for (std::size_t i = 0; i < n; ++i)
            coeff[i] = lib.variances[d.files[i]] * std::exp2(-2.0 * base[i]);
        const WaterfillResult wf = reverse_waterfill(coeff, capacity);
        res.unicast_delivered = wf.allocation;
    }

    for (std::size_t i = 0; i < n; ++i) {
        res.unicast_rate += res.unicast_delivered[i];
        res.total_rate[i] = base[i] + res.unicast_delivered[i];
        res.mean_distortion += distortion(lib.variances[d.files[i]], res.total_rate[i]);
    }
    res.mean_distortion /= static_cast<double>(n);
    res.aggregate_rate = res.coded_rate + res.unicast_rate;
    return res;
}

} // namespace cachecast
