#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cachecast/config.hpp"
#include "cachecast/lcu.hpp"
#include "cachecast/optimizer.hpp"
#include "cachecast/source_model.hpp"

namespace cachecast {

inline const std::set<std::string>& valid_schemes() {
    static const std::set<std::string> schemes = {"lcu", "ccm-rlfu", "ccm-uniform",
                                                  "ccm-symmetric"};
    return schemes;
}

// Grid description for the distortion-memory sweeps.
struct SweepSpec {
    ProblemSpec problem;
    std::vector<double> capacities;
    std::vector<double> cache_sizes;
    std::vector<std::string> schemes;
    std::size_t trials = 2000;
    std::uint64_t seed = 1;
    OptimizerConfig solver;

    void validate() const {
        if (capacities.empty() || cache_sizes.empty())
            throw std::runtime_error("sweep: capacities and cache_sizes must be non-empty");
        for (std::size_t k = 1; k < cache_sizes.size(); ++k)
            if (cache_sizes[k] < cache_sizes[k - 1])
                throw std::runtime_error("sweep: cache_sizes must be sorted ascending");
        if (schemes.empty()) {
            std::string msg = "sweep: schemes must be non-empty; valid schemes:";
            for (const auto& s : valid_schemes()) msg += " " + s;
            throw std::runtime_error(msg);
        }
        for (const auto& s : schemes)
            if (!valid_schemes().count(s)) {
                std::string msg = "sweep: unknown scheme '" + s + "'; valid schemes:";
                for (const auto& v : valid_schemes()) msg += " " + v;
                throw std::runtime_error(msg);
            }
        if (trials == 0) throw std::runtime_error("sweep: trials must be positive");
        solver.validate();
    }

    static SweepSpec parse(const ConfigMap& cfg) {
        SweepSpec spec;
        spec.problem = ProblemSpec::parse(cfg);
        spec.capacities = cfg.numbers("capacities");
        spec.cache_sizes = cfg.numbers("cache_sizes");
        for (const auto& t : cfg.tokens("schemes")) spec.schemes.push_back(t);
        spec.trials = cfg.count_or("trials", 2000);
        spec.seed = static_cast<std::uint64_t>(cfg.count_or("seed", 1));
        spec.solver.seed = spec.seed;
        spec.solver.restarts = static_cast<int>(cfg.count_or("restarts", 4));
        spec.solver.max_iterations = static_cast<int>(cfg.count_or("max_iterations", 200));
        spec.solver.gamma_samples = cfg.count_or("gamma_samples", 10000);
        spec.solver.rlfu_scan_max = cfg.count_or("rlfu_scan_max", 50);
        spec.validate();
        return spec;
    }
};

struct SweepRow {
    std::string scheme;
    double capacity = 0.0;
    double cache_size = 0.0;
    double distortion = 0.0;
    double std_error = 0.0;
    std::string meta;
};

// LC-U distortion at one grid point. Zero capacity needs no demand
// enumeration (the objective separates over receivers); otherwise Monte
// Carlo over a shared demand table so curves across (R, M) see common
// random numbers.
inline Estimate lcu_point(const SourceLibrary& lib, const DemandModel& model,
                          const std::vector<double>& budgets, double capacity,
                          std::size_t trials, std::uint64_t seed) {
    const CachePlan cache = lcu_cache_plan(lib, model, budgets);
    if (capacity == 0.0) {
        std::vector<std::vector<double>> totals = cache.rates;
        return {expected_distortion_per_file(lib, model, totals), 0.0};
    }
    RandomStream rng = RandomStream(seed).fork(0xdead5);
    DemandSampler sampler(model);
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t n = model.receiver_count();
    for (std::size_t t = 0; t < trials; ++t) {
        const DemandRealization d = sampler.sample(rng);
        const WaterfillResult wf = lcu_transmission_rates(lib, cache, d, capacity);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            v += distortion(lib.variances[d.files[i]], cache.rates[i][d.files[i]] +
                                                           wf.allocation[i]);
        v /= static_cast<double>(n);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / static_cast<double>(trials);
    double var = sum_sq / static_cast<double>(trials) - mean * mean;
    if (var < 0.0) var = 0.0;
    if (trials > 1) var *= static_cast<double>(trials) / static_cast<double>(trials - 1);
    return {mean, std::sqrt(var / static_cast<double>(trials))};
}

// CC-CM distortion at one grid point for the named scheme. Symmetric inputs
// are required (the sweep grid varies a scalar cache size); the uniform
// scheme derives its per-file cache bound from M / m.
inline CcCmSolution ccm_point(const std::string& scheme, const SourceLibrary& lib,
                              const DemandModel& model, double cache_size, double capacity,
                              const OptimizerConfig& cfg) {
    const std::size_t n = model.receiver_count();
    const std::size_t m = model.file_count();
    if (scheme == "ccm-uniform") {
        bool const_sigma = true;
        for (double v : lib.variances) const_sigma &= v == lib.variances.front();
        bool uniform_q = model.rows_identical();
        for (double p : model.q[0])
            uniform_q = uniform_q && std::abs(p - 1.0 / static_cast<double>(m)) <= 1e-12;
        if (!const_sigma || !uniform_q)
            throw std::invalid_argument("ccm-uniform requires uniform demand and equal variances");
        CcCmSolution compact =
            optimize_uniform(lib.variances.front(), cache_size / static_cast<double>(m),
                             capacity, n);
        // Expand the single-file solution to the full library.
        CcCmSolution sol;
        sol.objective = compact.objective;
        sol.constraint_slack = compact.constraint_slack;
        sol.feasible = compact.feasible;
        sol.plan.cached.assign(n, std::vector<double>(m, compact.plan.cached[0][0]));
        sol.plan.multicast.assign(n, std::vector<double>(m, compact.plan.multicast[0][0]));
        sol.plan.unicast.assign(n, std::vector<double>(m, 0.0));
        return sol;
    }
    if (!model.rows_identical())
        throw std::invalid_argument(scheme + " requires identical demand rows");
    if (scheme == "ccm-rlfu")
        return optimize_rlfu(lib, model.q[0], cache_size, capacity, n, cfg);
    if (scheme == "ccm-symmetric")
        return optimize_symmetric(lib, model.q[0], cache_size, capacity, n, cfg);
    throw std::invalid_argument("unknown ccm scheme: " + scheme);
}

// Runs every (scheme, R, M) grid point. Points are independent jobs over a
// work queue; the result table is assembled in grid order regardless of
// completion order, and every point shares the sweep seed (common random
// numbers across the grid).
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 0) {
    spec.validate();
    const SourceLibrary lib = spec.problem.library();
    const DemandModel model = spec.problem.demand();

    struct Job {
        std::string scheme;
        double capacity;
        double cache_size;
    };
    std::vector<Job> jobs;
    for (const auto& scheme : spec.schemes)
        for (double r : spec.capacities)
            for (double mcap : spec.cache_sizes) jobs.push_back({scheme, r, mcap});

    std::vector<SweepRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) break;
            const Job& job = jobs[k];
            SweepRow row;
            row.scheme = job.scheme;
            row.capacity = job.capacity;
            row.cache_size = job.cache_size;
            if (job.scheme == "lcu") {
                const std::vector<double> budgets(model.receiver_count(), job.cache_size);
                const Estimate est =
                    lcu_point(lib, model, budgets, job.capacity, spec.trials, spec.seed);
                row.distortion = est.value;
                row.std_error = est.std_error;
                row.meta = "trials=" + std::to_string(job.capacity == 0.0 ? 0 : spec.trials);
            } else {
                OptimizerConfig cfg = spec.solver;
                cfg.seed = spec.seed;
                const CcCmSolution sol =
                    ccm_point(job.scheme, lib, model, job.cache_size, job.capacity, cfg);
                row.distortion = sol.objective;
                row.std_error = 0.0;
                row.meta = "m_tilde=" + std::to_string(sol.m_tilde) +
                           ";slack=" + format_double(sol.constraint_slack, 6) +
                           ";feasible=" + (sol.feasible ? std::string("1") : std::string("0"));
            }
            rows[k] = std::move(row);
        }
    };

    unsigned count = threads ? threads : std::thread::hardware_concurrency();
    if (count <= 1 || jobs.size() <= 1) {
        worker();
    } else {
        count = std::min<unsigned>(count, static_cast<unsigned>(jobs.size()));
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "scheme,R,M,distortion,stderr,meta\n";
    for (const auto& r : rows)
        out << r.scheme << ',' << format_double(r.capacity) << ',' << format_double(r.cache_size)
            << ',' << format_double(r.distortion) << ',' << format_double(r.std_error) << ','
            << r.meta << "\n";
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << content;
}

// Plot-ready outputs: one two-column (M, distortion) file per (scheme, R)
// curve plus a manifest naming every curve and freezing the sigma draw.
inline std::vector<std::string> emit_plotdata(const std::vector<SweepRow>& rows,
                                              const SweepSpec& spec, const std::string& out_dir) {
    if (rows.empty()) throw std::runtime_error("emit_plotdata: empty result table");
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<std::pair<std::string, double>> curves;
    for (const auto& r : rows) {
        const std::pair<std::string, double> key{r.scheme, r.capacity};
        bool seen = false;
        for (const auto& c : curves) seen |= c == key;
        if (!seen) curves.push_back(key);
    }

    std::vector<std::string> files;
    std::ostringstream manifest;
    manifest << "# cachecast plotdata manifest\n";
    manifest << "seed = " << spec.seed << "\n";
    manifest << "trials = " << spec.trials << "\n";
    manifest << "sigma_spec = " << spec.problem.sigma.describe() << "\n";
    manifest << "sigma =";
    for (double v : spec.problem.library().variances) manifest << ' ' << format_double(v, 17);
    manifest << "\n";
    for (const auto& [scheme, capacity] : curves) {
        std::string name = scheme + "_R" + format_double(capacity);
        for (char& c : name)
            if (c == '.') c = 'p';
        name += ".dat";
        std::ostringstream data;
        data << "# M distortion\n";
        for (const auto& r : rows)
            if (r.scheme == scheme && r.capacity == capacity)
                data << format_double(r.cache_size) << ' ' << format_double(r.distortion) << "\n";
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, data.str());
        files.push_back(name);
        manifest << "curve = " << scheme << ' ' << format_double(capacity) << ' ' << name << "\n";
    }
    write_text_file((fs::path(out_dir) / "manifest.txt").string(), manifest.str());
    files.push_back("manifest.txt");
    return files;
}

} // namespace cachecast
