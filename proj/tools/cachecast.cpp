// cachecast: distortion-memory tradeoff toolkit for cache-aided delivery of
// layered Gaussian sources over a shared link.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cachecast/config.hpp"
#include "cachecast/experiment.hpp"
#include "cachecast/gcc_sim.hpp"
#include "cachecast/lcu.hpp"
#include "cachecast/optimizer.hpp"
#include "cachecast/validation.hpp"

namespace {

using namespace cachecast;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("CACHECAST_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

struct McMode {
    bool exact = true;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
};

McMode parse_mode(const std::string& text) {
    McMode mode;
    if (text == "exact") return mode;
    if (text.rfind("mc:", 0) == 0) {
        mode.exact = false;
        const auto rest = text.substr(3);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--mode", "expected mc:<samples>:<seed>");
        mode.samples = std::stoull(rest.substr(0, colon));
        mode.seed = std::stoull(rest.substr(colon + 1));
        return mode;
    }
    throw CLI::ValidationError("--mode", "expected exact or mc:<samples>:<seed>");
}

std::uint64_t demand_hash(const DemandRealization& d) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t f : d.files) {
        h ^= static_cast<std::uint64_t>(f) + 1;
        h *= 1099511628211ull;
    }
    return h;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

int run_lcu(const std::string& config_path, double capacity, const std::string& mode_text) {
    const ConfigMap cfg = ConfigMap::load(config_path);
    const ProblemSpec prob = ProblemSpec::parse(cfg);
    const SourceLibrary lib = prob.library();
    const DemandModel model = prob.demand();
    const McMode mode = parse_mode(mode_text);

    const Estimate est = lcu_expected_distortion(
        lib, model, prob.budgets, capacity,
        mode.exact ? ExpectationMode::Exact : ExpectationMode::MonteCarlo, mode.samples,
        mode.seed);
    std::cout << "R,M,expected_distortion,stderr\n";
    std::cout << format_double(capacity) << ',' << format_double(mean_of(prob.budgets)) << ','
              << format_double(est.value) << ',' << format_double(est.std_error) << "\n";
    return 0;
}

int run_ccm(const std::string& config_path, double capacity, const std::string& scheme,
            int restarts, std::uint64_t seed, const std::string& unicast_mode,
            const std::string& solution_path) {
    const ConfigMap cfg = ConfigMap::load(config_path);
    const ProblemSpec prob = ProblemSpec::parse(cfg);
    const SourceLibrary lib = prob.library();
    const DemandModel model = prob.demand();

    OptimizerConfig ocfg;
    ocfg.seed = seed;
    ocfg.restarts = restarts;
    ocfg.gamma_samples = cfg.count_or("gamma_samples", 10000);
    ocfg.max_iterations = static_cast<int>(cfg.count_or("max_iterations", 300));
    if (unicast_mode == "per-demand")
        ocfg.unicast_mode = OptimizerConfig::UnicastMode::PerDemand;

    CcCmSolution sol;
    if (scheme == "general") {
        sol = optimize_general(lib, model, prob.budgets, capacity, ocfg);
        if (!sol.unicast_per_demand.empty()) {
            // Per-demand unicast collapses to a per-(receiver, file) profile
            // under the averaged constraint; materialize it for the plan file.
            sol.plan.unicast.assign(prob.n, std::vector<double>(prob.m, 0.0));
            std::size_t stride = 1;
            std::vector<std::size_t> strides(prob.n);
            for (std::size_t i = prob.n; i-- > 0;) {
                strides[i] = stride;
                stride *= prob.m;
            }
            for (std::size_t i = 0; i < prob.n; ++i)
                for (std::size_t j = 0; j < prob.m; ++j)
                    sol.plan.unicast[i][j] = sol.unicast_per_demand[j * strides[i]][i];
        }
    } else {
        const std::string mapped = "ccm-" + scheme;
        for (double b : prob.budgets)
            if (b != prob.budgets.front())
                throw std::invalid_argument(scheme + " scheme requires equal cache budgets");
        sol = ccm_point(mapped, lib, model, prob.budgets.front(), capacity, ocfg);
    }

    std::cout << "scheme,R,M,m_tilde,objective,feasible\n";
    std::cout << scheme << ',' << format_double(capacity) << ','
              << format_double(mean_of(prob.budgets)) << ',' << sol.m_tilde << ','
              << format_double(sol.objective) << ',' << (sol.feasible ? 1 : 0) << "\n";

    if (!solution_path.empty()) {
        PlanFile file;
        file.plan = sol.plan;
        file.budgets = prob.budgets;
        file.scheme = scheme;
        file.m_tilde = sol.m_tilde;
        file.objective = sol.objective;
        file.capacity = capacity;
        file.feasible = sol.feasible;
        file.save(solution_path);
        std::cerr << "wrote plan to " << solution_path << "\n";
    }
    return 0;
}

int run_simulate(const std::string& config_path, double capacity, int packets,
                 std::size_t trials, std::uint64_t seed, const std::string& plan_path,
                 long long denom_cap) {
    const ConfigMap cfg = ConfigMap::load(config_path);
    const ProblemSpec prob = ProblemSpec::parse(cfg);
    const SourceLibrary lib = prob.library();
    const DemandModel model = prob.demand();

    MulticastRatePlan plan;
    if (!plan_path.empty()) {
        plan = PlanFile::load(plan_path).plan;
        if (plan.receiver_count() != prob.n || plan.file_count() != prob.m)
            throw std::invalid_argument("plan dimensions do not match config");
    } else {
        OptimizerConfig ocfg;
        ocfg.seed = seed;
        ocfg.restarts = 3;
        ocfg.max_iterations = 200;
        if (!model.rows_identical())
            throw std::invalid_argument("simulate without --plan requires identical demand rows");
        for (double b : prob.budgets)
            if (b != prob.budgets.front())
                throw std::invalid_argument("simulate without --plan requires equal budgets");
        plan = optimize_rlfu(lib, model.q[0], prob.budgets.front(), capacity,
                             prob.n, ocfg)
                   .plan;
    }

    RandomStream root(seed);
    RandomStream placement_rng = root.fork(1);
    const PacketizedPlacement placement = packetize(plan, packets, denom_cap, placement_rng);
    if (placement.fractional)
        std::cerr << "warning: plan rates not exactly representable within denominator cap "
                  << denom_cap << "; using fractional layers\n";

    RandomStream demand_rng = root.fork(2);
    DemandSampler sampler(model);
    std::cout << "trial,demand_hash,coded_rate,naive_rate,unicast_rate,mean_distortion\n";
    for (std::size_t t = 0; t < trials; ++t) {
        const DemandRealization d = sampler.sample(demand_rng);
        const DeliveryResult del = simulate_delivery(lib, placement, plan, d, capacity);
        std::printf("%zu,%016llx,%s,%s,%s,%s\n", t,
                    static_cast<unsigned long long>(demand_hash(d)),
                    format_double(del.coded_rate).c_str(), format_double(del.naive_rate).c_str(),
                    format_double(del.unicast_rate).c_str(),
                    format_double(del.mean_distortion).c_str());
    }
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir,
                  const std::string& format, unsigned jobs) {
    const ConfigMap cfg = ConfigMap::load(config_path);
    SweepSpec spec = SweepSpec::parse(cfg);
    const auto rows = run_sweep(spec, jobs);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "results.csv").string();
    write_text_file(csv_path, sweep_csv(rows));
    std::cout << "wrote " << csv_path << "\n";
    if (format == "plotdata") {
        const auto files = emit_plotdata(rows, spec, out_dir);
        std::cout << "wrote " << files.size() << " plotdata files to " << out_dir << "\n";
    }
    return 0;
}

int run_validate(const std::string& level_text, std::uint64_t seed,
                 const std::string& report_path) {
    const ValidationLevel level =
        level_text == "full" ? ValidationLevel::Full : ValidationLevel::Quick;
    const auto results = run_validation(level, seed, [](const CheckResult& r) {
        std::printf("[%s] %s. %-24s (%.2fs) %s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(),
                    r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
    });
    if (!report_path.empty()) {
        write_text_file(report_path, validation_report_csv(results));
        std::cerr << "wrote report to " << report_path << "\n";
    }
    for (const auto& r : results)
        if (!r.pass) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cachecast: distortion-memory tradeoffs for cache-aided video delivery"};
    app.require_subcommand(1);

    std::string config_path, mode_text = "exact", scheme = "rlfu", out_dir = "out";
    std::string format = "csv", plan_path, solution_path, level = "quick", report_path;
    std::string unicast_mode = "per-file";
    double capacity = 0.0;
    int packets = 100, restarts = 8;
    long long denom_cap = 16;
    std::size_t trials = 100;
    std::uint64_t seed = default_seed();
    unsigned jobs = 0;

    auto* lcu = app.add_subcommand("lcu", "local caching-aided unicast distortion");
    lcu->add_option("--config", config_path, "problem config file")->required();
    lcu->add_option("--capacity", capacity, "shared link capacity R (bits/sample)")->required();
    lcu->add_option("--mode", mode_text, "exact or mc:<samples>:<seed>");

    auto* ccm = app.add_subcommand("ccm", "cooperative caching-aided coded multicast design");
    ccm->add_option("--config", config_path)->required();
    ccm->add_option("--capacity", capacity)->required();
    ccm->add_option("--scheme", scheme, "general|symmetric|rlfu|uniform");
    ccm->add_option("--restarts", restarts);
    ccm->add_option("--seed", seed);
    ccm->add_option("--unicast-mode", unicast_mode, "per-file|per-demand");
    ccm->add_option("--out-solution", solution_path, "plan file for replay by simulate");

    auto* sim = app.add_subcommand("simulate", "packet-level RAP/GCC delivery simulation");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--capacity", capacity)->required();
    sim->add_option("--packets", packets, "packets per layer B");
    sim->add_option("--trials", trials);
    sim->add_option("--seed", seed);
    sim->add_option("--plan", plan_path, "plan file from ccm --out-solution");
    sim->add_option("--denom-cap", denom_cap, "layer quantization denominator cap");

    auto* sweep = app.add_subcommand("sweep", "distortion-memory sweep over (scheme, R, M)");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--out", out_dir)->required();
    sweep->add_option("--format", format, "csv|plotdata");
    sweep->add_option("--jobs", jobs, "worker threads (default: hardware)");

    auto* validate = app.add_subcommand("validate", "run the oracle/invariant suites");
    validate->add_option("--level", level, "quick|full");
    validate->add_option("--seed", seed);
    validate->add_option("--report", report_path, "write machine-readable CSV report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (lcu->parsed()) return run_lcu(config_path, capacity, mode_text);
        if (ccm->parsed())
            return run_ccm(config_path, capacity, scheme, restarts, seed, unicast_mode,
                           solution_path);
        if (sim->parsed())
            return run_simulate(config_path, capacity, packets, trials, seed, plan_path,
                                denom_cap);
        if (sweep->parsed()) return run_sweep_cmd(config_path, out_dir, format, jobs);
        if (validate->parsed()) return run_validate(level, seed, report_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
