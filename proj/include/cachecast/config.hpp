#pragma once

// Structured text (key = value) configs shared by every subcommand, plus the
// plan files written by `ccm` and replayed by `simulate`. Values are
// whitespace-separated tokens; repeated keys accumulate in order. Lines
// starting with '#' (or trailing '# ...' fragments) are comments.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cachecast/multicast_rate.hpp"
#include "cachecast/random.hpp"
#include "cachecast/source_model.hpp"

namespace cachecast {

inline std::string format_double(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

class ConfigMap {
public:
    static ConfigMap parse(std::istream& in) {
        ConfigMap cfg;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) continue;
            std::vector<std::string> tokens;
            std::istringstream ts(value);
            std::string tok;
            while (ts >> tok) tokens.push_back(tok);
            cfg.entries_[key].push_back(std::move(tokens));
        }
        return cfg;
    }

    static ConfigMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    const std::vector<std::string>& tokens(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end() || it->second.empty())
            throw std::runtime_error("config key missing: " + key);
        return it->second.front();
    }

    const std::vector<std::vector<std::string>>& all(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw std::runtime_error("config key missing: " + key);
        return it->second;
    }

    std::string str(const std::string& key) const {
        const auto& t = tokens(key);
        if (t.size() != 1) throw std::runtime_error("config key expects one value: " + key);
        return t.front();
    }

    double number(const std::string& key) const { return std::stod(str(key)); }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    std::size_t count(const std::string& key) const {
        const long long v = std::stoll(str(key));
        if (v < 0) throw std::runtime_error("config key must be non-negative: " + key);
        return static_cast<std::size_t>(v);
    }
    std::size_t count_or(const std::string& key, std::size_t fallback) const {
        return has(key) ? count(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& tok : tokens(key)) out.push_back(std::stod(tok));
        return out;
    }

private:
    static std::string trim(std::string s) {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return "";
        const auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    }

    std::map<std::string, std::vector<std::vector<std::string>>> entries_;
};

// sigma = 1.5 | sigma = v1 v2 ... vm | sigma = uniform(lo,hi,seed)
struct SigmaSpec {
    enum class Kind { Constant, List, Uniform } kind = Kind::Constant;
    double value = 1.0;
    std::vector<double> list;
    double lo = 0.0, hi = 1.0;
    std::uint64_t seed = 0;

    std::vector<double> materialize(std::size_t m) const {
        switch (kind) {
        case Kind::Constant:
            return std::vector<double>(m, value);
        case Kind::List:
            if (list.size() != m)
                throw std::runtime_error("sigma list length does not match m");
            return list;
        case Kind::Uniform: {
            std::vector<double> out(m);
            RandomStream rng(seed);
            for (double& v : out) v = rng.uniform(lo, hi);
            return out;
        }
        }
        throw std::logic_error("unreachable");
    }

    static SigmaSpec parse(const std::vector<std::string>& tokens) {
        SigmaSpec spec;
        if (tokens.empty()) throw std::runtime_error("sigma: empty value");
        if (tokens.size() == 1 && tokens.front().rfind("uniform(", 0) == 0) {
            const std::string& t = tokens.front();
            if (t.back() != ')') throw std::runtime_error("sigma: malformed uniform(...)");
            std::string inner = t.substr(8, t.size() - 9);
            for (char& c : inner)
                if (c == ',') c = ' ';
            std::istringstream in(inner);
            unsigned long long seed = 0;
            if (!(in >> spec.lo >> spec.hi >> seed))
                throw std::runtime_error("sigma: uniform(lo,hi,seed) expects three values");
            spec.seed = seed;
            spec.kind = Kind::Uniform;
            if (!(spec.lo > 0.0) || !(spec.hi >= spec.lo))
                throw std::runtime_error("sigma: uniform bounds must satisfy 0 < lo <= hi");
            return spec;
        }
        if (tokens.size() == 1) {
            spec.kind = Kind::Constant;
            spec.value = std::stod(tokens.front());
            return spec;
        }
        spec.kind = Kind::List;
        for (const auto& t : tokens) spec.list.push_back(std::stod(t));
        return spec;
    }

    std::string describe() const {
        switch (kind) {
        case Kind::Constant:
            return format_double(value);
        case Kind::List:
            return "list";
        case Kind::Uniform:
            return "uniform(" + format_double(lo) + "," + format_double(hi) + "," +
                   std::to_string(seed) + ")";
        }
        return "";
    }
};

// Library / demand / budget description shared by all subcommands.
struct ProblemSpec {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t samples_per_file = 1; // F
    double alpha = 0.0;
    std::vector<std::vector<double>> q_rows; // overrides alpha when present
    SigmaSpec sigma;
    std::vector<double> budgets; // per receiver

    static ProblemSpec parse(const ConfigMap& cfg) {
        ProblemSpec p;
        p.m = cfg.count("m");
        p.n = cfg.count("n");
        if (p.m == 0 || p.n == 0) throw std::runtime_error("config: m and n must be positive");
        p.samples_per_file = cfg.count_or("F", 1);
        p.alpha = cfg.number_or("alpha", 0.0);
        p.sigma = cfg.has("sigma") ? SigmaSpec::parse(cfg.tokens("sigma")) : SigmaSpec{};
        if (cfg.has("q_row")) {
            for (const auto& row_tokens : cfg.all("q_row")) {
                std::vector<double> row;
                for (const auto& t : row_tokens) row.push_back(std::stod(t));
                if (row.size() != p.m) throw std::runtime_error("config: q_row length != m");
                p.q_rows.push_back(std::move(row));
            }
            if (p.q_rows.size() == 1) p.q_rows.assign(p.n, p.q_rows.front());
            if (p.q_rows.size() != p.n)
                throw std::runtime_error("config: need 1 or n q_row entries");
        }
        if (cfg.has("cache")) {
            p.budgets = cfg.numbers("cache");
            if (p.budgets.size() == 1) p.budgets.assign(p.n, p.budgets.front());
            if (p.budgets.size() != p.n)
                throw std::runtime_error("config: cache needs 1 or n values");
        } else {
            p.budgets.assign(p.n, 0.0);
        }
        return p;
    }

    SourceLibrary library() const {
        SourceLibrary lib;
        lib.variances = sigma.materialize(m);
        lib.samples_per_file = samples_per_file;
        lib.validate();
        return lib;
    }

    DemandModel demand() const {
        if (q_rows.empty()) return zipf_demand(m, alpha, n);
        DemandModel model;
        model.q = q_rows;
        model.validate();
        return model;
    }
};

// Plan file: full (cached, multicast, unicast) matrices plus metadata,
// written by `ccm` and replayed by `simulate`.
struct PlanFile {
    MulticastRatePlan plan;
    std::vector<double> budgets;
    std::string scheme = "general";
    std::size_t m_tilde = 0;
    double objective = 0.0;
    double capacity = 0.0;
    bool feasible = false;

    std::string serialize() const {
        std::ostringstream out;
        out << "# cachecast plan\n";
        out << "n = " << plan.receiver_count() << "\n";
        out << "m = " << plan.file_count() << "\n";
        out << "scheme = " << scheme << "\n";
        out << "m_tilde = " << m_tilde << "\n";
        out << "capacity = " << format_double(capacity, 17) << "\n";
        out << "objective = " << format_double(objective, 17) << "\n";
        out << "feasible = " << (feasible ? 1 : 0) << "\n";
        auto emit_row = [&](const char* key, const std::vector<double>& row) {
            out << key << " =";
            for (double v : row) out << ' ' << format_double(v, 17);
            out << "\n";
        };
        emit_row("cache_budget", budgets);
        for (const auto& row : plan.cached) emit_row("cached", row);
        for (const auto& row : plan.multicast) emit_row("multicast", row);
        if (!plan.unicast.empty())
            for (const auto& row : plan.unicast) emit_row("unicast", row);
        return out.str();
    }

    static PlanFile parse(const ConfigMap& cfg) {
        PlanFile f;
        const std::size_t n = cfg.count("n");
        const std::size_t m = cfg.count("m");
        f.scheme = cfg.has("scheme") ? cfg.str("scheme") : "general";
        f.m_tilde = cfg.count_or("m_tilde", 0);
        f.capacity = cfg.number_or("capacity", 0.0);
        f.objective = cfg.number_or("objective", 0.0);
        f.feasible = cfg.count_or("feasible", 0) != 0;
        f.budgets = cfg.has("cache_budget") ? cfg.numbers("cache_budget")
                                            : std::vector<double>(n, 0.0);
        if (f.budgets.size() == 1) f.budgets.assign(n, f.budgets.front());
        auto read_matrix = [&](const char* key, bool required) {
            std::vector<std::vector<double>> mat;
            if (!cfg.has(key)) {
                if (required) throw std::runtime_error(std::string("plan: missing ") + key);
                return mat;
            }
            for (const auto& row_tokens : cfg.all(key)) {
                std::vector<double> row;
                for (const auto& t : row_tokens) row.push_back(std::stod(t));
                if (row.size() != m)
                    throw std::runtime_error(std::string("plan: row length != m for ") + key);
                mat.push_back(std::move(row));
            }
            if (mat.size() != n)
                throw std::runtime_error(std::string("plan: expected n rows for ") + key);
            return mat;
        };
        f.plan.cached = read_matrix("cached", true);
        f.plan.multicast = read_matrix("multicast", true);
        f.plan.unicast = read_matrix("unicast", false);
        f.plan.validate();
        return f;
    }

    static PlanFile load(const std::string& path) { return parse(ConfigMap::load(path)); }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write plan file: " + path);
        out << serialize();
    }
};

} // namespace cachecast
