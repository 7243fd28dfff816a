#include "nsreduce/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nsreduce {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct KeyValues {
    std::map<std::string, std::string> kv;
    mutable std::map<std::string, bool> used;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string raw(const std::string& key) const {
        used[key] = true;
        return kv.at(key);
    }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const std::string v = raw(key);
        try {
            size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return d;
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not a number: " + v);
        }
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string v = raw(key);
        try {
            size_t pos = 0;
            const long long d = std::stoll(v, &pos);
            if (pos != v.size() || d < 0) throw std::invalid_argument("");
            return static_cast<std::uint64_t>(d);
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not an integer: " + v);
        }
    }

    std::vector<double> numbers(const std::string& key, size_t count) const {
        if (!has(key))
            throw std::invalid_argument("config: missing key '" + key + "'");
        std::istringstream is(raw(key));
        std::vector<double> out;
        double d;
        while (is >> d) out.push_back(d);
        if (out.size() != count)
            throw std::invalid_argument("config: key '" + key + "' needs " +
                                        std::to_string(count) + " numbers");
        return out;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? raw(key) : fallback;
    }

    void reject_unused() const {
        for (const auto& [key, value] : kv)
            if (!used.count(key))
                throw std::invalid_argument("config: unknown key '" + key + "'");
    }
};

KeyValues tokenize(const std::string& text) {
    KeyValues out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value' at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.kv.count(full))
            throw std::invalid_argument("config: duplicate key '" + full + "'");
        out.kv[full] = value;
    }
    return out;
}

ForcingSpec::Kind parse_kind(const std::string& s) {
    if (s == "zero") return ForcingSpec::Kind::zero;
    if (s == "gaussian_bump") return ForcingSpec::Kind::gaussian_bump;
    if (s == "polynomial_bump") return ForcingSpec::Kind::polynomial_bump;
    if (s == "grid_file") return ForcingSpec::Kind::grid_file;
    throw std::invalid_argument("config: unknown forcing kind '" + s + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    const KeyValues kv = tokenize(text);
    RunConfig c;

    const auto origin = kv.has("grid.origin") ? kv.numbers("grid.origin", 3)
                                              : std::vector<double>{0.0, 0.0, 0.0};
    const auto extent = kv.has("grid.extent") ? kv.numbers("grid.extent", 3)
                                              : std::vector<double>{1.0, 1.0, 1.0};
    for (int a = 0; a < 3; ++a) {
        c.grid.origin[a] = origin[a];
        c.grid.extent[a] = extent[a];
    }
    if (kv.has("grid.n_space")) {
        const auto n = kv.numbers("grid.n_space", 3);
        for (int a = 0; a < 3; ++a) c.grid.n_space[a] = static_cast<int>(n[a]);
    }
    c.grid.time_horizon = kv.number("grid.T", c.grid.time_horizon);
    c.grid.n_time = static_cast<int>(kv.number("grid.n_time", c.grid.n_time));

    c.mu = kv.number("physics.mu", c.mu);
    c.tau = kv.number("physics.tau", c.tau);
    c.theta = kv.number("bounds.theta", c.theta);
    c.alpha = kv.number("bounds.alpha", c.alpha);
    c.holder_C = kv.number("bounds.C", c.holder_C);
    c.M_override = kv.number("bounds.M", c.M_override);

    c.damping = kv.number("iteration.lambda", c.damping);
    c.max_iters = static_cast<int>(kv.number("iteration.max_iters", c.max_iters));
    c.tol = kv.number("iteration.tol", c.tol);

    c.forcing.kind = parse_kind(kv.text("forcing.kind", "zero"));
    for (int j = 0; j < 3; ++j) {
        const std::string sfx = std::to_string(j + 1);
        auto& cm = c.forcing.comp[j];
        cm.amplitude = kv.number("forcing.amplitude" + sfx, 0.0);
        if (kv.has("forcing.center" + sfx)) {
            const auto ctr = kv.numbers("forcing.center" + sfx, 3);
            for (int a = 0; a < 3; ++a) cm.center[a] = ctr[a];
        }
        cm.width = kv.number("forcing.width" + sfx, cm.width);
        cm.file = kv.text("forcing.file" + sfx, "");
    }

    c.output_dir = kv.text("run.output_dir", c.output_dir);
    c.seed = kv.integer("run.seed", c.seed);
    c.xi_csv = kv.text("run.xi_csv", "");

    kv.reject_unused();
    c.validate();
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

void RunConfig::validate() const {
    grid.validate();
    if (!(mu > 0.0)) throw std::invalid_argument("config: physics.mu must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("config: physics.tau must be positive");
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("config: bounds.theta must be in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("config: bounds.alpha must be in (0, 1)");
    if (!(holder_C > 0.0)) throw std::invalid_argument("config: bounds.C must be positive");
    if (M_override < 0.0) throw std::invalid_argument("config: bounds.M must be nonnegative");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("config: iteration.lambda must be in (0, 1]");
    if (max_iters < 1) throw std::invalid_argument("config: iteration.max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("config: iteration.tol must be positive");
    forcing.validate(grid);
}

}  // namespace nsreduce
