#include "confmdp/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace confmdp {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

class Reader {
public:
    Reader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::stringstream in(text);
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(origin_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
                value = value.substr(1, value.size() - 2);
            }
            if (key.empty()) throw ConfigError(origin_ + ":" + std::to_string(line_no) + ": empty key");
            if (entries_.count(key)) {
                throw ConfigError(origin_ + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
            entries_[key] = {value, line_no};
        }
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        std::string v = it->second.value;
        lines_[key] = it->second.line;
        entries_.erase(it);
        return v;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        auto it = lines_.find(key);
        const std::string where = it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
        throw ConfigError(where + ": " + key + ": " + what);
    }

    double number(const std::string& key, const std::string& text) const {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
            fail(key, "'" + text + "' is not a number");
        }
        return v;
    }

    long long integer(const std::string& key, const std::string& text) const {
        errno = 0;
        char* end = nullptr;
        const long long v = std::strtoll(text.c_str(), &end, 10);
        if (text.empty() || *end != '\0' || errno == ERANGE) fail(key, "'" + text + "' is not an integer");
        return v;
    }

    void real(const std::string& key, double& out, double lo, double hi, bool lo_open = false,
              bool hi_open = false) {
        auto v = take(key);
        if (!v) return;
        const double x = number(key, *v);
        if ((lo_open ? x <= lo : x < lo) || (hi_open ? x >= hi : x > hi)) {
            char range[96];
            std::snprintf(range, sizeof range, "value %s out of range %c%g, %g%c", v->c_str(), lo_open ? '(' : '[',
                          lo, hi, hi_open ? ')' : ']');
            fail(key, range);
        }
        out = x;
    }

    template <class Int>
    void whole(const std::string& key, Int& out, long long lo, long long hi) {
        auto v = take(key);
        if (!v) return;
        const long long x = integer(key, *v);
        if (x < lo || x > hi) {
            fail(key, "value " + *v + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        out = static_cast<Int>(x);
    }

    /// Rejects whatever is left: unknown keys or keys of another environment.
    void finish(const std::string& env) const {
        if (entries_.empty()) return;
        const auto& [key, entry] = *entries_.begin();
        const std::string where = origin_ + ":" + std::to_string(entry.line);
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            const std::string section = key.substr(0, dot);
            if (section == "student_teacher" || section == "racetrack" || section == "two_chain" ||
                section == "random") {
                if (section != env) {
                    throw ConfigError(where + ": " + key + ": does not apply to environment " + env);
                }
            }
        }
        throw ConfigError(where + ": unknown key '" + key + "'");
    }

private:
    std::string origin_;
    std::map<std::string, Entry> entries_;
    std::map<std::string, int> lines_;
};

} // namespace

std::string to_string(Environment e) {
    switch (e) {
    case Environment::StudentTeacher: return "student_teacher";
    case Environment::Racetrack: return "racetrack";
    case Environment::TwoChain: return "two_chain";
    case Environment::Random: return "random";
    }
    return "unknown";
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            const std::string& origin) {
    Reader in(text, origin);
    RunConfig cfg;

    const auto env = in.take("environment");
    if (!env) throw ConfigError(origin + ": environment: missing required key");
    if (*env == "student_teacher") {
        cfg.environment = Environment::StudentTeacher;
        cfg.gamma = 0.99;
    } else if (*env == "racetrack") {
        cfg.environment = Environment::Racetrack;
        cfg.gamma = 0.9;
        cfg.delta_q = 1.0;
    } else if (*env == "two_chain") {
        cfg.environment = Environment::TwoChain;
        cfg.gamma = 0.9;
    } else if (*env == "random") {
        cfg.environment = Environment::Random;
        cfg.gamma = 0.95;
    } else {
        in.fail("environment", "unknown environment '" + *env + "'");
    }

    if (auto v = in.take("strategy")) {
        try {
            cfg.solver.strategy = parse_strategy(*v);
        } catch (const StructuralError& e) {
            in.fail("strategy", e.what());
        }
    }
    if (auto v = in.take("target_mode")) {
        try {
            cfg.solver.target_mode = parse_target_mode(*v);
        } catch (const StructuralError& e) {
            in.fail("target_mode", e.what());
        }
    }
    in.real("epsilon", cfg.solver.epsilon, 0.0, 1e300);
    in.whole("max_iterations", cfg.solver.max_iterations, 1, 1000000000LL);
    in.real("gamma", cfg.gamma, 0.0, 1.0, true, true);
    bool delta_q_given = false;
    if (auto v = in.take("delta_q")) {
        delta_q_given = true;
        if (*v == "computed") {
            cfg.delta_q.reset();
        } else {
            const double x = in.number("delta_q", *v);
            if (!(x > 0.0)) in.fail("delta_q", "must be positive or 'computed'");
            cfg.delta_q = x;
        }
    }
    if (auto v = in.take("output_dir")) cfg.output_dir = *v;
    in.whole("seed", cfg.seed, 0, 9223372036854775807LL);

    switch (cfg.environment) {
    case Environment::StudentTeacher: {
        StudentTeacherSpec& st = cfg.student_teacher;
        if (auto v = in.take("student_teacher.problem")) {
            try {
                st = StudentTeacherSpec::from_tuple(*v);
            } catch (const StructuralError& e) {
                in.fail("student_teacher.problem", e.what());
            }
        }
        in.whole("student_teacher.n_literals", st.n_literals, 1, 8);
        in.whole("student_teacher.max_value", st.max_value, 1, 9);
        in.whole("student_teacher.max_update", st.max_update, 1, 64);
        in.whole("student_teacher.max_statement_literals", st.max_statement_literals, 2, 8);
        in.whole("student_teacher.horizon", st.horizon, 1, 1000000);
        st.gamma = cfg.gamma;
        try {
            st.validate();
        } catch (const StructuralError& e) {
            in.fail("student_teacher", e.what());
        }
        if (!delta_q_given) cfg.delta_q = horizon_constant(cfg.gamma, st.horizon);
        break;
    }
    case Environment::Racetrack: {
        RacetrackSpec& rt = cfg.racetrack;
        const auto track = in.take("racetrack.track");
        if (!track) in.fail("racetrack.track", "missing required key");
        cfg.track_path = std::filesystem::path(*track);
        if (cfg.track_path.is_relative()) cfg.track_path = base_dir / cfg.track_path;
        try {
            rt.grid = load_track(cfg.track_path);
        } catch (const StructuralError& e) {
            in.fail("racetrack.track", e.what());
        }
        if (auto v = in.take("racetrack.vertices")) {
            rt.vertices.clear();
            for (const auto& name : split_list(*v)) {
                try {
                    rt.vertices.push_back(parse_racetrack_vertex(name));
                } catch (const StructuralError& e) {
                    in.fail("racetrack.vertices", e.what());
                }
            }
        }
        if (auto v = in.take("racetrack.omega0")) {
            for (const auto& item : split_list(*v)) rt.omega0.push_back(in.number("racetrack.omega0", item));
        }
        in.whole("racetrack.v_min", rt.v_min, -20, 0);
        in.whole("racetrack.v_max", rt.v_max, 0, 20);
        in.whole("racetrack.speed_threshold", rt.speed_threshold, 0, 100);
        in.real("racetrack.hs_low", rt.hs_low, 0.0, 1.0);
        in.real("racetrack.hs_high", rt.hs_high, 0.0, 1.0);
        in.real("racetrack.ls_low", rt.ls_low, 0.0, 1.0);
        in.real("racetrack.ls_high", rt.ls_high, 0.0, 1.0);
        in.real("racetrack.boost_failure", rt.boost_failure, 0.0, 1.0);
        in.real("racetrack.no_boost_failure", rt.no_boost_failure, 0.0, 1.0);
        in.whole("racetrack.boost_speed_factor", rt.boost_speed_factor, 1, 10);
        rt.gamma = cfg.gamma;
        try {
            rt.validate();
        } catch (const StructuralError& e) {
            in.fail("racetrack", e.what());
        }
        break;
    }
    case Environment::TwoChain:
        in.real("two_chain.p", cfg.two_chain.p, 0.0, 1.0);
        in.real("two_chain.omega0", cfg.two_chain.omega0, 0.0, 1.0);
        cfg.two_chain.gamma = cfg.gamma;
        break;
    case Environment::Random:
        in.whole("random.n_states", cfg.random.n_states, 1, 5000);
        in.whole("random.n_actions", cfg.random.n_actions, 1, 1000);
        in.real("random.density", cfg.random.density, 0.0, 1.0, true, false);
        in.whole("random.vertices", cfg.random.vertices, 0, 1000);
        cfg.random.gamma = cfg.gamma;
        cfg.random.seed = cfg.seed;
        break;
    }
    in.finish(to_string(cfg.environment));
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot read config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunConfig cfg = parse_config_text(buffer.str(), path.parent_path().empty() ? "." : path.parent_path(),
                                      path.string());
    cfg.source = path;
    return cfg;
}

Problem build_problem(const RunConfig& config) {
    Problem problem;
    switch (config.environment) {
    case Environment::StudentTeacher: {
        StudentTeacherSpec spec = config.student_teacher;
        spec.gamma = config.gamma;
        problem = build_student_teacher(spec);
        break;
    }
    case Environment::Racetrack: {
        RacetrackSpec spec = config.racetrack;
        spec.gamma = config.gamma;
        problem = build_racetrack(spec);
        break;
    }
    case Environment::TwoChain: {
        TwoChainSpec spec = config.two_chain;
        spec.gamma = config.gamma;
        problem = build_two_chain(spec);
        break;
    }
    case Environment::Random: {
        RandomSpec spec = config.random;
        spec.gamma = config.gamma;
        spec.seed = config.seed;
        problem = build_random(spec);
        break;
    }
    }
    problem.mdp.delta_q = config.delta_q ? DeltaQMode::constant(*config.delta_q) : DeltaQMode::computed();
    return problem;
}

std::string environment_key(const RunConfig& c) {
    char buf[256];
    switch (c.environment) {
    case Environment::StudentTeacher: {
        const auto& s = c.student_teacher;
        std::snprintf(buf, sizeof buf, "student_teacher %d-%d-%d-%d H=%d", s.n_literals, s.max_value,
                      s.max_update, s.max_statement_literals, s.horizon);
        return buf;
    }
    case Environment::Racetrack: {
        std::string key = "racetrack " + std::filesystem::weakly_canonical(c.track_path).string();
        for (auto v : c.racetrack.vertices) key += " " + to_string(v);
        return key;
    }
    case Environment::TwoChain:
        std::snprintf(buf, sizeof buf, "two_chain p=%.17g omega0=%.17g", c.two_chain.p, c.two_chain.omega0);
        return buf;
    case Environment::Random:
        std::snprintf(buf, sizeof buf, "random seed=%llu %zux%zu density=%.17g vertices=%zu",
                      static_cast<unsigned long long>(c.seed), c.random.n_states, c.random.n_actions,
                      c.random.density, c.random.vertices);
        return buf;
    }
    return "unknown";
}

} // namespace confmdp
