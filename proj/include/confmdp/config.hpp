#pragma once

// Run configuration files: one `key = value` per line, `#` starts a comment,
// dotted keys address an environment section (e.g. `two_chain.p = 0.1`).

#include "confmdp/envs.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace confmdp {

/// Invalid configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Environment { StudentTeacher, Racetrack, TwoChain, Random };
std::string to_string(Environment e);

struct RunConfig {
    Environment environment = Environment::TwoChain;
    StrategyConfig solver;
    double gamma = 0.9;
    std::optional<double> delta_q;  ///< nullopt: computed from Q each iteration
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    StudentTeacherSpec student_teacher;
    RacetrackSpec racetrack;
    std::filesystem::path track_path;
    TwoChainSpec two_chain;
    RandomSpec random;

    std::filesystem::path source; ///< file the config was read from, if any
};

/// Parses config text. Relative paths (track files) resolve against `base_dir`.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".",
                            const std::string& origin = "<config>");

RunConfig parse_config(const std::filesystem::path& path);

/// Builds the problem described by the config, with gamma and delta-Q applied.
Problem build_problem(const RunConfig& config);

/// Identifies the environment instance; two configs with equal keys describe the same problem.
std::string environment_key(const RunConfig& config);

} // namespace confmdp
