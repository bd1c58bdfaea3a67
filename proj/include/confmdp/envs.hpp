#pragma once

#include "confmdp/algorithm.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace confmdp {

// ---------------------------------------------------------------- two-chain

struct TwoChainSpec {
    double p = 0.1;
    double gamma = 0.9;
    double omega0 = 0.0; ///< weight of the first vertex (the omega = 1 model)
};

/// Closed-form quantities of the two-chain problem as functions of omega.
namespace two_chain {
inline constexpr std::size_t A = 0, B = 1, C = 2, D = 3;
double q1(double omega, double p);
double q2(double omega, double p);
}

/**
 * States A, B, C, D with one action. A -> B w.p. q1, B -> C w.p. q2, failures go
 * to D; C pays 1 and moves to D, which absorbs. Vertices: omega = 1 first, then
 * omega = 0; the hull point with weights (w, 1 - w) is the model at omega = w.
 */
Problem build_two_chain(const TwoChainSpec& spec);

// ---------------------------------------------------------- Student-Teacher

struct StudentTeacherSpec {
    int n_literals = 2;             ///< n
    int max_value = 1;              ///< m
    int max_update = 1;             ///< k
    int max_statement_literals = 2; ///< p
    int horizon = 10;
    double gamma = 0.99;

    /// Parses the "n-m-k-p" tuple notation.
    static StudentTeacherSpec from_tuple(const std::string& text);
    void validate() const;
};

/// sum_{i in literals} L_i = value
struct Example {
    std::vector<int> literals;
    int value = 0;
};

struct StudentTeacherLayout {
    std::vector<Example> examples;
    std::vector<std::vector<int>> assignments;
    std::size_t state(std::size_t example, std::size_t assignment) const {
        return example * assignments.size() + assignment;
    }
    std::size_t example_of(std::size_t s) const { return s / assignments.size(); }
    std::size_t assignment_of(std::size_t s) const { return s % assignments.size(); }
};

StudentTeacherLayout student_teacher_layout(const StudentTeacherSpec& spec);

/// True when the assignment satisfies the example.
bool satisfies(const Example& e, const std::vector<int>& assignment);

/**
 * States are (example, assignment) pairs and actions are assignments; an action
 * is allowed when it changes the literals by at most k in total. The next
 * assignment is the action; the teacher (the configurable model) picks the next
 * example. Reward 1 when the action satisfies the current example. Delta-Q is
 * the horizon constant (1 - gamma^H)/(1 - gamma).
 */
Problem build_student_teacher(const StudentTeacherSpec& spec);

// ---------------------------------------------------------------- racetrack

enum class TrackCell : char { Initial = '1', Goal = '2', Wall = '3', Road = '4' };

struct TrackGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<TrackCell> cells;
    TrackCell at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
};

/// Parses rows of the characters 1-4. Errors carry the 1-based row and column.
TrackGrid parse_track(const std::string& text);
TrackGrid load_track(const std::filesystem::path& path);

enum class RacetrackVertex { HsB, HsNb, LsB, LsNb };
std::string to_string(RacetrackVertex v);
RacetrackVertex parse_racetrack_vertex(const std::string& name);

struct RacetrackSpec {
    TrackGrid grid;
    int v_min = -2;
    int v_max = 2;
    int speed_threshold = 2; ///< max(|vx|,|vy|) below this counts as low speed
    /// Success probability of the intended action, per stability type and speed.
    double hs_low = 0.8, hs_high = 0.9;
    double ls_low = 0.9, ls_high = 0.8;
    /// Per-step breakdown probability and speed cap multiplier per engine type.
    double boost_failure = 0.1;
    int boost_speed_factor = 2;
    double no_boost_failure = 0.0;
    std::vector<RacetrackVertex> vertices{RacetrackVertex::HsNb, RacetrackVertex::LsNb};
    std::vector<double> omega0; ///< empty: the default for the vertex set
    double gamma = 0.9;
    double delta_q = 1.0;       ///< <= 0 means computed

    void validate() const;
};

struct RacetrackState {
    int row = 0, col = 0, vr = 0, vc = 0;
    bool terminal = false;
};

struct RacetrackLayout {
    std::vector<RacetrackState> states; ///< last entry is the absorbing terminal
};

inline constexpr std::size_t kRacetrackActions = 5; ///< keep, +vx, +vy, -vx, -vy

/**
 * States are the (position, velocity) tuples reachable from the initial cells at
 * rest under any vertex model, plus one absorbing terminal. Goal-cell states pay
 * 1 and move to the terminal. Each vertex is a product of a stability type (the
 * intended action succeeds with a speed-dependent probability, otherwise a
 * uniformly random action happens) and an engine type (speed cap and breakdown
 * probability). Moving through a wall or off the grid leaves the car in place
 * with zero velocity; crossing a goal cell stops the car there.
 */
Problem build_racetrack(const RacetrackSpec& spec, RacetrackLayout* layout = nullptr);

// ------------------------------------------------------------------- random

struct RandomSpec {
    std::uint64_t seed = 0;
    std::size_t n_states = 5;
    std::size_t n_actions = 3;
    double density = 1.0;        ///< probability that a table entry is nonzero
    std::size_t vertices = 0;    ///< 0: unconstrained model space
    double gamma = 0.95;
    bool computed_delta_q = true;
};

/// Random stochastic row of the given width; at least one entry is positive.
numvec random_distribution(std::mt19937_64& rng, std::size_t width, double density);
Policy random_policy(std::mt19937_64& rng, std::size_t states, std::size_t actions, double density);
TransitionModel random_model(std::mt19937_64& rng, std::size_t states, std::size_t actions, double density);

/**
 * Reproducible random instance. All draws come from one std::mt19937_64 seeded
 * with `seed`, in the order reward, mu, policy, model (or vertices, then omega).
 */
Problem build_random(const RandomSpec& spec);

} // namespace confmdp
