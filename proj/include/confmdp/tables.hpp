#pragma once

// Dense tabular containers for configurable MDPs. All tables are row-major:
// policy[s][a], reward[s][a], model[s][a][s'], kernel[s][s'].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace confmdp {

using numvec = std::vector<double>;
using maskvec = std::vector<std::uint8_t>;

/// Shape mismatch, malformed input or a violated structural precondition.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The evaluation linear system cannot be solved (gamma = 1 without an absorbing exit).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tolerance used when checking that rows and distributions are normalized.
inline constexpr double kStochasticTol = 1e-12;

/// How the Q-spread constant in the decoupled bound is obtained.
struct DeltaQMode {
    enum class Kind { Constant, ComputedSup };
    Kind kind = Kind::ComputedSup;
    double value = 0.0; ///< used when kind == Constant

    static DeltaQMode constant(double v) { return {Kind::Constant, v}; }
    static DeltaQMode computed() { return {Kind::ComputedSup, 0.0}; }
    bool is_constant() const { return kind == Kind::Constant; }
};

/// (1 - gamma^H) / (1 - gamma); H when gamma == 1.
double horizon_constant(double gamma, int horizon);

/**
 * Finite configurable MDP without its transition model: states, actions,
 * reward table, discount, initial distribution and the Q-spread setting.
 */
struct TabularConfMdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec reward;          ///< [s][a], entries in [0,1]
    double gamma = 0.9;     ///< in (0,1]; 1 only for absorbing episodic problems
    numvec mu;              ///< initial state distribution
    DeltaQMode delta_q = DeltaQMode::computed();
    double horizon_constant = 0.0;

    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }

    /// Throws StructuralError if any invariant is violated.
    void validate() const;
};

/// Conditional action distribution pi(a|s), optionally restricted by a support mask.
struct Policy {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec pi;                            ///< [s][a]
    std::optional<maskvec> support_mask;  ///< [s][a], 1 = allowed

    Policy() = default;
    Policy(std::size_t states, std::size_t actions)
        : n_states(states), n_actions(actions), pi(states * actions, 0.0) {}

    double operator()(std::size_t s, std::size_t a) const { return pi[s * n_actions + a]; }
    double& operator()(std::size_t s, std::size_t a) { return pi[s * n_actions + a]; }
    std::span<const double> row(std::size_t s) const {
        return {pi.data() + s * n_actions, n_actions};
    }
    bool allowed(std::size_t s, std::size_t a) const {
        return !support_mask || (*support_mask)[s * n_actions + a] != 0;
    }

    /// Uniform over allowed actions. Throws if some state has no allowed action.
    static Policy uniform(std::size_t states, std::size_t actions,
                          std::optional<maskvec> mask = std::nullopt);
    /// Mass one on the given action in every state.
    static Policy deterministic(std::size_t states, std::size_t actions,
                                std::span<const std::size_t> choice);

    void validate() const;
    bool operator==(const Policy& other) const { return pi == other.pi; }
};

/// Transition model P(s'|s,a).
struct TransitionModel {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    numvec p; ///< [s][a][s']

    TransitionModel() = default;
    TransitionModel(std::size_t states, std::size_t actions)
        : n_states(states), n_actions(actions), p(states * actions * states, 0.0) {}

    std::size_t index(std::size_t s, std::size_t a, std::size_t next) const {
        return (s * n_actions + a) * n_states + next;
    }
    double operator()(std::size_t s, std::size_t a, std::size_t next) const { return p[index(s, a, next)]; }
    double& operator()(std::size_t s, std::size_t a, std::size_t next) { return p[index(s, a, next)]; }
    std::span<const double> row(std::size_t s, std::size_t a) const {
        return {p.data() + (s * n_actions + a) * n_states, n_states};
    }

    void validate() const;
    bool operator==(const TransitionModel& other) const { return p == other.p; }
};

/// Policy-induced state kernel P^pi(s'|s).
struct StateKernel {
    std::size_t n_states = 0;
    numvec k; ///< [s][s']

    double operator()(std::size_t s, std::size_t next) const { return k[s * n_states + next]; }
};

/// Discounted state and state-action distributions of a model-policy pair.
struct OccupancyMeasures {
    numvec d_state;        ///< d_mu^{P,pi}
    numvec d_state_action; ///< delta_mu^{P,pi}[s][a] = pi[s][a] * d_state[s]
    /// Factor turning an expectation under d into a return: 1/(1-gamma), or the
    /// expected episode length on the gamma = 1 absorbing path.
    double scale = 1.0;
};

/// V, Q and U functions of a model-policy pair.
struct ValueFunctions {
    numvec v; ///< [s]
    numvec q; ///< [s][a]
    numvec u; ///< [s][a][s'] = R[s][a] + gamma * v[s']
};

/**
 * Policy space: unconstrained (optionally restricted by a support mask) or the
 * convex hull of vertex policies.
 */
struct PolicySpace {
    std::optional<maskvec> support_mask;
    std::vector<Policy> vertices; ///< empty means unconstrained

    bool parametric() const { return !vertices.empty(); }
};

/**
 * Model space: unconstrained (optionally restricted to a per-(s,a) support over
 * next states) or the convex hull of vertex models addressed by a coefficient
 * vector omega on the simplex.
 */
struct ModelSpace {
    std::optional<maskvec> support; ///< [s][a][s'], 1 = reachable; unconstrained only
    std::vector<TransitionModel> vertices;

    bool parametric() const { return !vertices.empty(); }
    /// sum_i omega_i * vertices[i]
    TransitionModel mix(std::span<const double> omega) const;
};

/// L1 distance of two equally sized vectors.
double l1_distance(std::span<const double> x, std::span<const double> y);

/// Throws StructuralError naming `what` if omega is not on the simplex.
void check_simplex(std::span<const double> omega, const std::string& what);

} // namespace confmdp
