#pragma once

#include "confmdp/bounds.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confmdp {

/// A step of the solver failed; the message starts with the iteration index.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Strategy { SPMI, SPMI_SUP, SPMI_ALT, SPI, SMI, SPI_THEN_SMI, SMI_THEN_SPI };
enum class TargetMode { Greedy, Persistent };

std::string to_string(Strategy s);
std::string to_string(TargetMode m);
/// Accepts the lower-case names used in config files (spmi, spmi_sup, spi_then_smi, ...).
Strategy parse_strategy(const std::string& name);
TargetMode parse_target_mode(const std::string& name);

struct StrategyConfig {
    Strategy strategy = Strategy::SPMI;
    TargetMode target_mode = TargetMode::Persistent;
    double epsilon = 0.0;              ///< values below 1e-12 are raised to 1e-12
    std::size_t max_iterations = 50000;
};

/// Targets kept across iterations for the persistent choice.
struct TargetChoice {
    TargetMode mode = TargetMode::Persistent;
    std::optional<Policy> previous_policy_target;
    std::optional<TransitionModel> previous_model_target;
    std::optional<std::size_t> previous_model_vertex;
    std::optional<std::size_t> previous_policy_vertex;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double j = 0.0;            ///< return of the pair the step starts from
    double alpha = 0.0;
    double beta = 0.0;
    double adv_policy = 0.0;
    double adv_model = 0.0;
    double bound_value = 0.0;
    double d_e_pi = 0.0;
    double d_inf_pi = 0.0;
    double d_e_p = 0.0;
    double d_inf_p = 0.0;
    std::optional<numvec> omega; ///< hull coefficients before the step
    std::size_t target_policy_id = 0;
    std::size_t target_model_id = 0;
};

/// A configurable MDP with its policy and model spaces and starting point.
struct Problem {
    std::string name;
    TabularConfMdp mdp;
    PolicySpace policy_space;
    ModelSpace model_space;
    Policy initial_policy;
    TransitionModel initial_model;     ///< unconstrained spaces
    std::optional<numvec> initial_omega; ///< parametric model spaces
};

/// Current iterate of the solver.
struct SolverState {
    Policy pi;
    TransitionModel p;
    std::optional<numvec> omega;
    bool alt_policy_next = true;
    std::size_t policy_target_changes = 0;
    std::size_t model_target_changes = 0;
    std::optional<Policy> last_policy_target;
    std::optional<TransitionModel> last_model_target;
};

SolverState initial_state(const Problem& problem);

enum class Termination { Converged, NoPositiveBound, MaxIterations };
std::string to_string(Termination t);

struct RunResult {
    std::vector<IterationRecord> records;
    SolverState final_state;
    double final_j = 0.0;
    Termination reason = Termination::MaxIterations;
    bool truncated() const { return reason == Termination::MaxIterations; }
    bool converged() const { return reason == Termination::Converged; }
};

/// Deterministic argmax_a Q(s,a) over allowed actions, lowest index on ties.
Policy greedy_policy_target(const TabularConfMdp& mdp, const PolicySpace& space, std::span<const double> q);

/// Deterministic argmax_{s'} U(s,a,s') over the support, lowest index on ties.
TransitionModel greedy_model_target_unconstrained(const TabularConfMdp& mdp, const ModelSpace& space,
                                                  std::span<const double> v);

/// Index of the vertex with the largest expected relative advantage, lowest index on ties.
std::size_t greedy_model_target_parametric(const TabularConfMdp& mdp, const PairEvaluation& current,
                                           const ModelSpace& space);

/// Index of the vertex policy with the largest expected relative advantage.
std::size_t greedy_policy_target_parametric(const TabularConfMdp& mdp, const PairEvaluation& current,
                                            const PolicySpace& space);

/**
 * Persistent choice: returns `greedy` unless `previous` exists and its chosen
 * bound value is strictly larger.
 */
template <class Target>
const Target& persistent_target(const Target& greedy, const std::optional<Target>& previous,
                                const std::function<double(const Target&)>& bound_of) {
    if (!previous || *previous == greedy) return greedy;
    return bound_of(*previous) > bound_of(greedy) ? *previous : greedy;
}

/// Outcome of one step: the record and whether the loop must stop here.
struct StepResult {
    IterationRecord record;
    std::optional<Termination> stop;
};

/**
 * One iteration: evaluates the current pair, picks targets, selects step sizes
 * and applies the convex-combination update to `state` (unless stopping).
 */
StepResult spmi_step(const Problem& problem, SolverState& state, Strategy strategy, double epsilon,
                     TargetChoice& choice);

/// Runs the configured strategy from the problem's initial pair.
RunResult run(const Problem& problem, const StrategyConfig& config);

/// Same, starting from an explicit state.
RunResult run(const Problem& problem, const StrategyConfig& config, SolverState start);

} // namespace confmdp
