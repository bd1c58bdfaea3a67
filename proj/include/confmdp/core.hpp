#pragma once

#include "confmdp/tables.hpp"

namespace confmdp {

/// Throws StructuralError if the model and policy do not match the MDP shape.
void check_shapes(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi);

/// P^pi(s'|s) = sum_a pi(a|s) P(s'|s,a).
StateKernel state_kernel(const TransitionModel& p, const Policy& pi);

/**
 * Everything derived from one model-policy pair, sharing a single
 * factorization of (I - gamma P^pi). The U table is not materialized here;
 * see value_functions().
 */
struct PairEvaluation {
    StateKernel kernel;
    numvec r_pi;            ///< sum_a pi(a|s) R(s,a)
    OccupancyMeasures occ;
    numvec v;
    numvec q;
    double j = 0.0;         ///< expected return
};

/**
 * Exact evaluation of (P, pi).
 *
 * gamma < 1: dense LU of (I - gamma P^pi) for up to kDenseLimit states, fixed-point
 * iteration above that. gamma = 1: states with P^pi(s|s) = 1 and zero reward are
 * treated as absorbing exits; every other state must reach one, otherwise an
 * EvaluationError is thrown. The occupancy is then the normalized expected
 * visit count over the transient states and `occ.scale` is the expected
 * episode length.
 */
PairEvaluation evaluate(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi);

inline constexpr std::size_t kDenseLimit = 2000;

OccupancyMeasures occupancy(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi);

/// V, Q and the full U table.
ValueFunctions value_functions(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi);

/// J = scale * sum_{s,a} delta(s,a) R(s,a).
double expected_return(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi);

/// sup - inf of a Q table.
double q_spread(std::span<const double> q);

/// Delta-Q used by the decoupled bound: the MDP's constant, or the spread of q.
double delta_q(const TabularConfMdp& mdp, std::span<const double> q);

} // namespace confmdp
