#pragma once

#include "confmdp/core.hpp"

#include <vector>

namespace confmdp {

/// Pointwise advantages of a model-policy pair.
struct AdvantageSet {
    numvec policy_adv; ///< A(s,a) = Q(s,a) - V(s)
    numvec model_adv;  ///< A(s,a,s') = U(s,a,s') - Q(s,a)
    numvec tilde_adv;  ///< U(s,a,s') - V(s)
};

AdvantageSet advantages(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                        const ValueFunctions& vf);

/**
 * One-step gains of a target pair (P', pi') over the current (P, pi), pointwise
 * and in expectation under the current occupancy. Expectations are normalized
 * (taken under a probability distribution); multiply by `occ.scale` to get
 * return units.
 */
struct RelativeAdvantages {
    numvec policy_rel;  ///< [s]    sum_a pi'(a|s) A(s,a)
    numvec model_rel;   ///< [s][a] sum_s' P'(s'|s,a) A(s,a,s')
    numvec coupled_rel; ///< [s]    sum_{a,s'} pi' P' (U - V)
    double expected_policy = 0.0;
    double expected_model = 0.0;
    double expected_coupled = 0.0;
};

RelativeAdvantages relative_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                       const TransitionModel& p_target, const Policy& pi_target);

RelativeAdvantages relative_advantages(const TabularConfMdp& mdp, const TransitionModel& p,
                                       const Policy& pi, const TransitionModel& p_target,
                                       const Policy& pi_target);

/// Expected policy relative advantage only (skips the model side).
double expected_policy_advantage(const TabularConfMdp& mdp, const PairEvaluation& current,
                                 const Policy& pi_target);

/// Expected model relative advantage only (skips the policy side).
double expected_model_advantage(const TabularConfMdp& mdp, const PairEvaluation& current,
                                const TransitionModel& p_target);

/// Expected model relative advantage of each vertex under the current pair.
std::vector<double> vertex_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                      std::span<const TransitionModel> vertices);

std::vector<double> vertex_advantages(const TabularConfMdp& mdp, const TransitionModel& p_omega,
                                      const Policy& pi, std::span<const TransitionModel> vertices);

/// Expected policy relative advantage of each vertex policy under the current pair.
std::vector<double> vertex_policy_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                             std::span<const Policy> vertices);

} // namespace confmdp
