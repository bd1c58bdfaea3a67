#pragma once

#include "confmdp/advantage.hpp"

#include <vector>

namespace confmdp {

/// L1-based premetrics between a target pair and the current pair.
struct Dissimilarities {
    double d_e_pi = 0.0;      ///< E_{s~d} ||pi'(.|s) - pi(.|s)||_1
    double d_inf_pi = 0.0;    ///< sup_s ||pi'(.|s) - pi(.|s)||_1
    double d_e_p = 0.0;       ///< E_{(s,a)~delta} ||P'(.|s,a) - P(.|s,a)||_1
    double d_inf_p = 0.0;     ///< sup_{s,a} ||P'(.|s,a) - P(.|s,a)||_1
    double d_e_kernel = 0.0;  ///< E_{s~d} ||P'^pi'(.|s) - P^pi(.|s)||_1
};

/// Dissimilarities of (P_target, pi_target) from (P, pi) weighted by the occupancy of (P, pi).
Dissimilarities dissimilarities(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                                const TransitionModel& p_target, const Policy& pi_target,
                                const OccupancyMeasures& occ);

/// Same, reusing an existing evaluation of the current pair. The kernel term is
/// skipped unless `with_kernel` is set, since the solver loop never needs it.
Dissimilarities dissimilarities(const TabularConfMdp& mdp, const PairEvaluation& current,
                                const TransitionModel& p, const Policy& pi,
                                const TransitionModel& p_target, const Policy& pi_target,
                                bool with_kernel = false);

/// Which stationary point of the quadratic bound a candidate came from.
enum class CandidateKind { None, Alpha0, Beta0, Alpha1, Beta1 };

struct Candidate {
    double alpha = 0.0;
    double beta = 0.0;
    double value = 0.0;
    CandidateKind kind = CandidateKind::None;
};

/// Restricts the candidate set: both sides, policy only (beta = 0) or model only (alpha = 0).
enum class CandidateSet { Both, PolicyOnly, ModelOnly };

/// Inputs and result of the step-size selection.
struct BoundTerms {
    double adv_policy = 0.0;      ///< expected policy relative advantage of the target policy
    double adv_model = 0.0;       ///< expected model relative advantage of the target model
    double delta_q = 0.0;
    double delta_a_coupled = 0.0; ///< diagnostics only
    Dissimilarities dissim;
    std::vector<Candidate> candidates;
    Candidate chosen;
};

/**
 * Decoupled lower bound as a function of the step sizes:
 *   (a Ap + b Am)/(1-g) - g dQ/(2(1-g)^2) (a^2 DEpi Dipi + a b (DEpi DiP + Dipi DEP) + g b^2 DiP DEP)
 */
double decoupled_bound_quadratic(const BoundTerms& terms, double alpha, double beta, double gamma);

/// The decoupled bound with every expected dissimilarity replaced by its sup counterpart.
double sup_variant_bound(const BoundTerms& terms, double alpha, double beta, double gamma);

/// Copy of `terms` whose expected dissimilarities are replaced by the sup ones.
BoundTerms with_sup_dissimilarities(BoundTerms terms);

/**
 * Fills `candidates` with the clipped stationary points (alpha0, 0), (0, beta0),
 * (alpha1, 1), (1, beta1) allowed by `set`, evaluates each with the quadratic
 * and stores the best in `chosen`. A coefficient whose denominator vanishes is
 * dropped; when the policy (model) target coincides with the current one on
 * every state the set collapses to the model (policy) side only. If no
 * candidate has a positive value, `chosen` is the null step (0, 0, 0).
 * Ties keep the earlier candidate in the order listed above.
 */
BoundTerms optimal_coefficients(BoundTerms terms, double gamma, CandidateSet set = CandidateSet::Both);

/// Closed-form bound values at unclipped stationary points, in (1-gamma)-scaled units.
struct ClosedFormBounds {
    double at_alpha0 = 0.0;
    double at_beta0 = 0.0;
    double at_beta1 = 0.0;  ///< B(1, beta1)
    double at_alpha1 = 0.0; ///< B(alpha1, 1)
};

ClosedFormBounds closed_form_bounds(const BoundTerms& terms, double gamma);

/// Coupled bound pieces for one target pair.
struct CoupledBound {
    double value = 0.0;
    double expected_coupled = 0.0;
    double delta_a = 0.0;
    double d_e_kernel = 0.0;
};

CoupledBound coupled_bound_terms(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                                 const TransitionModel& p_target, const Policy& pi_target);

/// A_coupled/(1-g) - g dA D_E^{kernel} / (2 (1-g)^2).
double coupled_bound(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                     const TransitionModel& p_target, const Policy& pi_target);

} // namespace confmdp
