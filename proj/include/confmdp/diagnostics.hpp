#pragma once

#include "confmdp/bounds.hpp"

#include <stdexcept>
#include <vector>

namespace confmdp {

/// A diagnostic precondition does not hold (e.g. a vertex with positive advantage).
class DiagnosticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Central finite-difference step used by the gradient checks.
inline constexpr double kFiniteDifferenceStep = 1e-5;

/**
 * Gradient of J with respect to the hull coefficients at omega.
 *
 * `free_gradient[i]` is the gradient expression (1/(1-g)) sum delta sum_s' P_i U,
 * treating each omega_i as a free coordinate. Along the simplex the only
 * meaningful quantities are the directional derivatives toward each vertex,
 * d/dt J(omega + t (e_i - omega)) at t = 0: `analytic` holds them computed from
 * the free gradient, `advantage_form` the same derivative as scale * A_i, and
 * `numeric` the central finite difference.
 */
struct GradientReport {
    numvec free_gradient;
    numvec analytic;
    numvec advantage_form;
    numvec numeric;
    double max_abs_error = 0.0; ///< max_i |analytic_i - numeric_i|
};

GradientReport model_gradient(const TabularConfMdp& mdp, const ModelSpace& space, std::span<const double> omega,
                              const Policy& pi, double h = kFiniteDifferenceStep);

/**
 * dJ/dbeta at beta = 0 for P' = beta P_eta + (1 - beta) P with P_eta = sum_i eta_i P_i,
 * i.e. (1/(1-g)) sum_i eta_i A_i.
 */
double beta_derivative(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                       std::span<const TransitionModel> vertices, std::span<const double> eta);

/// Central finite difference of J along the same direction.
double beta_derivative_numeric(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                               std::span<const TransitionModel> vertices, std::span<const double> eta,
                               double h = kFiniteDifferenceStep);

/**
 * Upper bound on J(best hull model) - J(p_bar) for a fixed policy:
 * (1/(1-g)) max_{s,a} max_i A^{P_i}(s,a). Requires every expected vertex
 * advantage to be <= tol; otherwise throws DiagnosticError naming the vertex.
 */
double performance_gap_bound(const TabularConfMdp& mdp, const TransitionModel& p_bar, const Policy& pi,
                             std::span<const TransitionModel> vertices, double tol = 1e-9);

/**
 * True unless both expected dissimilarities of (p_b, pi_b) from (p_a, pi_a) are
 * zero while the returns differ by more than 1e-10.
 */
bool premetric_check(const TabularConfMdp& mdp, const TransitionModel& p_a, const Policy& pi_a,
                     const TransitionModel& p_b, const Policy& pi_b);

} // namespace confmdp
