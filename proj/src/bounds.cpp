#include "confmdp/bounds.hpp"

#include "confmdp/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace confmdp {

namespace {

double weighted_sum(std::span<const double> w, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
    return acc;
}

double max_of(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, v);
    return m;
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

Dissimilarities compute(const TabularConfMdp& mdp, const OccupancyMeasures& occ, const TransitionModel& p,
                        const Policy& pi, const TransitionModel& p_target, const Policy& pi_target,
                        const StateKernel* kernel, bool with_kernel) {
    check_shapes(mdp, p, pi);
    check_shapes(mdp, p_target, pi_target);
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    if (occ.d_state.size() != S || occ.d_state_action.size() != S * A) {
        throw StructuralError("dissimilarities: occupancy does not match the MDP shape");
    }
    Dissimilarities out;
    numvec pol(S), mod(S * A);
    kernels::parallel::row_l1(S, A, pi_target.pi, pi.pi, pol);
    kernels::parallel::row_l1(S * A, S, p_target.p, p.p, mod);
    out.d_e_pi = weighted_sum(occ.d_state, pol);
    out.d_inf_pi = max_of(pol);
    out.d_e_p = weighted_sum(occ.d_state_action, mod);
    out.d_inf_p = max_of(mod);
    if (with_kernel) {
        const StateKernel current = kernel ? *kernel : state_kernel(p, pi);
        const StateKernel target = state_kernel(p_target, pi_target);
        numvec ker(S);
        kernels::parallel::row_l1(S, S, target.k, current.k, ker);
        out.d_e_kernel = weighted_sum(occ.d_state, ker);
    }
    return out;
}

} // namespace

Dissimilarities dissimilarities(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                                const TransitionModel& p_target, const Policy& pi_target,
                                const OccupancyMeasures& occ) {
    return compute(mdp, occ, p, pi, p_target, pi_target, nullptr, true);
}

Dissimilarities dissimilarities(const TabularConfMdp& mdp, const PairEvaluation& current,
                                const TransitionModel& p, const Policy& pi,
                                const TransitionModel& p_target, const Policy& pi_target,
                                bool with_kernel) {
    return compute(mdp, current.occ, p, pi, p_target, pi_target, &current.kernel, with_kernel);
}

double decoupled_bound_quadratic(const BoundTerms& t, double alpha, double beta, double gamma) {
    const Dissimilarities& d = t.dissim;
    const double gain = (alpha * t.adv_policy + beta * t.adv_model) / (1.0 - gamma);
    const double penalty = alpha * alpha * d.d_e_pi * d.d_inf_pi +
                           alpha * beta * (d.d_e_pi * d.d_inf_p + d.d_inf_pi * d.d_e_p) +
                           gamma * beta * beta * d.d_inf_p * d.d_e_p;
    return gain - gamma * t.delta_q / (2.0 * (1.0 - gamma) * (1.0 - gamma)) * penalty;
}

BoundTerms with_sup_dissimilarities(BoundTerms terms) {
    terms.dissim.d_e_pi = terms.dissim.d_inf_pi;
    terms.dissim.d_e_p = terms.dissim.d_inf_p;
    return terms;
}

double sup_variant_bound(const BoundTerms& terms, double alpha, double beta, double gamma) {
    return decoupled_bound_quadratic(with_sup_dissimilarities(terms), alpha, beta, gamma);
}

BoundTerms optimal_coefficients(BoundTerms terms, double gamma, CandidateSet set) {
    const Dissimilarities& d = terms.dissim;
    const double dq = terms.delta_q;
    terms.candidates.clear();

    const bool policy_moves = d.d_e_pi > 0.0 || d.d_inf_pi > 0.0;
    const bool model_moves = d.d_e_p > 0.0 || d.d_inf_p > 0.0;
    const bool allow_policy = set != CandidateSet::ModelOnly && policy_moves;
    const bool allow_model = set != CandidateSet::PolicyOnly && model_moves;
    const bool joint = set == CandidateSet::Both && policy_moves && model_moves;

    const double den_a0 = gamma * dq * d.d_inf_pi * d.d_e_pi;
    const double den_b0 = gamma * gamma * dq * d.d_inf_p * d.d_e_p;
    const bool has_a0 = den_a0 != 0.0;
    const bool has_b0 = den_b0 != 0.0;
    const double a0 = has_a0 ? (1.0 - gamma) * terms.adv_policy / den_a0 : 0.0;
    const double b0 = has_b0 ? (1.0 - gamma) * terms.adv_model / den_b0 : 0.0;

    auto push = [&](double alpha, double beta, CandidateKind kind) {
        alpha = clip01(alpha);
        beta = clip01(beta);
        terms.candidates.push_back({alpha, beta, decoupled_bound_quadratic(terms, alpha, beta, gamma), kind});
    };

    if (allow_policy && has_a0) push(a0, 0.0, CandidateKind::Alpha0);
    if (allow_model && has_b0) push(0.0, b0, CandidateKind::Beta0);
    if (joint && has_a0) {
        push(a0 - 0.5 * (d.d_e_p / d.d_e_pi + d.d_inf_p / d.d_inf_pi), 1.0, CandidateKind::Alpha1);
    }
    if (joint && has_b0) {
        push(1.0, b0 - 0.5 / gamma * (d.d_e_pi / d.d_e_p + d.d_inf_pi / d.d_inf_p), CandidateKind::Beta1);
    }

    terms.chosen = Candidate{};
    for (const Candidate& c : terms.candidates) {
        if (c.value > terms.chosen.value) terms.chosen = c;
    }
    return terms;
}

ClosedFormBounds closed_form_bounds(const BoundTerms& t, double gamma) {
    const Dissimilarities& d = t.dissim;
    const double g = gamma, dq = t.delta_q;
    const double ap = t.adv_policy, am = t.adv_model;
    ClosedFormBounds out;
    out.at_alpha0 = (1.0 - g) * ap * ap / (2.0 * g * dq * d.d_inf_pi * d.d_e_pi);
    out.at_beta0 = (1.0 - g) * am * am / (2.0 * g * g * dq * d.d_inf_p * d.d_e_p);
    const double d1 = d.d_e_pi / d.d_e_p + d.d_inf_pi / d.d_inf_p;
    const double d2 = d.d_e_p / d.d_e_pi + d.d_inf_p / d.d_inf_pi;
    out.at_beta1 = ap + out.at_beta0 - am / (2.0 * g) * (d.d_e_pi / d.d_inf_p + d.d_inf_pi / d.d_e_p) +
                   dq / (2.0 * (1.0 - g)) *
                       (0.5 * d.d_e_p * d.d_e_pi * d1 + 0.5 * d.d_inf_p * d.d_e_pi * d1 -
                        0.25 * d.d_inf_p * d.d_e_p * d1 * d1 - g * d.d_e_pi * d.d_inf_pi);
    out.at_alpha1 = am + out.at_alpha0 - ap / 2.0 * (d.d_e_p / d.d_inf_pi + d.d_inf_p / d.d_e_pi) +
                    g * dq / (2.0 * (1.0 - g)) *
                        (0.5 * d.d_e_pi * d.d_e_p * d2 + 0.5 * d.d_inf_pi * d.d_e_p * d2 -
                         0.25 * d.d_inf_pi * d.d_e_pi * d2 * d2 - g * d.d_e_p * d.d_inf_p);
    return out;
}

CoupledBound coupled_bound_terms(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                                 const TransitionModel& p_target, const Policy& pi_target) {
    const PairEvaluation current = evaluate(mdp, p, pi);
    const RelativeAdvantages rel = relative_advantages(mdp, current, p_target, pi_target);
    const Dissimilarities dis = dissimilarities(mdp, current, p, pi, p_target, pi_target, true);
    CoupledBound out;
    out.expected_coupled = rel.expected_coupled;
    out.delta_a = q_spread(rel.coupled_rel);
    out.d_e_kernel = dis.d_e_kernel;
    const double g = mdp.gamma;
    out.value = out.expected_coupled / (1.0 - g) -
                g * out.delta_a * out.d_e_kernel / (2.0 * (1.0 - g) * (1.0 - g));
    return out;
}

double coupled_bound(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                     const TransitionModel& p_target, const Policy& pi_target) {
    return coupled_bound_terms(mdp, p, pi, p_target, pi_target).value;
}

} // namespace confmdp
