#include "confmdp/advantage.hpp"

#include "confmdp/kernels.hpp"

namespace confmdp {

namespace {

double weighted_sum(std::span<const double> w, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
    return acc;
}

} // namespace

AdvantageSet advantages(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                        const ValueFunctions& vf) {
    check_shapes(mdp, p, pi);
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    if (vf.v.size() != S || vf.q.size() != S * A || vf.u.size() != S * A * S) {
        throw StructuralError("advantages: value functions do not match the MDP shape");
    }
    AdvantageSet out{numvec(S * A), numvec(S * A * S), numvec(S * A * S)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t sa = s * A + a;
            out.policy_adv[sa] = vf.q[sa] - vf.v[s];
            for (std::size_t t = 0; t < S; ++t) {
                out.model_adv[sa * S + t] = vf.u[sa * S + t] - vf.q[sa];
                out.tilde_adv[sa * S + t] = vf.u[sa * S + t] - vf.v[s];
            }
        }
    }
    return out;
}

RelativeAdvantages relative_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                       const TransitionModel& p_target, const Policy& pi_target) {
    check_shapes(mdp, p_target, pi_target);
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    const kernels::Dims dims{S, A};
    RelativeAdvantages out{numvec(S), numvec(S * A), numvec(S)};
    kernels::parallel::policy_relative(dims, pi_target.pi, current.q, current.v, out.policy_rel);
    kernels::parallel::model_relative(dims, p_target.p, mdp.reward, current.q, current.v, mdp.gamma,
                                      out.model_rel);
    // sum_{a,s'} pi' P' (U - V) = sum_a pi' (A(s,a) + A_rel(s,a)).
    for (std::size_t s = 0; s < S; ++s) {
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            acc += pi_target(s, a) * (current.q[s * A + a] - current.v[s] + out.model_rel[s * A + a]);
        }
        out.coupled_rel[s] = acc;
    }
    out.expected_policy = weighted_sum(current.occ.d_state, out.policy_rel);
    out.expected_model = weighted_sum(current.occ.d_state_action, out.model_rel);
    out.expected_coupled = weighted_sum(current.occ.d_state, out.coupled_rel);
    return out;
}

RelativeAdvantages relative_advantages(const TabularConfMdp& mdp, const TransitionModel& p,
                                       const Policy& pi, const TransitionModel& p_target,
                                       const Policy& pi_target) {
    return relative_advantages(mdp, evaluate(mdp, p, pi), p_target, pi_target);
}

double expected_policy_advantage(const TabularConfMdp& mdp, const PairEvaluation& current,
                                 const Policy& pi_target) {
    numvec rel(mdp.n_states);
    kernels::parallel::policy_relative({mdp.n_states, mdp.n_actions}, pi_target.pi, current.q,
                                       current.v, rel);
    return weighted_sum(current.occ.d_state, rel);
}

double expected_model_advantage(const TabularConfMdp& mdp, const PairEvaluation& current,
                                const TransitionModel& p_target) {
    numvec rel(mdp.n_states * mdp.n_actions);
    kernels::parallel::model_relative({mdp.n_states, mdp.n_actions}, p_target.p, mdp.reward,
                                      current.q, current.v, mdp.gamma, rel);
    return weighted_sum(current.occ.d_state_action, rel);
}

std::vector<double> vertex_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                      std::span<const TransitionModel> vertices) {
    std::vector<double> out;
    out.reserve(vertices.size());
    for (const auto& vertex : vertices) out.push_back(expected_model_advantage(mdp, current, vertex));
    return out;
}

std::vector<double> vertex_advantages(const TabularConfMdp& mdp, const TransitionModel& p_omega,
                                      const Policy& pi, std::span<const TransitionModel> vertices) {
    return vertex_advantages(mdp, evaluate(mdp, p_omega, pi), vertices);
}

std::vector<double> vertex_policy_advantages(const TabularConfMdp& mdp, const PairEvaluation& current,
                                             std::span<const Policy> vertices) {
    std::vector<double> out;
    out.reserve(vertices.size());
    for (const auto& vertex : vertices) out.push_back(expected_policy_advantage(mdp, current, vertex));
    return out;
}

} // namespace confmdp
