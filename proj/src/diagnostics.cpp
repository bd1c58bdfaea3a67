#include "confmdp/diagnostics.hpp"

#include "confmdp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace confmdp {

namespace {

TransitionModel combine(std::span<const TransitionModel> vertices, std::span<const double> w) {
    TransitionModel out(vertices.front().n_states, vertices.front().n_actions);
    std::vector<kernels::cspan> tables;
    for (const auto& v : vertices) tables.emplace_back(v.p);
    kernels::parallel::combine(w, tables, out.p);
    return out;
}

TransitionModel blend(const TransitionModel& target, const TransitionModel& base, double t) {
    TransitionModel out(base.n_states, base.n_actions);
    kernels::serial::mix(t, target.p, base.p, out.p);
    return out;
}

void check_vertices(std::span<const TransitionModel> vertices, std::span<const double> w, const char* what) {
    if (vertices.empty()) throw StructuralError(std::string(what) + ": no vertices");
    if (w.size() != vertices.size()) {
        throw StructuralError(std::string(what) + ": weight vector does not match the vertex count");
    }
}

} // namespace

GradientReport model_gradient(const TabularConfMdp& mdp, const ModelSpace& space, std::span<const double> omega,
                              const Policy& pi, double h) {
    check_vertices(space.vertices, omega, "model_gradient");
    const std::size_t M = space.vertices.size();
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    const TransitionModel p = space.mix(omega);
    const PairEvaluation ev = evaluate(mdp, p, pi);

    GradientReport out;
    out.free_gradient.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        const TransitionModel& pi_vertex = space.vertices[i];
        double acc = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const double delta = ev.occ.d_state_action[s * A + a];
                if (delta == 0.0) continue;
                double inner = 0.0;
                for (std::size_t t = 0; t < S; ++t) {
                    inner += pi_vertex(s, a, t) * (mdp.r(s, a) + mdp.gamma * ev.v[t]);
                }
                acc += delta * inner;
            }
        }
        out.free_gradient[i] = ev.occ.scale * acc;
    }
    double along_omega = 0.0;
    for (std::size_t j = 0; j < M; ++j) along_omega += omega[j] * out.free_gradient[j];

    const auto adv = vertex_advantages(mdp, ev, space.vertices);
    out.analytic.resize(M);
    out.advantage_form.resize(M);
    out.numeric.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        out.analytic[i] = out.free_gradient[i] - along_omega;
        out.advantage_form[i] = ev.occ.scale * adv[i];

        numvec plus(omega.begin(), omega.end()), minus(omega.begin(), omega.end());
        for (std::size_t j = 0; j < M; ++j) {
            const double dir = (i == j ? 1.0 : 0.0) - omega[j];
            plus[j] += h * dir;
            minus[j] -= h * dir;
        }
        const double jp = evaluate(mdp, space.mix(plus), pi).j;
        const double jm = evaluate(mdp, space.mix(minus), pi).j;
        out.numeric[i] = (jp - jm) / (2.0 * h);
        out.max_abs_error = std::max(out.max_abs_error, std::abs(out.analytic[i] - out.numeric[i]));
    }
    return out;
}

double beta_derivative(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                       std::span<const TransitionModel> vertices, std::span<const double> eta) {
    check_vertices(vertices, eta, "beta_derivative");
    check_simplex(eta, "beta_derivative eta");
    const PairEvaluation ev = evaluate(mdp, p, pi);
    const auto adv = vertex_advantages(mdp, ev, vertices);
    double acc = 0.0;
    for (std::size_t i = 0; i < adv.size(); ++i) acc += eta[i] * adv[i];
    return ev.occ.scale * acc;
}

double beta_derivative_numeric(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi,
                               std::span<const TransitionModel> vertices, std::span<const double> eta,
                               double h) {
    check_vertices(vertices, eta, "beta_derivative_numeric");
    const TransitionModel target = combine(vertices, eta);
    const double jp = evaluate(mdp, blend(target, p, h), pi).j;
    const double jm = evaluate(mdp, blend(target, p, -h), pi).j;
    return (jp - jm) / (2.0 * h);
}

double performance_gap_bound(const TabularConfMdp& mdp, const TransitionModel& p_bar, const Policy& pi,
                             std::span<const TransitionModel> vertices, double tol) {
    if (vertices.empty()) throw StructuralError("performance_gap_bound: no vertices");
    const PairEvaluation ev = evaluate(mdp, p_bar, pi);
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    double sup = -std::numeric_limits<double>::infinity();
    numvec rel(S * A);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        kernels::parallel::model_relative({S, A}, vertices[i].p, mdp.reward, ev.q, ev.v, mdp.gamma, rel);
        double expected = 0.0;
        for (std::size_t k = 0; k < rel.size(); ++k) expected += ev.occ.d_state_action[k] * rel[k];
        if (expected > tol) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "performance_gap_bound: vertex %zu has positive expected advantage %.3e", i, expected);
            throw DiagnosticError(msg);
        }
        sup = std::max(sup, *std::max_element(rel.begin(), rel.end()));
    }
    return ev.occ.scale * sup;
}

bool premetric_check(const TabularConfMdp& mdp, const TransitionModel& p_a, const Policy& pi_a,
                     const TransitionModel& p_b, const Policy& pi_b) {
    const PairEvaluation ev = evaluate(mdp, p_a, pi_a);
    const Dissimilarities d = dissimilarities(mdp, ev, p_a, pi_a, p_b, pi_b);
    if (d.d_e_pi != 0.0 || d.d_e_p != 0.0) return true;
    return std::abs(evaluate(mdp, p_b, pi_b).j - ev.j) <= 1e-10;
}

} // namespace confmdp
