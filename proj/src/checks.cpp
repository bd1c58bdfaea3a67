#include "confmdp/checks.hpp"

#include "confmdp/diagnostics.hpp"
#include "confmdp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace confmdp {

namespace {

std::string fmt(const char* pattern, double x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        return r;
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

CheckResult two_chain_closed_forms() {
    const double p = 0.1, g = 0.9;
    double worst = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double w = k / 10.0;
        const Problem prob = build_two_chain({p, g, w});
        const TransitionModel m = prob.model_space.mix(*prob.initial_omega);
        const PairEvaluation ev = evaluate(prob.mdp, m, prob.initial_policy);
        const auto adv = vertex_advantages(prob.mdp, ev, prob.model_space.vertices);
        const double c = (1 - 2 * p) * (1 - 2 * p);
        const double q1 = two_chain::q1(w, p), q2 = two_chain::q2(w, p);
        worst = std::max({worst, std::abs(ev.v[two_chain::A] - g * g * q1 * q2),
                          std::abs(ev.v[two_chain::B] - g * q2),
                          std::abs(ev.occ.scale * adv[0] - g * g * (1 - w) * (1 - 2 * w) * c),
                          std::abs(ev.occ.scale * adv[1] + g * g * w * (1 - 2 * w) * c)});
    }
    return {"", worst <= 1e-12, fmt("max deviation %.3e", worst)};
}

CheckResult two_chain_smi() {
    const Problem prob = build_two_chain({0.1, 0.9, 0.0});
    StrategyConfig cfg;
    cfg.strategy = Strategy::SMI;
    const RunResult r = run(prob, cfg);
    const double err = std::abs(r.final_j - 0.2025);
    return {"", r.converged() && err <= 1e-6, fmt("|J - 0.2025| = %.3e", err)};
}

CheckResult random_safety() {
    double worst_gap = 0.0, worst_drop = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RandomSpec spec;
        spec.seed = seed;
        spec.n_states = 3 + seed % 6;
        spec.n_actions = 1 + seed % 4;
        spec.density = 0.6;
        const Problem prob = build_random(spec);
        for (Strategy s : {Strategy::SPMI, Strategy::SPI, Strategy::SMI}) {
            StrategyConfig cfg;
            cfg.strategy = s;
            cfg.max_iterations = 200;
            const RunResult r = run(prob, cfg);
            for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
                const double gain = r.records[i + 1].j - r.records[i].j;
                worst_gap = std::min(worst_gap, gain - r.records[i].bound_value);
                worst_drop = std::min(worst_drop, gain);
            }
        }
    }
    return {"", worst_gap >= -1e-9 && worst_drop >= -1e-12,
            fmt("min(gain - bound) = %.3e", worst_gap) + fmt(", min gain = %.3e", worst_drop)};
}

CheckResult improvement_identity() {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const Problem prob = build_random({static_cast<std::uint64_t>(100 + k), 6, 3, 0.7, 0, 0.9, true});
        const Policy pi2 = random_policy(rng, 6, 3, 0.7);
        const TransitionModel p2 = random_model(rng, 6, 3, 0.7);
        const PairEvaluation old_ev = evaluate(prob.mdp, prob.initial_model, prob.initial_policy);
        const PairEvaluation new_ev = evaluate(prob.mdp, p2, pi2);
        const RelativeAdvantages rel = relative_advantages(prob.mdp, old_ev, p2, pi2);
        double rhs = 0.0;
        for (std::size_t s = 0; s < 6; ++s) rhs += new_ev.occ.d_state[s] * rel.coupled_rel[s];
        rhs *= new_ev.occ.scale;
        worst = std::max(worst, std::abs((new_ev.j - old_ev.j) - rhs));
    }
    return {"", worst <= 1e-10, fmt("max deviation %.3e", worst)};
}

CheckResult gradients() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RandomSpec spec{seed, 5, 2, 0.8, 3, 0.9, true};
        const Problem prob = build_random(spec);
        const GradientReport g = model_gradient(prob.mdp, prob.model_space, *prob.initial_omega, prob.initial_policy);
        for (std::size_t i = 0; i < g.analytic.size(); ++i) {
            worst = std::max(worst, std::abs(g.analytic[i] - g.numeric[i]) / std::max(1.0, std::abs(g.analytic[i])));
            worst = std::max(worst, std::abs(g.analytic[i] - g.advantage_form[i]) /
                                        std::max(1.0, std::abs(g.analytic[i])));
        }
        const numvec eta{0.2, 0.5, 0.3};
        const double a = beta_derivative(prob.mdp, prob.initial_model, prob.initial_policy,
                                         prob.model_space.vertices, eta);
        const double n = beta_derivative_numeric(prob.mdp, prob.initial_model, prob.initial_policy,
                                                 prob.model_space.vertices, eta);
        worst = std::max(worst, std::abs(a - n) / std::max(1.0, std::abs(a)));
    }
    return {"", worst <= 1e-6, fmt("max relative error %.3e", worst)};
}

CheckResult coefficient_grid() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 30; ++k) {
        BoundTerms t;
        t.dissim.d_inf_pi = 2.0 * unit(rng);
        t.dissim.d_e_pi = t.dissim.d_inf_pi * unit(rng);
        t.dissim.d_inf_p = 2.0 * unit(rng);
        t.dissim.d_e_p = t.dissim.d_inf_p * unit(rng);
        t.adv_policy = 0.05 * unit(rng);
        t.adv_model = 0.05 * unit(rng);
        t.delta_q = 1.0 + 5.0 * unit(rng);
        const double g = 0.5 + 0.45 * unit(rng);
        const BoundTerms chosen = optimal_coefficients(t, g);
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; j <= 100; ++j) {
                const double v = decoupled_bound_quadratic(t, i / 100.0, j / 100.0, g);
                worst = std::max(worst, v - chosen.chosen.value);
            }
        }
    }
    return {"", worst <= 1e-9, fmt("largest grid excess %.3e", worst)};
}

CheckResult premetric() {
    // Perturb a state that the initial distribution and every transition avoid.
    RandomSpec spec{3, 5, 2, 1.0, 0, 0.9, true};
    Problem prob = build_random(spec);
    const std::size_t hidden = 4;
    prob.mdp.mu[hidden] = 0.0;
    double sum = 0.0;
    for (double x : prob.mdp.mu) sum += x;
    for (double& x : prob.mdp.mu) x /= sum;
    TransitionModel p = prob.initial_model;
    for (std::size_t s = 0; s < 5; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            double row = 0.0;
            p(s, a, hidden) = 0.0;
            for (std::size_t t = 0; t < 5; ++t) row += p(s, a, t);
            for (std::size_t t = 0; t < 5; ++t) p(s, a, t) /= row;
        }
    }
    TransitionModel p2 = p;
    Policy pi2 = prob.initial_policy;
    for (std::size_t t = 0; t < 5; ++t) p2(hidden, 0, t) = t == 0 ? 1.0 : 0.0;
    pi2(hidden, 0) = 1.0;
    pi2(hidden, 1) = 0.0;
    const bool ok = premetric_check(prob.mdp, p, prob.initial_policy, p2, pi2) &&
                    premetric_check(prob.mdp, p, prob.initial_policy, p, prob.initial_policy);
    return {"", ok, ok ? "equal returns" : "returns differ"};
}

} // namespace

std::vector<CheckResult> run_verification() {
    return {
        guarded("two-chain closed forms", two_chain_closed_forms),
        guarded("two-chain model iteration optimum", two_chain_smi),
        guarded("safe updates on random instances", random_safety),
        guarded("improvement identity", improvement_identity),
        guarded("model gradient and beta derivative", gradients),
        guarded("step-size optimality", coefficient_grid),
        guarded("premetric zero distance", premetric),
    };
}

} // namespace confmdp
