#include "confmdp/algorithm.hpp"

#include "confmdp/kernels.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace confmdp {

namespace {

constexpr double kAdvantageFloor = 1e-12;

struct NamedStrategy {
    Strategy value;
    const char* name;
};

constexpr std::array<NamedStrategy, 7> kStrategies{{
    {Strategy::SPMI, "spmi"},
    {Strategy::SPMI_SUP, "spmi_sup"},
    {Strategy::SPMI_ALT, "spmi_alt"},
    {Strategy::SPI, "spi"},
    {Strategy::SMI, "smi"},
    {Strategy::SPI_THEN_SMI, "spi_then_smi"},
    {Strategy::SMI_THEN_SPI, "smi_then_spi"},
}};

bool updates_policy(Strategy s) { return s != Strategy::SMI; }
bool updates_model(Strategy s) { return s != Strategy::SPI; }

CandidateSet filter_of(Strategy s) {
    switch (s) {
    case Strategy::SPI: return CandidateSet::PolicyOnly;
    case Strategy::SMI: return CandidateSet::ModelOnly;
    default: return CandidateSet::Both;
    }
}

} // namespace

std::string to_string(Strategy s) {
    for (const auto& entry : kStrategies) {
        if (entry.value == s) return entry.name;
    }
    return "unknown";
}

std::string to_string(TargetMode m) { return m == TargetMode::Greedy ? "greedy" : "persistent"; }

std::string to_string(Termination t) {
    switch (t) {
    case Termination::Converged: return "converged";
    case Termination::NoPositiveBound: return "no_positive_bound";
    case Termination::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    for (const auto& entry : kStrategies) {
        if (name == entry.name) return entry.value;
    }
    throw StructuralError("unknown strategy '" + name + "'");
}

TargetMode parse_target_mode(const std::string& name) {
    if (name == "greedy") return TargetMode::Greedy;
    if (name == "persistent") return TargetMode::Persistent;
    throw StructuralError("unknown target mode '" + name + "'");
}

SolverState initial_state(const Problem& problem) {
    SolverState st;
    st.pi = problem.initial_policy;
    if (problem.model_space.parametric()) {
        if (!problem.initial_omega) throw StructuralError("parametric model space needs an initial omega");
        if (problem.initial_omega->size() != problem.model_space.vertices.size()) {
            throw StructuralError("initial omega size does not match the number of vertices");
        }
        check_simplex(*problem.initial_omega, "initial omega");
        st.omega = problem.initial_omega;
        st.p = problem.model_space.mix(*st.omega);
    } else {
        st.p = problem.initial_model;
    }
    return st;
}

Policy greedy_policy_target(const TabularConfMdp& mdp, const PolicySpace& space, std::span<const double> q) {
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    if (q.size() != S * A) throw StructuralError("greedy_policy_target: Q table has the wrong size");
    Policy out(S, A);
    out.support_mask = space.support_mask;
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t best = A;
        for (std::size_t a = 0; a < A; ++a) {
            if (!out.allowed(s, a)) continue;
            if (best == A || q[s * A + a] > q[s * A + best]) best = a;
        }
        if (best == A) throw StructuralError("state " + std::to_string(s) + " has no allowed action");
        out(s, best) = 1.0;
    }
    return out;
}

TransitionModel greedy_model_target_unconstrained(const TabularConfMdp& mdp, const ModelSpace& space,
                                                  std::span<const double> v) {
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    if (v.size() != S) throw StructuralError("greedy_model_target: V table has the wrong size");
    TransitionModel out(S, A);
    // U(s,a,s') = R(s,a) + gamma V(s'), so the argmax over s' only depends on V.
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t base = (s * A + a) * S;
            std::size_t best = S;
            for (std::size_t t = 0; t < S; ++t) {
                if (space.support && (*space.support)[base + t] == 0) continue;
                if (best == S || v[t] > v[best]) best = t;
            }
            if (best == S) {
                throw StructuralError("pair (" + std::to_string(s) + "," + std::to_string(a) +
                                      ") has an empty model support");
            }
            out(s, a, best) = 1.0;
        }
    }
    return out;
}

std::size_t greedy_model_target_parametric(const TabularConfMdp& mdp, const PairEvaluation& current,
                                           const ModelSpace& space) {
    if (space.vertices.empty()) throw StructuralError("greedy_model_target_parametric: no vertices");
    const auto adv = vertex_advantages(mdp, current, space.vertices);
    return static_cast<std::size_t>(std::max_element(adv.begin(), adv.end()) - adv.begin());
}

std::size_t greedy_policy_target_parametric(const TabularConfMdp& mdp, const PairEvaluation& current,
                                            const PolicySpace& space) {
    if (space.vertices.empty()) throw StructuralError("greedy_policy_target_parametric: no vertices");
    const auto adv = vertex_policy_advantages(mdp, current, space.vertices);
    return static_cast<std::size_t>(std::max_element(adv.begin(), adv.end()) - adv.begin());
}

StepResult spmi_step(const Problem& problem, SolverState& state, Strategy strategy, double epsilon,
                     TargetChoice& choice) {
    const TabularConfMdp& mdp = problem.mdp;
    const double gamma = mdp.gamma;
    const double tol = std::max(epsilon, kAdvantageFloor);
    const bool policy_side = updates_policy(strategy);
    const bool model_side = updates_model(strategy);
    const CandidateSet filter = filter_of(strategy);

    const PairEvaluation ev = evaluate(mdp, state.p, state.pi);
    const double dq = delta_q(mdp, ev.q);

    // Greedy targets. A side the strategy never moves keeps the current table as
    // its target so that its dissimilarities vanish.
    Policy pi_greedy = state.pi;
    std::optional<std::size_t> pi_vertex;
    if (policy_side) {
        if (problem.policy_space.parametric()) {
            pi_vertex = greedy_policy_target_parametric(mdp, ev, problem.policy_space);
            pi_greedy = problem.policy_space.vertices[*pi_vertex];
        } else {
            pi_greedy = greedy_policy_target(mdp, problem.policy_space, ev.q);
        }
    }
    TransitionModel p_greedy = state.p;
    std::optional<std::size_t> p_vertex;
    if (model_side) {
        if (problem.model_space.parametric()) {
            p_vertex = greedy_model_target_parametric(mdp, ev, problem.model_space);
            p_greedy = problem.model_space.vertices[*p_vertex];
        } else {
            p_greedy = greedy_model_target_unconstrained(mdp, problem.model_space, ev.v);
        }
    }

    auto terms_for = [&](const Policy& pt, const TransitionModel& mt) {
        BoundTerms t;
        t.adv_policy = policy_side ? expected_policy_advantage(mdp, ev, pt) : 0.0;
        t.adv_model = model_side ? expected_model_advantage(mdp, ev, mt) : 0.0;
        t.delta_q = dq;
        t.dissim = dissimilarities(mdp, ev, state.p, state.pi, mt, pt);
        return t;
    };
    auto select = [&](const BoundTerms& t, CandidateSet set) {
        if (strategy == Strategy::SPMI_SUP) {
            BoundTerms sup = optimal_coefficients(with_sup_dissimilarities(t), gamma, set);
            sup.dissim = t.dissim;
            return sup;
        }
        return optimal_coefficients(t, gamma, set);
    };

    const double greedy_adv_policy = policy_side ? expected_policy_advantage(mdp, ev, pi_greedy) : 0.0;
    const double greedy_adv_model = model_side ? expected_model_advantage(mdp, ev, p_greedy) : 0.0;

    // Persistent choice, policy side first (against the greedy model), then the
    // model side against the chosen policy.
    const Policy* pi_bar = &pi_greedy;
    const TransitionModel* p_bar = &p_greedy;
    std::optional<std::size_t> pi_bar_vertex = pi_vertex, p_bar_vertex = p_vertex;
    if (choice.mode == TargetMode::Persistent) {
        if (policy_side) {
            pi_bar = &persistent_target<Policy>(pi_greedy, choice.previous_policy_target, [&](const Policy& pt) {
                return select(terms_for(pt, p_greedy), filter).chosen.value;
            });
            if (pi_bar != &pi_greedy) pi_bar_vertex = choice.previous_policy_vertex;
        }
        if (model_side) {
            const Policy& pt = *pi_bar;
            p_bar = &persistent_target<TransitionModel>(
                p_greedy, choice.previous_model_target,
                [&](const TransitionModel& mt) { return select(terms_for(pt, mt), filter).chosen.value; });
            if (p_bar != &p_greedy) p_bar_vertex = choice.previous_model_vertex;
        }
    }

    BoundTerms terms = terms_for(*pi_bar, *p_bar);
    BoundTerms selected;
    if (strategy == Strategy::SPMI_ALT) {
        const CandidateSet first = state.alt_policy_next ? CandidateSet::PolicyOnly : CandidateSet::ModelOnly;
        const CandidateSet second = state.alt_policy_next ? CandidateSet::ModelOnly : CandidateSet::PolicyOnly;
        selected = select(terms, first);
        if (!(selected.chosen.value > 0.0)) selected = select(terms, second);
    } else {
        selected = select(terms, filter);
    }

    // Target identifiers: vertex index in hull spaces, otherwise a counter of
    // target changes.
    if (!state.last_policy_target || !(*state.last_policy_target == *pi_bar)) {
        if (state.last_policy_target) ++state.policy_target_changes;
        state.last_policy_target = *pi_bar;
    }
    if (!state.last_model_target || !(*state.last_model_target == *p_bar)) {
        if (state.last_model_target) ++state.model_target_changes;
        state.last_model_target = *p_bar;
    }

    StepResult out;
    IterationRecord& rec = out.record;
    rec.j = ev.j;
    rec.adv_policy = terms.adv_policy;
    rec.adv_model = terms.adv_model;
    rec.d_e_pi = terms.dissim.d_e_pi;
    rec.d_inf_pi = terms.dissim.d_inf_pi;
    rec.d_e_p = terms.dissim.d_e_p;
    rec.d_inf_p = terms.dissim.d_inf_p;
    rec.omega = state.omega;
    rec.target_policy_id = pi_bar_vertex ? *pi_bar_vertex : state.policy_target_changes;
    rec.target_model_id = p_bar_vertex ? *p_bar_vertex : state.model_target_changes;

    const bool converged = (!policy_side || greedy_adv_policy <= tol) && (!model_side || greedy_adv_model <= tol);
    if (converged) {
        out.stop = Termination::Converged;
        return out;
    }
    if (!(selected.chosen.value > 0.0)) {
        out.stop = Termination::NoPositiveBound;
        return out;
    }

    rec.alpha = selected.chosen.alpha;
    rec.beta = selected.chosen.beta;
    rec.bound_value = selected.chosen.value;

    if (choice.mode == TargetMode::Persistent) {
        if (policy_side) {
            choice.previous_policy_target = *pi_bar;
            choice.previous_policy_vertex = pi_bar_vertex;
        }
        if (model_side) {
            choice.previous_model_target = *p_bar;
            choice.previous_model_vertex = p_bar_vertex;
        }
    }

    if (rec.alpha > 0.0) {
        numvec next(state.pi.pi.size());
        kernels::parallel::mix(rec.alpha, pi_bar->pi, state.pi.pi, next);
        state.pi.pi = std::move(next);
    }
    if (rec.beta > 0.0) {
        if (state.omega) {
            numvec& w = *state.omega;
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = (1.0 - rec.beta) * w[i] + (i == *p_bar_vertex ? rec.beta : 0.0);
            }
            state.p = problem.model_space.mix(w);
        } else {
            numvec next(state.p.p.size());
            kernels::parallel::mix(rec.beta, p_bar->p, state.p.p, next);
            state.p.p = std::move(next);
        }
    }
    if (strategy == Strategy::SPMI_ALT) state.alt_policy_next = !(rec.alpha > 0.0);
    return out;
}

RunResult run(const Problem& problem, const StrategyConfig& config) {
    return run(problem, config, initial_state(problem));
}

RunResult run(const Problem& problem, const StrategyConfig& config, SolverState start) {
    if (!(problem.mdp.gamma < 1.0)) {
        throw StructuralError("the safe update bounds require gamma < 1");
    }
    std::vector<Strategy> phases{config.strategy};
    if (config.strategy == Strategy::SPI_THEN_SMI) phases = {Strategy::SPI, Strategy::SMI};
    if (config.strategy == Strategy::SMI_THEN_SPI) phases = {Strategy::SMI, Strategy::SPI};

    RunResult result;
    result.final_state = std::move(start);
    result.reason = Termination::MaxIterations;
    bool finished = false;
    for (std::size_t k = 0; k < phases.size() && !finished; ++k) {
        const bool last = k + 1 == phases.size();
        TargetChoice choice;
        choice.mode = config.target_mode;
        while (true) {
            if (result.records.size() >= config.max_iterations) {
                result.reason = Termination::MaxIterations;
                finished = true;
                break;
            }
            StepResult step;
            try {
                step = spmi_step(problem, result.final_state, phases[k], config.epsilon, choice);
            } catch (const std::exception& e) {
                throw SolverError("iteration " + std::to_string(result.records.size()) + ": " + e.what());
            }
            step.record.iteration = result.records.size();
            if (step.stop) {
                if (last) {
                    result.records.push_back(std::move(step.record));
                    result.reason = *step.stop;
                    finished = true;
                }
                break;
            }
            result.records.push_back(std::move(step.record));
        }
    }
    result.final_j = evaluate(problem.mdp, result.final_state.p, result.final_state.pi).j;
    return result;
}

} // namespace confmdp
