#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confmdp/envs.hpp"
#include "oracles.hpp"

using namespace confmdp;

namespace {

double row_sum_error(const Policy& pi) {
    double worst = 0.0;
    for (std::size_t s = 0; s < pi.n_states; ++s) {
        double sum = 0.0;
        for (double x : pi.row(s)) sum += x;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

Problem one_state_problem() {
    Problem prob;
    prob.mdp.n_states = 1;
    prob.mdp.n_actions = 2;
    prob.mdp.reward = {1.0, 0.0};
    prob.mdp.gamma = 0.9;
    prob.mdp.mu = {1.0};
    prob.initial_model = TransitionModel(1, 2);
    prob.initial_model(0, 0, 0) = prob.initial_model(0, 1, 0) = 1.0;
    const std::vector<std::size_t> best{0};
    prob.initial_policy = Policy::deterministic(1, 2, best);
    return prob;
}

} // namespace

TEST_CASE("greedy policy target") {
    TabularConfMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    const numvec q{0.2, 0.7, 0.5, 0.5};
    const Policy g = greedy_policy_target(mdp, {}, q);
    CHECK(g(0, 1) == 1.0);
    CHECK(g(1, 0) == 1.0); // lowest index on ties

    PolicySpace masked;
    masked.support_mask = maskvec{1, 0, 1, 1};
    CHECK(greedy_policy_target(mdp, masked, q)(0, 0) == 1.0);
    masked.support_mask = maskvec{0, 0, 1, 1};
    CHECK_THROWS_AS(greedy_policy_target(mdp, masked, q), StructuralError);

    mdp.n_actions = 1;
    const numvec q1{3.0, -1.0};
    const Policy only = greedy_policy_target(mdp, {}, q1);
    CHECK(only(0, 0) == 1.0);
    CHECK(only(1, 0) == 1.0);
}

TEST_CASE("greedy targets beat random alternatives") {
    std::mt19937_64 rng(3);
    const Problem prob = build_random({17, 6, 3, 0.7, 0, 0.9, true});
    const PairEvaluation ev = evaluate(prob.mdp, prob.initial_model, prob.initial_policy);
    const double gp = expected_policy_advantage(prob.mdp, ev, greedy_policy_target(prob.mdp, {}, ev.q));
    const double gm =
        expected_model_advantage(prob.mdp, ev, greedy_model_target_unconstrained(prob.mdp, {}, ev.v));
    for (int k = 0; k < 100; ++k) {
        CHECK(gp >= expected_policy_advantage(prob.mdp, ev, random_policy(rng, 6, 3, 0.5)) - 1e-15);
        CHECK(gm >= expected_model_advantage(prob.mdp, ev, random_model(rng, 6, 3, 0.5)) - 1e-15);
    }
}

TEST_CASE("greedy unconstrained model target") {
    TabularConfMdp mdp;
    mdp.n_states = 3;
    mdp.n_actions = 1;
    const numvec v{0.1, 0.9, 0.3};
    const TransitionModel g = greedy_model_target_unconstrained(mdp, {}, v);
    for (std::size_t s = 0; s < 3; ++s) CHECK(g(s, 0, 1) == 1.0);

    ModelSpace restricted;
    restricted.support = maskvec(9, 1);
    (*restricted.support)[1] = 0; // (0, 0) cannot reach state 1
    CHECK(greedy_model_target_unconstrained(mdp, restricted, v)(0, 0, 2) == 1.0);

    mdp.n_states = 1;
    const numvec v1{4.0};
    CHECK(greedy_model_target_unconstrained(mdp, {}, v1)(0, 0, 0) == 1.0);
}

TEST_CASE("greedy parametric model target") {
    const Problem tc = build_two_chain({0.1, 0.9, 0.0});
    const PairEvaluation ev = evaluate(tc.mdp, tc.model_space.mix(*tc.initial_omega), tc.initial_policy);
    CHECK(greedy_model_target_parametric(tc.mdp, ev, tc.model_space) == 0);

    ModelSpace single;
    single.vertices = {tc.model_space.vertices[1]};
    CHECK(greedy_model_target_parametric(tc.mdp, ev, single) == 0);
    CHECK_THROWS_AS(greedy_model_target_parametric(tc.mdp, ev, ModelSpace{}), StructuralError);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Problem prob = build_random({seed, 5, 2, 0.8, 3, 0.9, true});
        const PairEvaluation e = evaluate(prob.mdp, prob.model_space.mix(*prob.initial_omega), prob.initial_policy);
        std::size_t best = 0;
        double best_adv = -1e300;
        for (std::size_t i = 0; i < 3; ++i) {
            const double a = expected_model_advantage(prob.mdp, e, prob.model_space.vertices[i]);
            if (a > best_adv) {
                best_adv = a;
                best = i;
            }
        }
        CHECK(greedy_model_target_parametric(prob.mdp, e, prob.model_space) == best);
    }
}

TEST_CASE("persistent target") {
    const std::function<double(const int&)> bound = [](const int& x) { return x == 7 ? 2.0 : 1.0; };
    const int greedy = 3;
    CHECK(&persistent_target<int>(greedy, std::nullopt, bound) == &greedy);
    const std::optional<int> same = 3;
    CHECK(persistent_target<int>(greedy, same, bound) == 3);
    const std::optional<int> better = 7;
    CHECK(persistent_target<int>(greedy, better, bound) == 7);
    const std::optional<int> equal = 5; // equal bounds: the greedy target wins
    CHECK(persistent_target<int>(greedy, equal, bound) == 3);
}

TEST_CASE("persistent choice keeps a previous policy target with a larger bound") {
    // Two self-looping states. The greedy target switches state 1 to action 1,
    // which is better by only 1e-3 but far from the current policy there; the
    // previous target (action 0 everywhere) is almost as good and much closer.
    Problem prob = one_state_problem();
    prob.mdp.n_states = 2;
    prob.mdp.reward = {1.0, 0.0, 0.5, 0.5 + 1e-3};
    prob.mdp.mu = {0.5, 0.5};
    prob.initial_model = TransitionModel(2, 2);
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t a = 0; a < 2; ++a) prob.initial_model(s, a, s) = 1.0;
    prob.initial_policy = Policy(2, 2);
    prob.initial_policy.pi = {0.5, 0.5, 0.99, 0.01};

    const std::vector<std::size_t> prev{0, 0};
    const Policy previous = Policy::deterministic(2, 2, prev);
    const PairEvaluation ev = evaluate(prob.mdp, prob.initial_model, prob.initial_policy);
    const Policy greedy = greedy_policy_target(prob.mdp, {}, ev.q);
    REQUIRE(greedy(1, 1) == 1.0);
    CHECK(expected_policy_advantage(prob.mdp, ev, greedy) > expected_policy_advantage(prob.mdp, ev, previous));

    SolverState state = initial_state(prob);
    TargetChoice choice;
    choice.previous_policy_target = previous;
    const StepResult step = spmi_step(prob, state, Strategy::SPI, 0.0, choice);
    REQUIRE(!step.stop);
    CHECK(*choice.previous_policy_target == previous);

    TargetChoice greedy_choice;
    greedy_choice.mode = TargetMode::Greedy;
    greedy_choice.previous_policy_target = previous;
    SolverState fresh = initial_state(prob);
    spmi_step(prob, fresh, Strategy::SPI, 0.0, greedy_choice);
    CHECK(fresh.pi(1, 1) > prob.initial_policy(1, 1));
}

TEST_CASE("already optimal one-state pair stops at iteration 0") {
    const Problem prob = one_state_problem();
    for (Strategy s : {Strategy::SPMI, Strategy::SPI, Strategy::SMI}) {
        StrategyConfig cfg;
        cfg.strategy = s;
        const RunResult r = run(prob, cfg);
        REQUIRE(r.records.size() == 1);
        CHECK(r.converged());
        CHECK(r.records[0].alpha == 0.0);
        CHECK(r.records[0].beta == 0.0);
        CHECK(r.final_j == doctest::Approx(10.0));
    }
}

TEST_CASE("single-vertex model space chooses a policy-only step") {
    Problem prob = build_random({9, 5, 3, 0.8, 1, 0.9, true});
    SolverState state = initial_state(prob);
    TargetChoice choice;
    const StepResult step = spmi_step(prob, state, Strategy::SPMI, 0.0, choice);
    CHECK(!step.stop);
    CHECK(step.record.beta == 0.0);
    CHECK(step.record.alpha > 0.0);
}

TEST_CASE("every step respects its bound on random instances") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const Problem prob = build_random({seed, 6, 3, 0.7, seed % 2 ? 0u : 3u, 0.9, true});
        for (Strategy s : {Strategy::SPMI, Strategy::SPMI_SUP, Strategy::SPMI_ALT, Strategy::SPI, Strategy::SMI,
                           Strategy::SPI_THEN_SMI, Strategy::SMI_THEN_SPI}) {
            StrategyConfig cfg;
            cfg.strategy = s;
            cfg.max_iterations = 150;
            const RunResult r = run(prob, cfg);
            for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
                const double gain = r.records[i + 1].j - r.records[i].j;
                CHECK(gain >= r.records[i].bound_value - 1e-9);
                CHECK(gain >= -1e-12);
            }
            // Truncated runs end on an applied step.
            if (!r.truncated()) {
                CHECK(r.records.back().alpha == 0.0);
                CHECK(r.records.back().beta == 0.0);
            }
        }
    }
}

TEST_CASE("one step evaluated independently") {
    const Problem prob = build_random({23, 5, 2, 0.9, 0, 0.9, true});
    SolverState state = initial_state(prob);
    TargetChoice choice;
    const double before = oracle::expected_return(prob.mdp, state.p, state.pi);
    const StepResult step = spmi_step(prob, state, Strategy::SPMI, 0.0, choice);
    REQUIRE(!step.stop);
    const double after = oracle::expected_return(prob.mdp, state.p, state.pi);
    CHECK(after - before >= step.record.bound_value - 1e-9);
    CHECK(step.record.bound_value > 0.0);
}

TEST_CASE("SPI leaves the model and SMI the policy bitwise unchanged") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Problem prob = build_random({seed, 6, 3, 0.7, 0, 0.9, true});
        StrategyConfig cfg;
        cfg.max_iterations = 100;
        cfg.strategy = Strategy::SPI;
        const RunResult spi = run(prob, cfg);
        CHECK(spi.final_state.p == prob.initial_model);
        for (const auto& rec : spi.records) CHECK(rec.beta == 0.0);
        cfg.strategy = Strategy::SMI;
        const RunResult smi = run(prob, cfg);
        CHECK(smi.final_state.pi == prob.initial_policy);
        for (const auto& rec : smi.records) CHECK(rec.alpha == 0.0);
    }
}

TEST_CASE("updates stay stochastic and omega stays on the simplex") {
    const Problem prob = build_random({31, 6, 3, 0.7, 4, 0.9, true});
    SolverState state = initial_state(prob);
    TargetChoice choice;
    for (int i = 0; i < 200; ++i) {
        const StepResult step = spmi_step(prob, state, Strategy::SPMI, 0.0, choice);
        CHECK(row_sum_error(state.pi) <= 1e-12);
        CHECK(oracle::max_row_error(state.p) <= 1e-12);
        double sum = 0.0;
        for (double w : *state.omega) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        if (step.stop) break;
    }
}

TEST_CASE("alternating strategy switches sides") {
    const Problem prob = build_random({41, 6, 3, 0.7, 0, 0.9, true});
    StrategyConfig cfg;
    cfg.strategy = Strategy::SPMI_ALT;
    cfg.max_iterations = 300;
    const RunResult r = run(prob, cfg);
    REQUIRE(r.records.size() > 4);
    CHECK(r.records[0].alpha > 0.0);
    for (const auto& rec : r.records) CHECK(!(rec.alpha > 0.0 && rec.beta > 0.0));
    for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
        const auto& a = r.records[i];
        const auto& b = r.records[i + 1];
        // Two consecutive steps on the same side only when the other side had
        // nothing positive to offer.
        if (a.alpha > 0.0 && b.alpha > 0.0) CHECK(b.adv_model <= 1e-12);
        if (a.beta > 0.0 && b.beta > 0.0) CHECK(b.adv_policy <= 1e-12);
    }
}

TEST_CASE("phased strategies run the first side to exhaustion") {
    const Problem prob = build_random({51, 6, 3, 0.7, 0, 0.9, true});
    StrategyConfig cfg;
    cfg.strategy = Strategy::SPI_THEN_SMI;
    cfg.max_iterations = 2000;
    const RunResult r = run(prob, cfg);
    bool model_phase = false;
    for (const auto& rec : r.records) {
        if (rec.beta > 0.0) model_phase = true;
        if (model_phase) CHECK(rec.alpha == 0.0);
    }
    CHECK(model_phase);
    for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].iteration == i);
}

TEST_CASE("two-chain model iteration reaches the mixed optimum") {
    const Problem prob = build_two_chain({0.1, 0.9, 0.0});
    StrategyConfig cfg;
    cfg.strategy = Strategy::SMI;
    const RunResult r = run(prob, cfg);
    CHECK(r.converged());
    CHECK(std::abs(r.final_j - 0.2025) <= 1e-6);
    const auto adv = vertex_advantages(prob.mdp, r.final_state.p, r.final_state.pi, prob.model_space.vertices);
    const double scale = 1.0 / (1.0 - 0.9);
    CHECK(scale * adv[0] <= 1e-8);
    CHECK(scale * adv[1] <= 1e-8);
}

TEST_CASE("truncation and failures") {
    const Problem prob = build_random({61, 6, 3, 0.7, 0, 0.9, true});
    StrategyConfig cfg;
    cfg.max_iterations = 3;
    const RunResult r = run(prob, cfg);
    CHECK(r.truncated());
    CHECK(r.records.size() == 3);

    Problem bad = prob;
    bad.policy_space.support_mask = maskvec(18, 1);
    for (std::size_t a = 0; a < 3; ++a) (*bad.policy_space.support_mask)[a] = 0;
    try {
        run(bad, StrategyConfig{});
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).rfind("iteration 0:", 0) == 0);
    }

    Problem episodic = prob;
    episodic.mdp.gamma = 1.0;
    CHECK_THROWS_AS(run(episodic, StrategyConfig{}), StructuralError);
}

TEST_CASE("strategy names round-trip") {
    for (Strategy s : {Strategy::SPMI, Strategy::SPMI_SUP, Strategy::SPMI_ALT, Strategy::SPI, Strategy::SMI,
                       Strategy::SPI_THEN_SMI, Strategy::SMI_THEN_SPI}) {
        std::string name = to_string(s);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
            return c == '-' || c == '+' ? '_' : static_cast<char>(std::tolower(c));
        });
        CHECK(parse_strategy(name) == s);
    }
    CHECK(parse_target_mode("greedy") == TargetMode::Greedy);
    CHECK_THROWS(parse_strategy("cpi"));
}
