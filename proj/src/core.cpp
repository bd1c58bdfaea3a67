#include "confmdp/core.hpp"

#include "confmdp/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>

namespace confmdp {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kFixedPointResidual = 1e-12;
constexpr std::size_t kFixedPointCap = 1000000;

struct Solution {
    numvec v;
    numvec d;
    double scale;
};

Solution solve_dense(const StateKernel& k, std::span<const double> r_pi, std::span<const double> mu,
                     double gamma) {
    const auto n = static_cast<Eigen::Index>(k.n_states);
    Eigen::Map<const RowMatrix> kernel(k.k.data(), n, n);
    const RowMatrix system = RowMatrix::Identity(n, n) - gamma * kernel;
    const Eigen::PartialPivLU<RowMatrix> lu(system);

    Eigen::Map<const Eigen::VectorXd> r(r_pi.data(), n);
    const Eigen::VectorXd mu_scaled = (1.0 - gamma) * Eigen::Map<const Eigen::VectorXd>(mu.data(), n);
    const Eigen::VectorXd v = lu.solve(r);
    const Eigen::VectorXd d = lu.transpose().solve(mu_scaled);
    return {numvec(v.data(), v.data() + n), numvec(d.data(), d.data() + n), 1.0 / (1.0 - gamma)};
}

Solution solve_iterative(const StateKernel& k, std::span<const double> r_pi,
                         std::span<const double> mu, double gamma) {
    const std::size_t n = k.n_states;
    numvec v(n, 0.0), d(mu.begin(), mu.end()), next(n);
    for (std::size_t it = 0;; ++it) {
        if (it == kFixedPointCap) throw EvaluationError("fixed-point value evaluation did not converge");
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += k(s, j) * v[j];
            next[s] = r_pi[s] + gamma * acc;
            residual = std::max(residual, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (residual <= kFixedPointResidual) break;
    }
    for (std::size_t it = 0;; ++it) {
        if (it == kFixedPointCap) throw EvaluationError("fixed-point occupancy did not converge");
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t j = 0; j < n; ++j) next[j] += d[s] * k(s, j);
        }
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            next[s] = (1.0 - gamma) * mu[s] + gamma * next[s];
            residual = std::max(residual, std::abs(next[s] - d[s]));
        }
        d.swap(next);
        if (residual <= kFixedPointResidual) break;
    }
    return {std::move(v), std::move(d), 1.0 / (1.0 - gamma)};
}

// gamma == 1: restrict to transient states, which must all drain into an
// absorbing zero-reward state.
Solution solve_episodic(const StateKernel& k, std::span<const double> r_pi, std::span<const double> mu) {
    const std::size_t n = k.n_states;
    std::vector<bool> absorbing(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        absorbing[s] = k(s, s) >= 1.0 - kStochasticTol && r_pi[s] == 0.0;
    }
    // Backward reachability from absorbing states.
    std::vector<bool> drains(absorbing);
    std::deque<std::size_t> frontier;
    for (std::size_t s = 0; s < n; ++s) {
        if (absorbing[s]) frontier.push_back(s);
    }
    while (!frontier.empty()) {
        const std::size_t t = frontier.front();
        frontier.pop_front();
        for (std::size_t s = 0; s < n; ++s) {
            if (!drains[s] && k(s, t) > 0.0) {
                drains[s] = true;
                frontier.push_back(s);
            }
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (!drains[s]) {
            throw EvaluationError("gamma = 1 but state " + std::to_string(s) +
                                  " never reaches an absorbing state");
        }
    }

    std::vector<std::size_t> transient;
    for (std::size_t s = 0; s < n; ++s) {
        if (!absorbing[s]) transient.push_back(s);
    }
    const auto m = static_cast<Eigen::Index>(transient.size());
    numvec v(n, 0.0), d(n, 0.0);
    if (m == 0) return {v, numvec(mu.begin(), mu.end()), 0.0};

    RowMatrix system(m, m);
    Eigen::VectorXd r(m), mu_t(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            system(i, j) = (i == j ? 1.0 : 0.0) - k(transient[i], transient[j]);
        }
        r(i) = r_pi[transient[i]];
        mu_t(i) = mu[transient[i]];
    }
    const Eigen::PartialPivLU<RowMatrix> lu(system);
    const Eigen::VectorXd vt = lu.solve(r);
    const Eigen::VectorXd visits = lu.transpose().solve(mu_t);
    const double length = visits.sum();
    for (Eigen::Index i = 0; i < m; ++i) {
        v[transient[i]] = vt(i);
        d[transient[i]] = length > 0.0 ? visits(i) / length : 0.0;
    }
    if (length <= 0.0) return {v, numvec(mu.begin(), mu.end()), 0.0};
    return {std::move(v), std::move(d), length};
}

} // namespace

void check_shapes(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi) {
    if (p.n_states != mdp.n_states || p.n_actions != mdp.n_actions ||
        p.p.size() != mdp.n_states * mdp.n_actions * mdp.n_states) {
        throw StructuralError("transition model shape does not match the MDP");
    }
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions ||
        pi.pi.size() != mdp.n_states * mdp.n_actions) {
        throw StructuralError("policy shape does not match the MDP");
    }
}

StateKernel state_kernel(const TransitionModel& p, const Policy& pi) {
    if (p.n_states != pi.n_states || p.n_actions != pi.n_actions) {
        throw StructuralError("state_kernel: model and policy shapes differ");
    }
    StateKernel k{p.n_states, numvec(p.n_states * p.n_states)};
    kernels::parallel::state_kernel({p.n_states, p.n_actions}, p.p, pi.pi, k.k);
    return k;
}

PairEvaluation evaluate(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi) {
    check_shapes(mdp, p, pi);
    const kernels::Dims dims{mdp.n_states, mdp.n_actions};
    PairEvaluation out;
    out.kernel = state_kernel(p, pi);
    out.r_pi.resize(mdp.n_states);
    kernels::parallel::policy_reward(dims, pi.pi, mdp.reward, out.r_pi);

    Solution sol;
    if (mdp.gamma >= 1.0) {
        sol = solve_episodic(out.kernel, out.r_pi, mdp.mu);
    } else if (mdp.n_states <= kDenseLimit) {
        sol = solve_dense(out.kernel, out.r_pi, mdp.mu, mdp.gamma);
    } else {
        sol = solve_iterative(out.kernel, out.r_pi, mdp.mu, mdp.gamma);
    }
    out.v = std::move(sol.v);
    out.occ.d_state = std::move(sol.d);
    out.occ.scale = sol.scale;

    out.occ.d_state_action.resize(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            out.occ.d_state_action[s * mdp.n_actions + a] = pi(s, a) * out.occ.d_state[s];
        }
    }

    out.q.resize(mdp.n_states * mdp.n_actions);
    kernels::parallel::q_backup(dims, p.p, mdp.reward, out.v, mdp.gamma, out.q);

    double expected_reward = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) expected_reward += out.occ.d_state[s] * out.r_pi[s];
    out.j = out.occ.scale * expected_reward;
    return out;
}

OccupancyMeasures occupancy(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi) {
    return evaluate(mdp, p, pi).occ;
}

ValueFunctions value_functions(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi) {
    PairEvaluation ev = evaluate(mdp, p, pi);
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    ValueFunctions out{std::move(ev.v), std::move(ev.q), numvec(S * A * S)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            double* urow = out.u.data() + (s * A + a) * S;
            for (std::size_t t = 0; t < S; ++t) urow[t] = mdp.r(s, a) + mdp.gamma * out.v[t];
        }
    }
    return out;
}

double expected_return(const TabularConfMdp& mdp, const TransitionModel& p, const Policy& pi) {
    return evaluate(mdp, p, pi).j;
}

double q_spread(std::span<const double> q) {
    if (q.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    return *hi - *lo;
}

double delta_q(const TabularConfMdp& mdp, std::span<const double> q) {
    return mdp.delta_q.is_constant() ? mdp.delta_q.value : q_spread(q);
}

} // namespace confmdp
