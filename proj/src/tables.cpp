#include "confmdp/tables.hpp"

#include "confmdp/kernels.hpp"

#include <cmath>
#include <sstream>

namespace confmdp {

namespace {

void check_row(std::span<const double> row, const std::string& where) {
    double sum = 0.0;
    for (double x : row) {
        if (!(x >= 0.0) || x > 1.0 + kStochasticTol) {
            throw StructuralError(where + ": entry " + std::to_string(x) + " outside [0,1]");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os.precision(17);
        os << where << ": row sums to " << sum;
        throw StructuralError(os.str());
    }
}

} // namespace

double horizon_constant(double gamma, int horizon) {
    if (gamma == 1.0) return static_cast<double>(horizon);
    return (1.0 - std::pow(gamma, horizon)) / (1.0 - gamma);
}

void TabularConfMdp::validate() const {
    if (n_states == 0 || n_actions == 0) throw StructuralError("mdp: empty state or action set");
    if (reward.size() != n_states * n_actions) throw StructuralError("mdp: reward table has wrong shape");
    if (mu.size() != n_states) throw StructuralError("mdp: mu has wrong length");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw StructuralError("mdp: gamma must lie in (0,1]");
    for (double r : reward) {
        if (!(r >= 0.0 && r <= 1.0)) throw StructuralError("mdp: reward outside [0,1]");
    }
    check_row(mu, "mdp: mu");
    if (delta_q.is_constant() && !(delta_q.value >= 0.0)) throw StructuralError("mdp: negative delta_q");
}

Policy Policy::uniform(std::size_t states, std::size_t actions, std::optional<maskvec> mask) {
    Policy out(states, actions);
    if (mask && mask->size() != states * actions) throw StructuralError("policy: mask has wrong shape");
    for (std::size_t s = 0; s < states; ++s) {
        std::size_t allowed = 0;
        for (std::size_t a = 0; a < actions; ++a) allowed += (!mask || (*mask)[s * actions + a]) ? 1 : 0;
        if (allowed == 0) throw StructuralError("policy: state " + std::to_string(s) + " has empty support");
        for (std::size_t a = 0; a < actions; ++a) {
            if (!mask || (*mask)[s * actions + a]) out(s, a) = 1.0 / static_cast<double>(allowed);
        }
    }
    out.support_mask = std::move(mask);
    return out;
}

Policy Policy::deterministic(std::size_t states, std::size_t actions,
                             std::span<const std::size_t> choice) {
    if (choice.size() != states) throw StructuralError("policy: choice vector has wrong length");
    Policy out(states, actions);
    for (std::size_t s = 0; s < states; ++s) {
        if (choice[s] >= actions) throw StructuralError("policy: action index out of range");
        out(s, choice[s]) = 1.0;
    }
    return out;
}

void Policy::validate() const {
    if (pi.size() != n_states * n_actions) throw StructuralError("policy: table has wrong shape");
    for (std::size_t s = 0; s < n_states; ++s) {
        check_row(row(s), "policy: state " + std::to_string(s));
        if (support_mask) {
            for (std::size_t a = 0; a < n_actions; ++a) {
                if (!allowed(s, a) && (*this)(s, a) != 0.0) {
                    throw StructuralError("policy: mass outside support at state " + std::to_string(s));
                }
            }
        }
    }
}

void TransitionModel::validate() const {
    if (p.size() != n_states * n_actions * n_states) throw StructuralError("model: table has wrong shape");
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            check_row(row(s, a), "model: (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")");
        }
    }
}

TransitionModel ModelSpace::mix(std::span<const double> omega) const {
    if (omega.size() != vertices.size() || vertices.empty()) {
        throw StructuralError("model space: coefficient vector does not match vertex count");
    }
    TransitionModel out(vertices.front().n_states, vertices.front().n_actions);
    std::vector<kernels::cspan> tables;
    tables.reserve(vertices.size());
    for (const auto& v : vertices) tables.emplace_back(v.p);
    kernels::parallel::combine(omega, tables, out.p);
    return out;
}

double l1_distance(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
    return acc;
}

void check_simplex(std::span<const double> omega, const std::string& what) {
    double sum = 0.0;
    for (double w : omega) {
        if (!(w >= -kStochasticTol)) throw StructuralError(what + ": negative coefficient");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) throw StructuralError(what + ": coefficients do not sum to 1");
}

} // namespace confmdp
