#include "confmdp/kernels.hpp"

namespace confmdp::kernels::serial {

void state_kernel(Dims d, cspan p, cspan pi, mspan k) {
    const std::size_t S = d.states, A = d.actions;
    for (std::size_t s = 0; s < S; ++s) {
        double* krow = k.data() + s * S;
        for (std::size_t j = 0; j < S; ++j) krow[j] = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            const double w = pi[s * A + a];
            if (w == 0.0) continue;
            const double* prow = p.data() + (s * A + a) * S;
            for (std::size_t j = 0; j < S; ++j) krow[j] += w * prow[j];
        }
    }
}

void policy_reward(Dims d, cspan pi, cspan reward, mspan r_pi) {
    const std::size_t S = d.states, A = d.actions;
    for (std::size_t s = 0; s < S; ++s) {
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) acc += pi[s * A + a] * reward[s * A + a];
        r_pi[s] = acc;
    }
}

void q_backup(Dims d, cspan p, cspan reward, cspan v, double gamma, mspan q) {
    const std::size_t S = d.states, A = d.actions;
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double* prow = p.data() + (s * A + a) * S;
            double acc = 0.0;
            for (std::size_t j = 0; j < S; ++j) acc += prow[j] * v[j];
            q[s * A + a] = reward[s * A + a] + gamma * acc;
        }
    }
}

void policy_relative(Dims d, cspan pi_target, cspan q, cspan v, mspan rel) {
    const std::size_t S = d.states, A = d.actions;
    for (std::size_t s = 0; s < S; ++s) {
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) acc += pi_target[s * A + a] * (q[s * A + a] - v[s]);
        rel[s] = acc;
    }
}

void model_relative(Dims d, cspan p_target, cspan reward, cspan q, cspan v, double gamma,
                    mspan rel) {
    const std::size_t S = d.states, A = d.actions;
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double* prow = p_target.data() + (s * A + a) * S;
            double acc = 0.0;
            for (std::size_t j = 0; j < S; ++j) acc += prow[j] * v[j];
            rel[s * A + a] = reward[s * A + a] + gamma * acc - q[s * A + a];
        }
    }
}

void row_l1(std::size_t rows, std::size_t width, cspan x, cspan y, mspan out) {
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            const double diff = x[i * width + j] - y[i * width + j];
            acc += diff < 0.0 ? -diff : diff;
        }
        out[i] = acc;
    }
}

void mix(double w, cspan x, cspan y, mspan out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * x[i] + (1.0 - w) * y[i];
}

void combine(cspan weights, std::span<const cspan> tables, mspan out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < tables.size(); ++m) acc += weights[m] * tables[m][i];
        out[i] = acc;
    }
}

} // namespace confmdp::kernels::serial
