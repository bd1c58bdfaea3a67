#include "confmdp/kernels.hpp"

#include <cstdint>

namespace confmdp::kernels::parallel {

// Loops below parallelize over the outermost independent index only; the
// inner accumulation order matches serial.cpp exactly.

void state_kernel(Dims d, cspan p, cspan pi, mspan k) {
    const std::int64_t S = static_cast<std::int64_t>(d.states);
    const std::size_t A = d.actions;
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < S; ++si) {
        const std::size_t s = static_cast<std::size_t>(si);
        double* krow = k.data() + s * d.states;
        for (std::size_t j = 0; j < d.states; ++j) krow[j] = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            const double w = pi[s * A + a];
            if (w == 0.0) continue;
            const double* prow = p.data() + (s * A + a) * d.states;
            for (std::size_t j = 0; j < d.states; ++j) krow[j] += w * prow[j];
        }
    }
}

void policy_reward(Dims d, cspan pi, cspan reward, mspan r_pi) {
    const std::int64_t S = static_cast<std::int64_t>(d.states);
    const std::size_t A = d.actions;
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < S; ++si) {
        const std::size_t s = static_cast<std::size_t>(si);
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) acc += pi[s * A + a] * reward[s * A + a];
        r_pi[s] = acc;
    }
}

void q_backup(Dims d, cspan p, cspan reward, cspan v, double gamma, mspan q) {
    const std::int64_t S = static_cast<std::int64_t>(d.states);
    const std::size_t A = d.actions;
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < S; ++si) {
        const std::size_t s = static_cast<std::size_t>(si);
        for (std::size_t a = 0; a < A; ++a) {
            const double* prow = p.data() + (s * A + a) * d.states;
            double acc = 0.0;
            for (std::size_t j = 0; j < d.states; ++j) acc += prow[j] * v[j];
            q[s * A + a] = reward[s * A + a] + gamma * acc;
        }
    }
}

void policy_relative(Dims d, cspan pi_target, cspan q, cspan v, mspan rel) {
    const std::int64_t S = static_cast<std::int64_t>(d.states);
    const std::size_t A = d.actions;
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < S; ++si) {
        const std::size_t s = static_cast<std::size_t>(si);
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) acc += pi_target[s * A + a] * (q[s * A + a] - v[s]);
        rel[s] = acc;
    }
}

void model_relative(Dims d, cspan p_target, cspan reward, cspan q, cspan v, double gamma,
                    mspan rel) {
    const std::int64_t S = static_cast<std::int64_t>(d.states);
    const std::size_t A = d.actions;
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < S; ++si) {
        const std::size_t s = static_cast<std::size_t>(si);
        for (std::size_t a = 0; a < A; ++a) {
            const double* prow = p_target.data() + (s * A + a) * d.states;
            double acc = 0.0;
            for (std::size_t j = 0; j < d.states; ++j) acc += prow[j] * v[j];
            rel[s * A + a] = reward[s * A + a] + gamma * acc - q[s * A + a];
        }
    }
}

void row_l1(std::size_t rows, std::size_t width, cspan x, cspan y, mspan out) {
    const std::int64_t R = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < R; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            const double diff = x[i * width + j] - y[i * width + j];
            acc += diff < 0.0 ? -diff : diff;
        }
        out[i] = acc;
    }
}

void mix(double w, cspan x, cspan y, mspan out) {
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = w * x[i] + (1.0 - w) * y[i];
}

void combine(cspan weights, std::span<const cspan> tables, mspan out) {
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < tables.size(); ++m) acc += weights[m] * tables[m][i];
        out[i] = acc;
    }
}

} // namespace confmdp::kernels::parallel
