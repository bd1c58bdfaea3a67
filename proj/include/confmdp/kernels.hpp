#pragma once

// Data-parallel inner loops shared by every solver path. `serial` is the
// reference implementation; `parallel` splits the outer state loop across
// OpenMP threads. Each output element is computed by exactly one thread with
// the same accumulation order as the serial loop, so both produce bitwise
// identical results. Reductions across states are left to the caller.

#include <cstddef>
#include <span>

namespace confmdp::kernels {

struct Dims {
    std::size_t states;
    std::size_t actions;
};

using cspan = std::span<const double>;
using mspan = std::span<double>;

#define CONFMDP_KERNEL_DECLS                                                              \
    /* k[s][s'] = sum_a pi[s][a] p[s][a][s'] */                                           \
    void state_kernel(Dims d, cspan p, cspan pi, mspan k);                                \
    /* r_pi[s] = sum_a pi[s][a] r[s][a] */                                                \
    void policy_reward(Dims d, cspan pi, cspan reward, mspan r_pi);                       \
    /* q[s][a] = r[s][a] + gamma sum_s' p[s][a][s'] v[s'] */                              \
    void q_backup(Dims d, cspan p, cspan reward, cspan v, double gamma, mspan q);         \
    /* rel[s] = sum_a pi_t[s][a] (q[s][a] - v[s]) */                                      \
    void policy_relative(Dims d, cspan pi_target, cspan q, cspan v, mspan rel);           \
    /* rel[s][a] = r[s][a] + gamma sum_s' p_t[s][a][s'] v[s'] - q[s][a] */                \
    void model_relative(Dims d, cspan p_target, cspan reward, cspan q, cspan v,           \
                        double gamma, mspan rel);                                         \
    /* out[i] = || x[i,:] - y[i,:] ||_1 */                                                \
    void row_l1(std::size_t rows, std::size_t width, cspan x, cspan y, mspan out);        \
    /* out = w x + (1 - w) y */                                                           \
    void mix(double w, cspan x, cspan y, mspan out);                                      \
    /* out = sum_i weights[i] tables[i] */                                                \
    void combine(cspan weights, std::span<const cspan> tables, mspan out);

namespace serial {
CONFMDP_KERNEL_DECLS
}

namespace parallel {
CONFMDP_KERNEL_DECLS
}

#undef CONFMDP_KERNEL_DECLS

} // namespace confmdp::kernels
