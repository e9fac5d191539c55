#include "nafc/simd/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace nafc::simd {

namespace {

void rbf_activations_neon(const double* centers, std::size_t eta, std::size_t dim, const double* neg_half_inv_w2,
                          const double* input, double* phi) {
    std::size_t k = 0;
    double lanes[2];
    for (; k + 2 <= eta; k += 2) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t d = 0; d < dim; ++d) {
            const float64x2_t diff = vsubq_f64(vdupq_n_f64(input[d]), vld1q_f64(centers + d * eta + k));
            acc = vaddq_f64(acc, vmulq_f64(diff, diff));
        }
        vst1q_f64(lanes, vmulq_f64(acc, vld1q_f64(neg_half_inv_w2 + k)));
        phi[k] = std::exp(lanes[0]);
        phi[k + 1] = std::exp(lanes[1]);
    }
    for (; k < eta; ++k) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = input[d] - centers[d * eta + k];
            acc = acc + diff * diff;
        }
        phi[k] = std::exp(acc * neg_half_inv_w2[k]);
    }
}

void weight_rate_neon(const double* phi, std::size_t eta, const double* s, const double* w, double pi, double kappa,
                      double* out) {
    const double leak = kappa * pi;
    const float64x2_t vpi = vdupq_n_f64(pi);
    const float64x2_t vleak = vdupq_n_f64(leak);
    const float64x2_t vs = vld1q_f64(s);
    for (std::size_t k = 0; k < eta; ++k) {
        const float64x2_t grow = vmulq_f64(vpi, vmulq_f64(vdupq_n_f64(phi[k]), vs));
        vst1q_f64(out + 2 * k, vsubq_f64(grow, vmulq_f64(vleak, vld1q_f64(w + 2 * k))));
    }
}

void axpy_neon(std::size_t n, double a, const double* x, const double* y, double* out) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    }
    for (; i < n; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine_neon(std::size_t n, double h, const double* y, const double* k1, const double* k2, const double* k3,
                      const double* k4, double* carry, double* out) {
    const double h6 = h / 6.0;
    const float64x2_t vh6 = vdupq_n_f64(h6);
    const float64x2_t two = vdupq_n_f64(2.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t acc = vaddq_f64(vld1q_f64(k1 + i), vmulq_f64(two, vld1q_f64(k2 + i)));
        acc = vaddq_f64(acc, vmulq_f64(two, vld1q_f64(k3 + i)));
        acc = vaddq_f64(acc, vld1q_f64(k4 + i));
        const float64x2_t yi = vld1q_f64(y + i);
        const float64x2_t d = vsubq_f64(vmulq_f64(vh6, acc), vld1q_f64(carry + i));
        const float64x2_t t = vaddq_f64(yi, d);
        vst1q_f64(carry + i, vsubq_f64(vsubq_f64(t, yi), d));
        vst1q_f64(out + i, t);
    }
    for (; i < n; ++i) {
        const double yi = y[i];
        const double d = h6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]) - carry[i];
        const double t = yi + d;
        carry[i] = (t - yi) - d;
        out[i] = t;
    }
}

}  // namespace

namespace detail {
const Kernels kNeon{Backend::Neon, "neon", rbf_activations_neon, weight_rate_neon, axpy_neon, rk4_combine_neon};
}

}  // namespace nafc::simd
