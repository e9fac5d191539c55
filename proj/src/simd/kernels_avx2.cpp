// Built with -mavx2; only reached after a runtime CPU check.

#include "nafc/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace nafc::simd {

namespace {

void rbf_activations_avx2(const double* centers, std::size_t eta, std::size_t dim, const double* neg_half_inv_w2,
                          const double* input, double* phi) {
    std::size_t k = 0;
    alignas(32) double lanes[4];
    for (; k + 4 <= eta; k += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < dim; ++d) {
            const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(input[d]), _mm256_loadu_pd(centers + d * eta + k));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_store_pd(lanes, _mm256_mul_pd(acc, _mm256_loadu_pd(neg_half_inv_w2 + k)));
        // No vector exp in AVX2; libm per lane keeps results identical to scalar.
        for (int l = 0; l < 4; ++l) phi[k + l] = std::exp(lanes[l]);
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

void weight_rate_avx2(const double* phi, std::size_t eta, const double* s, const double* w, double pi, double kappa,
                      double* out) {
    const double leak = kappa * pi;
    const __m256d vpi = _mm256_set1_pd(pi);
    const __m256d vleak = _mm256_set1_pd(leak);
    const __m256d vs = _mm256_setr_pd(s[0], s[1], s[0], s[1]);
    std::size_t k = 0;
    for (; k + 2 <= eta; k += 2) {
        // (phi[k], phi[k], phi[k+1], phi[k+1])
        const __m256d vphi = _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(phi + k)), 0x50);
        const __m256d grow = _mm256_mul_pd(vpi, _mm256_mul_pd(vphi, vs));
        const __m256d decay = _mm256_mul_pd(vleak, _mm256_loadu_pd(w + 2 * k));
        _mm256_storeu_pd(out + 2 * k, _mm256_sub_pd(grow, decay));
    }
    for (; k < eta; ++k) {
        out[2 * k] = pi * (phi[k] * s[0]) - leak * w[2 * k];
        out[2 * k + 1] = pi * (phi[k] * s[1]) - leak * w[2 * k + 1];
    }
}

void axpy_avx2(std::size_t n, double a, const double* x, const double* y, double* out) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine_avx2(std::size_t n, double h, const double* y, const double* k1, const double* k2, const double* k3,
                      const double* k4, double* carry, double* out) {
    const double h6 = h / 6.0;
    const __m256d vh6 = _mm256_set1_pd(h6);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(k4 + i));
        const __m256d yi = _mm256_loadu_pd(y + i);
        const __m256d d = _mm256_sub_pd(_mm256_mul_pd(vh6, acc), _mm256_loadu_pd(carry + i));
        const __m256d t = _mm256_add_pd(yi, d);
        _mm256_storeu_pd(carry + i, _mm256_sub_pd(_mm256_sub_pd(t, yi), d));
        _mm256_storeu_pd(out + i, t);
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
const Kernels kAvx2{Backend::Avx2, "avx2", rbf_activations_avx2, weight_rate_avx2, axpy_avx2, rk4_combine_avx2};
}

}  // namespace nafc::simd
