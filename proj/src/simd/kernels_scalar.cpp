#include "nafc/simd/kernels.hpp"

#include <cmath>

namespace nafc::simd {

namespace {

void rbf_activations_scalar(const double* centers, std::size_t eta, std::size_t dim, const double* neg_half_inv_w2,
                            const double* input, double* phi) {
    for (std::size_t k = 0; k < eta; ++k) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = input[d] - centers[d * eta + k];
            acc = acc + diff * diff;
        }
        phi[k] = std::exp(acc * neg_half_inv_w2[k]);
    }
}

void weight_rate_scalar(const double* phi, std::size_t eta, const double* s, const double* w, double pi, double kappa,
                        double* out) {
    const double leak = kappa * pi;
    for (std::size_t k = 0; k < eta; ++k) {
        out[2 * k] = pi * (phi[k] * s[0]) - leak * w[2 * k];
        out[2 * k + 1] = pi * (phi[k] * s[1]) - leak * w[2 * k + 1];
    }
}

void axpy_scalar(std::size_t n, double a, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine_scalar(std::size_t n, double h, const double* y, const double* k1, const double* k2, const double* k3,
                        const double* k4, double* carry, double* out) {
    const double h6 = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double yi = y[i];
        const double d = h6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]) - carry[i];
        const double t = yi + d;
        carry[i] = (t - yi) - d;
        out[i] = t;
    }
}

}  // namespace

namespace detail {
const Kernels kScalar{Backend::Scalar, "scalar", rbf_activations_scalar, weight_rate_scalar, axpy_scalar,
                      rk4_combine_scalar};
}

}  // namespace nafc::simd
