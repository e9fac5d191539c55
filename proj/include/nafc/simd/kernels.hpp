#pragma once

// Data-parallel inner loops of the simulator.
//
// Every backend performs the same floating-point operations in the same order
// per output element (no FMA, no reassociation), so results are bit-identical
// across backends. The equivalence tests rely on that.

#include <cstddef>
#include <string_view>

namespace nafc::simd {

enum class Backend { Scalar, Avx2, Neon };

struct Kernels {
    Backend backend;
    const char* name;

    // phi[k] = exp(neg_half_inv_w2[k] * sum_d (input[d] - centers[d * eta + k])^2)
    // `centers` is dimension-major (structure of arrays), `dim` rows of `eta`.
    void (*rbf_activations)(const double* centers, std::size_t eta, std::size_t dim, const double* neg_half_inv_w2,
                            const double* input, double* phi);

    // out[2k + c] = pi * (phi[k] * s[c]) - (kappa * pi) * w[2k + c]
    // for an eta x 2 row-major weight matrix.
    void (*weight_rate)(const double* phi, std::size_t eta, const double* s, const double* w, double pi, double kappa,
                        double* out);

    // out[i] = y[i] + a * x[i]
    void (*axpy)(std::size_t n, double a, const double* x, const double* y, double* out);

    // d = (h / 6) * (((k1[i] + 2 k2[i]) + 2 k3[i]) + k4[i]) - carry[i]
    // out[i] = y[i] + d, carry[i] = (out[i] - y[i]) - d
    // Compensated (Kahan) update: carry holds the rounding lost in the
    // previous step's addition and is fed back into the next one.
    void (*rk4_combine)(std::size_t n, double h, const double* y, const double* k1, const double* k2, const double* k3,
                        const double* k4, double* carry, double* out);
};

const Kernels& scalar_kernels();

/// Backend table if it was compiled in and the CPU supports it, else nullptr.
const Kernels* kernels_for(Backend b);

/// Best available backend, unless NAFC_SIMD=scalar|avx2|neon overrides it.
const Kernels& active_kernels();

/// Forces a backend for the rest of the process. Returns false (and leaves the
/// selection unchanged) when that backend is unavailable.
bool select_backend(Backend b);

std::string_view backend_name(Backend b);

namespace detail {
extern const Kernels kScalar;
#if defined(__x86_64__) || defined(_M_X64)
extern const Kernels kAvx2;
#endif
#if defined(__aarch64__)
extern const Kernels kNeon;
#endif
}  // namespace detail

}  // namespace nafc::simd
