#include "nafc/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace nafc::simd {

namespace {

bool cpu_has(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Kernels* initial_selection() {
    if (const char* env = std::getenv("NAFC_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &detail::kScalar;
        if (want == "avx2" && kernels_for(Backend::Avx2)) return kernels_for(Backend::Avx2);
        if (want == "neon" && kernels_for(Backend::Neon)) return kernels_for(Backend::Neon);
    }
    if (const Kernels* k = kernels_for(Backend::Avx2)) return k;
    if (const Kernels* k = kernels_for(Backend::Neon)) return k;
    return &detail::kScalar;
}

std::atomic<const Kernels*>& selection() {
    static std::atomic<const Kernels*> current{initial_selection()};
    return current;
}

}  // namespace

const Kernels& scalar_kernels() { return detail::kScalar; }

const Kernels* kernels_for(Backend b) {
    if (!cpu_has(b)) return nullptr;
    switch (b) {
        case Backend::Scalar:
            return &detail::kScalar;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return &detail::kAvx2;
#else
            return nullptr;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return &detail::kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const Kernels& active_kernels() { return *selection().load(std::memory_order_acquire); }

bool select_backend(Backend b) {
    const Kernels* k = kernels_for(b);
    if (!k) return false;
    selection().store(k, std::memory_order_release);
    return true;
}

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return "scalar";
        case Backend::Avx2:
            return "avx2";
        case Backend::Neon:
            return "neon";
    }
    return "unknown";
}

}  // namespace nafc::simd
