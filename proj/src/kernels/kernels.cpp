#include "tokgraft/kernels.hpp"

#include <cmath>

#include "tokgraft/errors.hpp"

namespace tokgraft::kern {

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define TOKGRAFT_X86 1
const Ops& avx2_ops();
#endif

#if defined(__ARM_NEON) || defined(__aarch64__)
#define TOKGRAFT_ARM 1
const Ops& neon_ops();
#endif

namespace {

Backend detect_backend() {
#if defined(TOKGRAFT_X86)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return Backend::avx2;
    }
#elif defined(TOKGRAFT_ARM)
    return Backend::neon;
#endif
    return Backend::scalar;
}

std::optional<Backend>& forced() {
    static std::optional<Backend> value;
    return value;
}

}  // namespace

const Ops* ops_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &scalar_ops();
        case Backend::avx2:
#if defined(TOKGRAFT_X86)
            if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
                return &avx2_ops();
            }
#endif
            return nullptr;
        case Backend::neon:
#if defined(TOKGRAFT_ARM)
            return &neon_ops();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

Backend active_backend() {
    if (forced()) {
        return *forced();
    }
    static const Backend detected = detect_backend();
    return detected;
}

const Ops& ops() {
    return *ops_for(active_backend());
}

void force_backend(std::optional<Backend> b) {
    if (b && ops_for(*b) == nullptr) {
        raise(Errc::invalid_argument,
              std::string("backend ") + backend_name(*b) + " not supported on this CPU");
    }
    forced() = b;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

void softmax(const float* logits, float* out, std::size_t n) {
    if (n == 0) {
        return;
    }
    float max_logit = logits[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (logits[i] > max_logit) {
            max_logit = logits[i];
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(static_cast<double>(logits[i]) - max_logit);
        out[i] = static_cast<float>(e);
        sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(out[i] * inv);
    }
}

}  // namespace tokgraft::kern
