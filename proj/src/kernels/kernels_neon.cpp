#include "tokgraft/kernels.hpp"

#if defined(__ARM_NEON) || defined(__aarch64__)

#include <arm_neon.h>

namespace tokgraft::kern {

namespace {

float dot_neon(const float* a, const float* b, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float total = vaddvq_f32(acc);
    for (; i < n; ++i) {
        total += a[i] * b[i];
    }
    return total;
}

void matvec_neon(const float* m, const float* v, float* out, std::size_t rows,
                 std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = dot_neon(m + r * cols, v, cols);
    }
}

void axpy_neon(float a, const float* x, float* y, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{dot_neon, matvec_neon, axpy_neon};
    return ops;
}

}  // namespace tokgraft::kern

#endif  // __ARM_NEON || __aarch64__
