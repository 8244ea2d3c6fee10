// Compiled with -mavx2 -mfma; only reached after the runtime CPU check.
#include "tokgraft/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace tokgraft::kern {

namespace {

float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    return _mm_cvtss_f32(lo);
}

float dot_avx2(const float* a, const float* b, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
    }
    float total = hsum256(acc);
    for (; i < n; ++i) {
        total += a[i] * b[i];
    }
    return total;
}

void matvec_avx2(const float* m, const float* v, float* out, std::size_t rows,
                 std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = dot_avx2(m + r * cols, v, cols);
    }
}

void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i,
                         _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{dot_avx2, matvec_avx2, axpy_avx2};
    return ops;
}

}  // namespace tokgraft::kern

#endif  // __AVX2__
