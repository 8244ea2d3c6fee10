#include "tokgraft/kernels.hpp"

namespace tokgraft::kern {

namespace {

float dot_scalar(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void matvec_scalar(const float* m, const float* v, float* out, std::size_t rows,
                   std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = dot_scalar(m + r * cols, v, cols);
    }
}

void axpy_scalar(float a, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{dot_scalar, matvec_scalar, axpy_scalar};
    return ops;
}

}  // namespace tokgraft::kern
