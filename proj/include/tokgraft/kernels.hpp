#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace tokgraft::kern {

enum class Backend { scalar, avx2, neon };

struct Ops {
    float (*dot)(const float* a, const float* b, std::size_t n);
    // Row-major (rows x cols) matrix times vector.
    void (*matvec)(const float* m, const float* v, float* out, std::size_t rows,
                   std::size_t cols);
    // y += a * x
    void (*axpy)(float a, const float* x, float* y, std::size_t n);
};

// Best backend the running CPU supports (scalar on anything, AVX2/NEON when
// available), unless overridden by force_backend.
const Ops& ops();
Backend active_backend();
const char* backend_name(Backend b);

// nullopt if that backend cannot run on this CPU.
const Ops* ops_for(Backend b);

// Test hook; nullopt restores automatic selection.
void force_backend(std::optional<Backend> b);

// Max-subtracted, double-accumulated softmax; intentionally scalar so results
// do not depend on the selected backend.
void softmax(const float* logits, float* out, std::size_t n);

}  // namespace tokgraft::kern
