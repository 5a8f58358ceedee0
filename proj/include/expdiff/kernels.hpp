#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the dense network and the samplers.
// Scalar reference implementations always exist; on x86-64 an AVX2+FMA
// variant is selected at runtime when the CPU supports it (NEON on arm64).
// The variants are equivalence-tested against the scalar ones; results may
// differ by floating-point reassociation only.
//
// EXPDIFF_SIMD=scalar|avx2|neon|auto overrides the automatic choice.

namespace expdiff::kernels {

enum class Isa { scalar, avx2, neon };

Isa active_isa();
const char* isa_name(Isa isa);

// Force a specific ISA (throws ConfigError if unsupported on this CPU).
void force_isa(Isa isa);

// out = W x + bias, W row-major [rows x cols]; bias may be null.
void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols);

// out += W^T g, W row-major [rows x cols], g has length rows.
void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols);

// A += g x^T  (rank-1 accumulate into a row-major [rows x cols] buffer).
void ger_acc(double* A, const double* g, const double* x,
             std::size_t rows, std::size_t cols);

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

double sumsq(const double* x, std::size_t n);

// SiLU activation and its backward pass; elementwise transcendental, shared
// scalar code on every ISA.
void silu(const double* z, double* out, std::size_t n);
// gin = gout * silu'(z)
void silu_bwd(const double* z, const double* gout, double* gin, std::size_t n);

}  // namespace expdiff::kernels
