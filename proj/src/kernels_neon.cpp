// NEON kernel variants for arm64. Baseline on aarch64, no runtime check
// needed beyond the architecture itself.
#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

namespace expdiff::kernels::neon_impl {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2)
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double acc = dot(W + r * cols, x, cols);
        out[r] = bias ? acc + bias[r] : acc;
    }
}

void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(g[r], W + r * cols, out, cols);
}

void ger_acc(double* A, const double* g, const double* x, std::size_t rows,
             std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(g[r], x, A + r * cols, cols);
}

double sumsq(const double* x, std::size_t n) { return dot(x, x, n); }

}  // namespace expdiff::kernels::neon_impl

#endif  // aarch64
