#include "expdiff/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "expdiff/errors.hpp"

namespace expdiff::kernels {

namespace scalar_impl {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? bias[r] : 0.0;
        const double* row = W + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(g[r], W + r * cols, out, cols);
}

void ger_acc(double* A, const double* g, const double* x,
             std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(g[r], x, A + r * cols, cols);
}

double sumsq(const double* x, std::size_t n) { return dot(x, x, n); }

}  // namespace scalar_impl

#if defined(__x86_64__) || defined(_M_X64)
#define EXPDIFF_HAVE_AVX2_TU 1
namespace avx2_impl {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols);
void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols);
void ger_acc(double* A, const double* g, const double* x,
             std::size_t rows, std::size_t cols);
double sumsq(const double* x, std::size_t n);
}  // namespace avx2_impl
#endif

#if defined(__aarch64__)
#define EXPDIFF_HAVE_NEON_TU 1
namespace neon_impl {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols);
void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols);
void ger_acc(double* A, const double* g, const double* x,
             std::size_t rows, std::size_t cols);
double sumsq(const double* x, std::size_t n);
}  // namespace neon_impl
#endif

namespace {

struct Dispatch {
    Isa isa;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*matvec)(const double*, const double*, const double*, double*,
                   std::size_t, std::size_t);
    void (*matvec_t_acc)(const double*, const double*, double*, std::size_t,
                         std::size_t);
    void (*ger_acc)(double*, const double*, const double*, std::size_t,
                    std::size_t);
    double (*sumsq)(const double*, std::size_t);
};

constexpr Dispatch kScalar{Isa::scalar,
                           scalar_impl::dot,
                           scalar_impl::axpy,
                           scalar_impl::matvec,
                           scalar_impl::matvec_t_acc,
                           scalar_impl::ger_acc,
                           scalar_impl::sumsq};

#ifdef EXPDIFF_HAVE_AVX2_TU
constexpr Dispatch kAvx2{Isa::avx2,
                         avx2_impl::dot,
                         avx2_impl::axpy,
                         avx2_impl::matvec,
                         avx2_impl::matvec_t_acc,
                         avx2_impl::ger_acc,
                         avx2_impl::sumsq};
#endif

#ifdef EXPDIFF_HAVE_NEON_TU
constexpr Dispatch kNeon{Isa::neon,
                         neon_impl::dot,
                         neon_impl::axpy,
                         neon_impl::matvec,
                         neon_impl::matvec_t_acc,
                         neon_impl::ger_acc,
                         neon_impl::sumsq};
#endif

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(EXPDIFF_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#ifdef EXPDIFF_HAVE_NEON_TU
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Dispatch* table_for(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return &kScalar;
        case Isa::avx2:
#ifdef EXPDIFF_HAVE_AVX2_TU
            return &kAvx2;
#else
            break;
#endif
        case Isa::neon:
#ifdef EXPDIFF_HAVE_NEON_TU
            return &kNeon;
#else
            break;
#endif
    }
    return &kScalar;
}

Isa pick_initial_isa() {
    if (const char* env = std::getenv("EXPDIFF_SIMD")) {
        std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && cpu_supports(Isa::avx2)) return Isa::avx2;
        if (v == "neon" && cpu_supports(Isa::neon)) return Isa::neon;
        // "auto" or an unsupported request falls through to detection.
    }
    if (cpu_supports(Isa::avx2)) return Isa::avx2;
    if (cpu_supports(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

const Dispatch* g_active = nullptr;
std::once_flag g_init_flag;

const Dispatch& active() {
    std::call_once(g_init_flag, [] { g_active = table_for(pick_initial_isa()); });
    return *g_active;
}

}  // namespace

Isa active_isa() { return active().isa; }

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "?";
}

void force_isa(Isa isa) {
    if (!cpu_supports(isa))
        throw ConfigError(std::string("kernel ISA not supported on this CPU: ") +
                          isa_name(isa));
    active();  // ensure initialized before overriding
    g_active = table_for(isa);
}

void matvec(const double* W, const double* x, const double* bias, double* out,
            std::size_t rows, std::size_t cols) {
    active().matvec(W, x, bias, out, rows, cols);
}

void matvec_t_acc(const double* W, const double* g, double* out,
                  std::size_t rows, std::size_t cols) {
    active().matvec_t_acc(W, g, out, rows, cols);
}

void ger_acc(double* A, const double* g, const double* x, std::size_t rows,
             std::size_t cols) {
    active().ger_acc(A, g, x, rows, cols);
}

double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}

double sumsq(const double* x, std::size_t n) { return active().sumsq(x, n); }

void silu(const double* z, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-z[i]));
        out[i] = z[i] * s;
    }
}

void silu_bwd(const double* z, const double* gout, double* gin, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-z[i]));
        gin[i] = gout[i] * (s + z[i] * s * (1.0 - s));
    }
}

}  // namespace expdiff::kernels
