#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Deterministic RNG. std::mt19937_64 is fully specified by the standard, but
// the std distributions are not, so uniform/normal draws are generated
// explicitly here. Streams are split from a master seed via splitmix64 so
// per-sample results do not depend on worker count.

namespace expdiff {

// splitmix64 mix of (master, stream) -> child seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe for log().
    double u01_open() { return 1.0 - u01(); }

    // Standard normal via Marsaglia's polar method (one value cached).
    double normal();

    void fill_normal(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    }
    std::vector<double> normal_vec(std::size_t n) {
        std::vector<double> v(n);
        fill_normal(v.data(), n);
        return v;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    std::mt19937_64& raw() { return gen_; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace expdiff
