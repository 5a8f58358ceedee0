#pragma once

#include <cstddef>
#include <vector>

#include "expdiff/kernels.hpp"

namespace expdiff {

using Vec = std::vector<double>;

// Dense row-major matrix, just enough for this project.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline void mat_vec(const Mat& m, const double* x, double* out) {
    kernels::matvec(m.data.data(), x, nullptr, out, m.rows, m.cols);
}

}  // namespace expdiff
