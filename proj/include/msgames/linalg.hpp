#pragma once

#include <cstddef>
#include <vector>

namespace msgames {

// Dense row-major matrix, just enough for contraction matrices and coupling
// weight blocks.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct SpectralNormResult {
    double norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Largest singular value of m via power iteration on m^T m, started from the
// normalized all-ones vector.
SpectralNormResult spectral_norm(const Matrix& m, double tol = 1e-12, int max_iters = 10000);

double euclidean_norm(const std::vector<double>& v);

}  // namespace msgames
