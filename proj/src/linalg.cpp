#include "msgames/linalg.hpp"

#include <cmath>

namespace msgames {

double euclidean_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

SpectralNormResult spectral_norm(const Matrix& m, double tol, int max_iters) {
    SpectralNormResult out;
    if (m.rows == 0 || m.cols == 0) {
        out.converged = true;
        return out;
    }
    const std::size_t n = m.cols;

    // Gram matrix m^T m (symmetric positive semidefinite).
    std::vector<double> gram(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < m.rows; ++r) s += m(r, i) * m(r, j);
            gram[i * n + j] = s;
        }

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> w(n);
    double lambda = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += gram[i * n + j] * v[j];
            w[i] = s;
        }
        const double wn = euclidean_norm(w);
        out.iterations = it;
        if (wn == 0.0) {
            // v lies in the null space; with a nonnegative start this means m = 0.
            lambda = 0.0;
            out.converged = true;
            break;
        }
        // Rayleigh quotient v^T G v with the unit vector v.
        double rq = 0.0;
        for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = w[i] / wn;
            change = std::fmax(change, std::abs(next - v[i]));
            v[i] = next;
        }
        const bool settled = std::abs(rq - lambda) <= tol * std::fmax(1.0, rq) && change <= std::sqrt(tol);
        lambda = rq;
        if (settled) {
            out.converged = true;
            break;
        }
    }
    out.norm = std::sqrt(std::fmax(lambda, 0.0));
    return out;
}

}  // namespace msgames
