#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "msgames/game.hpp"
#include "msgames/rng.hpp"

namespace msgames::testing {

// Single-player deterministic game with own cost f on [lo, hi].
inline GameSpec single_player(const PiecewiseQuadratic1D& f, double lo, double hi,
                              GameClass cls = GameClass::StronglyConvex) {
    PlayerSpec p;
    p.dim = 1;
    p.set = BoxSet({lo}, {hi});
    p.own_cost = {f};
    return GameSpec::build("single", {p}, cls);
}

// Golden-section minimizer of a unimodal function on [lo, hi], with endpoint check.
inline double argmin_1d(const std::function<double(double)>& f, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 500 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc <= fd) {
            b = d, d = c, fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    double best = 0.5 * (a + b);
    if (f(lo) < f(best)) best = lo;
    if (f(hi) < f(best)) best = hi;
    return best;
}

inline PiecewiseQuadratic1D random_pq(RngStream& rng, double min_a, double max_a) {
    const auto n = 1 + rng.uniform_index(4);
    std::vector<Quadratic> qs;
    for (std::uint64_t k = 0; k < n; ++k)
        qs.push_back({min_a + (max_a - min_a) * rng.uniform01(), -3.0 + 6.0 * rng.uniform01(),
                      -2.0 + 4.0 * rng.uniform01()});
    return PiecewiseQuadratic1D::max_of(qs);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace msgames::testing
