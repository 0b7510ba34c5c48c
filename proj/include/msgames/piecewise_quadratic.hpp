#pragma once

#include <cstddef>
#include <vector>

namespace msgames {

struct Quadratic {
    double a = 0.0;  // coefficient of y^2
    double b = 0.0;
    double c = 0.0;

    [[nodiscard]] double value(double y) const { return (a * y + b) * y + c; }
    [[nodiscard]] double slope(double y) const { return 2.0 * a * y + b; }
};

// Continuous piecewise quadratic function of one real variable.
//
// Piece k is active on [breaks[k-1], breaks[k]], with the first piece extending
// to -inf and the last to +inf. Every kink must be convex (left slope no larger
// than right slope), so the function is rho-weakly convex with
// rho = max(0, -min_k 2 a_k), and sigma-strongly convex with
// sigma = max(0, min_k 2 a_k).
class PiecewiseQuadratic1D {
public:
    PiecewiseQuadratic1D() = default;

    // Throws std::invalid_argument on an empty piece list, a wrong number of
    // breakpoints, unsorted breakpoints, a discontinuity, or a concave kink.
    PiecewiseQuadratic1D(std::vector<Quadratic> pieces, std::vector<double> breaks);

    // Pointwise maximum of finitely many quadratics over the whole real line.
    static PiecewiseQuadratic1D max_of(const std::vector<Quadratic>& quads);

    // A single quadratic a*y^2 + b*y + c.
    static PiecewiseQuadratic1D quadratic(double a, double b = 0.0, double c = 0.0);

    [[nodiscard]] const std::vector<Quadratic>& pieces() const { return pieces_; }
    [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }
    [[nodiscard]] std::size_t size() const { return pieces_.size(); }
    [[nodiscard]] bool empty() const { return pieces_.empty(); }

    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double rho() const { return rho_; }

    // Interval on which piece k is active (infinite ends for outer pieces).
    [[nodiscard]] double piece_lo(std::size_t k) const;
    [[nodiscard]] double piece_hi(std::size_t k) const;

    // Index of the first (lowest-index) piece active at y.
    [[nodiscard]] std::size_t first_active(double y) const;

    [[nodiscard]] double value(double y) const;
    [[nodiscard]] double left_slope(double y) const;
    [[nodiscard]] double right_slope(double y) const;
    // Derivative of the first active piece; a valid (sub)gradient selection.
    [[nodiscard]] double subgradient(double y) const;

    // s * f(y) + (a y^2 + b y + c); breakpoints are kept.
    [[nodiscard]] PiecewiseQuadratic1D scaled_plus(double s, const Quadratic& q) const;

private:
    void validate_and_compute_moduli();

    std::vector<Quadratic> pieces_;
    std::vector<double> breaks_;
    double sigma_ = 0.0;
    double rho_ = 0.0;
};

}  // namespace msgames
