#include "msgames/piecewise_quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace msgames {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double magnitude(const Quadratic& q, double y) {
    return std::abs(q.a) * y * y + std::abs(q.b) * std::abs(y) + std::abs(q.c);
}

// Real roots of a*y^2 + b*y + c = 0, using the cancellation-free formula.
std::vector<double> real_roots(double a, double b, double c) {
    std::vector<double> roots;
    if (a == 0.0) {
        if (b != 0.0) roots.push_back(-c / b);
        return roots;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q != 0.0) {
        roots.push_back(q / a);
        roots.push_back(c / q);
    } else {
        roots.push_back(0.0);
    }
    return roots;
}

}  // namespace

PiecewiseQuadratic1D::PiecewiseQuadratic1D(std::vector<Quadratic> pieces, std::vector<double> breaks)
    : pieces_(std::move(pieces)), breaks_(std::move(breaks)) {
    validate_and_compute_moduli();
}

void PiecewiseQuadratic1D::validate_and_compute_moduli() {
    if (pieces_.empty()) throw std::invalid_argument("piecewise quadratic: empty piece list");
    if (breaks_.size() + 1 != pieces_.size())
        throw std::invalid_argument("piecewise quadratic: need exactly one breakpoint between consecutive pieces");
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
        const double bp = breaks_[k];
        if (!std::isfinite(bp)) throw std::invalid_argument("piecewise quadratic: non-finite breakpoint");
        if (k > 0 && !(breaks_[k - 1] < bp))
            throw std::invalid_argument("piecewise quadratic: breakpoints must be strictly increasing");
        const Quadratic& l = pieces_[k];
        const Quadratic& r = pieces_[k + 1];
        const double scale = std::max({1.0, magnitude(l, bp), magnitude(r, bp)});
        if (std::abs(l.value(bp) - r.value(bp)) > 1e-12 * scale)
            throw std::invalid_argument("piecewise quadratic: discontinuous at breakpoint " + std::to_string(bp));
        const double slope_scale =
            std::max({1.0, std::abs(2.0 * l.a * bp) + std::abs(l.b), std::abs(2.0 * r.a * bp) + std::abs(r.b)});
        if (l.slope(bp) > r.slope(bp) + 1e-12 * slope_scale)
            throw std::invalid_argument("piecewise quadratic: concave kink at breakpoint " + std::to_string(bp));
    }
    double min_curv = kInf;
    for (const auto& p : pieces_) {
        if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c))
            throw std::invalid_argument("piecewise quadratic: non-finite coefficient");
        min_curv = std::min(min_curv, 2.0 * p.a);
    }
    if (min_curv > 0.0) {
        sigma_ = min_curv;
        rho_ = 0.0;
    } else {
        sigma_ = 0.0;
        rho_ = -min_curv;
    }
}

PiecewiseQuadratic1D PiecewiseQuadratic1D::quadratic(double a, double b, double c) {
    return PiecewiseQuadratic1D({Quadratic{a, b, c}}, {});
}

PiecewiseQuadratic1D PiecewiseQuadratic1D::max_of(const std::vector<Quadratic>& quads) {
    if (quads.empty()) throw std::invalid_argument("max_of: empty piece list");
    std::vector<double> cuts;
    for (std::size_t p = 0; p < quads.size(); ++p) {
        for (std::size_t q = p + 1; q < quads.size(); ++q) {
            for (double r : real_roots(quads[p].a - quads[q].a, quads[p].b - quads[q].b, quads[p].c - quads[q].c)) {
                if (std::isfinite(r)) cuts.push_back(r);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto argmax_at = [&quads](double y) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < quads.size(); ++k) {
            if (quads[k].value(y) > quads[best].value(y)) best = k;
        }
        return best;
    };

    // Winner on each open interval between consecutive cuts.
    std::vector<std::size_t> owner;
    if (cuts.empty()) {
        owner.push_back(argmax_at(0.0));
    } else {
        owner.push_back(argmax_at(cuts.front() - 1.0));
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) owner.push_back(argmax_at(0.5 * (cuts[k] + cuts[k + 1])));
        owner.push_back(argmax_at(cuts.back() + 1.0));
    }

    std::vector<Quadratic> pieces{quads[owner[0]]};
    std::vector<double> breaks;
    for (std::size_t k = 1; k < owner.size(); ++k) {
        if (owner[k] != owner[k - 1]) {
            pieces.push_back(quads[owner[k]]);
            breaks.push_back(cuts[k - 1]);
        }
    }
    return PiecewiseQuadratic1D(std::move(pieces), std::move(breaks));
}

double PiecewiseQuadratic1D::piece_lo(std::size_t k) const { return k == 0 ? -kInf : breaks_[k - 1]; }

double PiecewiseQuadratic1D::piece_hi(std::size_t k) const { return k + 1 == pieces_.size() ? kInf : breaks_[k]; }

std::size_t PiecewiseQuadratic1D::first_active(double y) const {
    // First breakpoint >= y closes the first piece containing y.
    return static_cast<std::size_t>(std::lower_bound(breaks_.begin(), breaks_.end(), y) - breaks_.begin());
}

double PiecewiseQuadratic1D::value(double y) const { return pieces_[first_active(y)].value(y); }

double PiecewiseQuadratic1D::left_slope(double y) const { return pieces_[first_active(y)].slope(y); }

double PiecewiseQuadratic1D::right_slope(double y) const {
    // Last piece containing y: the first piece whose left end is > y, minus one.
    const auto k = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), y) - breaks_.begin());
    return pieces_[k].slope(y);
}

double PiecewiseQuadratic1D::subgradient(double y) const { return left_slope(y); }

PiecewiseQuadratic1D PiecewiseQuadratic1D::scaled_plus(double s, const Quadratic& q) const {
    std::vector<Quadratic> out;
    out.reserve(pieces_.size());
    for (const auto& p : pieces_) out.push_back({s * p.a + q.a, s * p.b + q.b, s * p.c + q.c});
    return PiecewiseQuadratic1D(std::move(out), breaks_);
}

}  // namespace msgames
