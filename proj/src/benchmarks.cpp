#include "msgames/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "msgames/diagnostics.hpp"
#include "msgames/errors.hpp"

namespace msgames {

GameSpec build_cournot_sc() {
    constexpr std::size_t N = 4;
    const auto g = PiecewiseQuadratic1D::max_of({{0.5, 0.0, 0.0}, {1.0, 0.0, -2.0}});
    std::vector<PlayerSpec> players;
    for (std::size_t i = 0; i < N; ++i) {
        const double idx = static_cast<double>(i + 1);
        PlayerSpec p;
        p.dim = 1;
        p.set = BoxSet::uniform(1, 0.0, 20.0);
        p.own_cost = {g};
        // Cost coefficient (2 + i/N) xi, xi ~ U[0, 1].
        p.own_coeff = {0.0, 2.0 + idx / static_cast<double>(N)};
        // Revenue (a - b * total) x_i with a = 4 xi, b = 0.02 xi.
        p.own_quadratic = {0.0, 0.02};
        p.intercept = {{0.0, -4.0}};
        for (std::size_t j = 0; j < N; ++j)
            if (j != i) p.coupling.push_back({0, j, 0, {0.0, 0.02}});
        players.push_back(std::move(p));
    }
    return GameSpec::build("cournot-sc", std::move(players), GameClass::StronglyConvex);
}

GameSpec build_congestion() {
    constexpr std::size_t N = 6;
    // -min{y, y/2 + 3} = max{-y, -y/2 - 3}
    const auto own = PiecewiseQuadratic1D::max_of({{0.0, -1.0, 0.0}, {0.0, -0.5, -3.0}});
    std::vector<PlayerSpec> players;
    for (std::size_t i = 0; i < N; ++i) {
        const double base = 1.0 + static_cast<double>(i + 1) / (3.0 * N);
        PlayerSpec p;
        p.dim = 1;
        p.set = BoxSet::uniform(1, 0.0, 10.0);
        p.own_cost = {own};
        p.own_coeff = {base - 0.5, base + 0.5};  // base + 0.5 xi, xi ~ U[-1, 1]
        p.own_quadratic = UniformCoefficient::constant(1.0);
        p.offset = SeparableOffset{UniformCoefficient::constant(1.0), PiecewiseQuadratic1D::quadratic(1.0)};
        players.push_back(std::move(p));
    }
    return GameSpec::build("congestion", std::move(players), GameClass::StronglyConvex);
}

GameSpec build_cournot_wc() {
    constexpr std::size_t N = 4;
    const auto c = PiecewiseQuadratic1D::max_of({{-0.125, 0.0, 4.0}, {0.125, 0.0, 0.0}});
    std::vector<PlayerSpec> players;
    for (std::size_t i = 0; i < N; ++i) {
        PlayerSpec p;
        p.dim = 1;
        p.set = BoxSet::uniform(1, 3.0, 12.0);
        p.own_cost = {c};
        p.own_coeff = {0.9, 1.1};        // 1 + 0.1 xi
        p.own_quadratic = {0.01, 0.03};  // b = 0.02 + 0.01 xi
        p.intercept = {{-1.0, -3.0}};    // -a, a = 2 + xi
        for (std::size_t j = 0; j < N; ++j)
            if (j != i) p.coupling.push_back({0, j, 0, {0.01, 0.03}});
        p.declared_rho = 0.25;
        players.push_back(std::move(p));
    }
    // The symmetric players make the smoothed game a potential game; the
    // contraction constants are fitted on the convex part of the sets.
    return GameSpec::build("cournot-wc", std::move(players), GameClass::WeaklyConvex, std::nullopt,
                           /*potential_attested=*/true, BoxSet::uniform(N, 4.0, 12.0));
}

GameSpec build_benchmark(const std::string& id) {
    if (id == "cournot-sc") return build_cournot_sc();
    if (id == "congestion") return build_congestion();
    if (id == "cournot-wc") return build_cournot_wc();
    throw std::invalid_argument("unknown benchmark game '" + id + "'");
}

std::vector<std::string> benchmark_ids() { return {"cournot-sc", "congestion", "cournot-wc"}; }

Profile congestion_closed_form() {
    std::vector<std::vector<double>> parts;
    for (int i = 1; i <= 6; ++i) parts.push_back({(1.0 + i / 18.0) / 2.0});
    return Profile::assemble(parts);
}

Profile cournot_wc_closed_form() {
    return Profile::assemble({{40.0 / 7.0}, {40.0 / 7.0}, {40.0 / 7.0}, {40.0 / 7.0}});
}

namespace {

// Global minimizer over [lo, hi] of f(y) + lin * y for a piecewise quadratic
// f, by enumerating stationary points of each piece, breakpoints and ends.
double minimize_on_interval(const PiecewiseQuadratic1D& f, double lin, double lo, double hi) {
    std::vector<double> cand{lo, hi};
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double L = std::max(f.piece_lo(k), lo);
        const double R = std::min(f.piece_hi(k), hi);
        if (L > R) continue;
        const auto& q = f.pieces()[k];
        if (q.a > 0.0) cand.push_back(std::clamp(-(q.b + lin) / (2.0 * q.a), L, R));
    }
    for (double b : f.breaks())
        if (b >= lo && b <= hi) cand.push_back(b);
    std::sort(cand.begin(), cand.end());
    double best_y = cand.front();
    double best_v = std::numeric_limits<double>::infinity();
    for (double y : cand) {
        const double v = f.value(y) + lin * y;
        if (v < best_v) {
            best_v = v;
            best_y = y;
        }
    }
    return best_y;
}

}  // namespace

Profile oracle_fixed_point(const GameSpec& game, double tol, int max_iters) {
    if (game.game_class() != GameClass::StronglyConvex)
        throw std::invalid_argument("oracle_fixed_point: strongly convex game required");
    Profile x = game.zero_profile();
    game.project(x);
    for (int it = 0; it < max_iters; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < game.num_players(); ++i) {
            const auto& p = game.player(i);
            const auto lin = game.expected_linear(i, x);
            auto xi = x.slice(i);
            for (std::size_t c = 0; c < p.dim; ++c) {
                const double y = minimize_on_interval(game.expected_own(i, c), lin[c], p.set.lo[c], p.set.hi[c]);
                change = std::max(change, std::abs(y - xi[c]));
                xi[c] = y;
            }
        }
        if (change < tol) return x;
    }
    throw ConvergenceError("oracle_fixed_point: no convergence within the iteration budget");
}

Profile oracle_grid(const GameSpec& game, double resolution, int grid_points, int max_sweeps) {
    if (grid_points < 2) throw std::invalid_argument("oracle_grid: need at least two grid points");
    for (const auto& p : game.players())
        if (p.dim != 1) throw std::invalid_argument("oracle_grid: one-dimensional players only");
    Profile x = game.zero_profile();
    game.project(x);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < game.num_players(); ++i) {
            const auto& p = game.player(i);
            const double lo = p.set.lo[0];
            const double hi = p.set.hi[0];
            const double h = (hi - lo) / (grid_points - 1);
            const auto& f = game.expected_own(i, 0);
            const double lin = game.expected_linear(i, x)[0];
            auto obj = [&](double y) { return f.value(y) + lin * y; };

            int best = 0;
            double best_v = std::numeric_limits<double>::infinity();
            for (int g = 0; g < grid_points; ++g) {
                const double v = obj(lo + h * g);
                if (v < best_v) {
                    best_v = v;
                    best = g;
                }
            }
            // Bisection on the sign of the one-sided derivatives inside the
            // two cells around the best grid point.
            double a = std::max(lo, lo + h * (best - 1));
            double b = std::min(hi, lo + h * (best + 1));
            double y = lo + h * best;
            for (int k = 0; k < 200 && b - a > 0.0; ++k) {
                const double m = 0.5 * (a + b);
                if (m <= a || m >= b) break;
                const double right = f.right_slope(m) + lin;
                const double left = f.left_slope(m) + lin;
                if (right < 0.0) {
                    a = m;
                } else if (left > 0.0) {
                    b = m;
                } else {
                    a = b = m;
                }
                y = 0.5 * (a + b);
            }
            // Endpoints and the grid winner stay in the running.
            double polished = y;
            for (double c : {a, b, lo + h * best})
                if (obj(c) < obj(polished)) polished = c;
            moved = std::max(moved, std::abs(polished - x.slice(i)[0]));
            x.slice(i)[0] = polished;
        }
        if (moved <= resolution) {
            const double gap = qne_gap_1d(game, x);
            if (gap < -1e-6) throw ConvergenceError("oracle_grid: output fails the QNE certificate");
            return x;
        }
    }
    throw ConvergenceError("oracle_grid: alternating minimization did not settle");
}

}  // namespace msgames
