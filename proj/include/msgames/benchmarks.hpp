#pragma once

#include <string>
#include <vector>

#include "msgames/game.hpp"

namespace msgames {

// Four-firm Cournot game with convex piecewise quadratic production costs,
// strategy sets [0, 20] and uniform demand noise on [0, 1].
GameSpec build_cournot_sc();

// Six-player congestion game (maximization converted to minimization) with
// strategy sets [0, 10] and additive quadratic congestion cost.
GameSpec build_congestion();

// Four-firm Cournot game with weakly convex costs on [3, 12].
GameSpec build_cournot_wc();

// Builder by id: "cournot-sc", "congestion", "cournot-wc".
GameSpec build_benchmark(const std::string& id);
std::vector<std::string> benchmark_ids();

// Closed-form equilibrium of the congestion game: x_i = (1 + i/18) / 2.
Profile congestion_closed_form();
// Symmetric interior equilibrium of the weakly convex Cournot game.
Profile cournot_wc_closed_form();

// Cyclic exact best responses on the expected game, each solved by its own
// candidate enumeration on the piecewise quadratic evaluator. Throws
// ConvergenceError when the profile change stays above tol.
Profile oracle_fixed_point(const GameSpec& game, double tol = 1e-13, int max_iters = 100000);

// Alternating global one-dimensional minimization (grid search, then
// bisection on the one-sided derivative sign) until no player moves by more
// than `resolution`. The output is certified with qne_gap_1d; throws
// ConvergenceError when the sweeps do not settle or the certificate fails.
Profile oracle_grid(const GameSpec& game, double resolution = 1e-12, int grid_points = 2001, int max_sweeps = 20000);

}  // namespace msgames
