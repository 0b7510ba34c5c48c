#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msgames/game.hpp"
#include "msgames/piecewise_quadratic.hpp"
#include "msgames/rng.hpp"

namespace msgames {

enum class OracleMode { Analytic, Stochastic };

const char* to_string(OracleMode m);

// Separable prox subproblem
//   min_y  sum_c [ coeff_mean * own_cost[c](y_c) + linear_term[c] * y_c ]
//          + 1_box(y) + |y - center|^2 / (2 eta).
struct ProxProblem {
    std::vector<PiecewiseQuadratic1D> own_cost;
    double coeff_mean = 1.0;
    std::vector<double> linear_term;  // empty means zero
    std::optional<BoxSet> box;
    double eta = 1.0;
    std::vector<double> center;
    // Weak-convexity modulus used for the admissibility check eta * rho < 1.
    // When absent it is computed from own_cost and coeff_mean.
    std::optional<double> rho;

    [[nodiscard]] std::size_t dim() const { return center.size(); }
    // Throws std::invalid_argument on inconsistent sizes, empty pieces, or
    // eta * rho >= 1.
    void validate() const;
};

// Which candidate the exact prox selected, per coordinate.
enum class ProxRegime { PieceInterior, Breakpoint, BoxLower, BoxUpper };

struct ProxDetail {
    std::vector<double> y;
    std::vector<ProxRegime> regime;
    std::vector<std::size_t> index;  // piece or breakpoint index; 0 for box ends
};

// Exact minimizer by candidate enumeration over clamped per-piece stationary
// points, breakpoints and box endpoints. Ties go to the smallest coordinate.
ProxDetail prox_exact_detail(const ProxProblem& p);
std::vector<double> prox_exact(const ProxProblem& p);

// Scalar core of prox_exact. lo/hi may be infinite.
double prox_scalar(const PiecewiseQuadratic1D& f, double coeff, double linear, double eta, double center, double lo,
                   double hi, ProxRegime* regime = nullptr, std::size_t* index = nullptr);

// Objective of the prox subproblem at y (box indicator excluded).
double prox_objective(const ProxProblem& p, const std::vector<double>& y);

// T projected stochastic subgradient steps on the sampled prox objective of
// player i with x_{-i} frozen, started at p.center, stepsize
// 1/((m + 1/eta)(t+1)) with m the player's strong-convexity modulus (or minus
// its weak-convexity modulus). Steps are unprojected when p.box is absent.
std::vector<double> prox_pssm(const ProxProblem& p, const GameSpec& game, std::size_t i, const Profile& x,
                              std::uint64_t T, RngStream& rng);

// (center - prox) / eta with the exact prox.
std::vector<double> envelope_gradient(const ProxProblem& p);
std::vector<double> envelope_gradient_from_prox(const ProxProblem& p, const std::vector<double>& prox);
// Stochastic mode replaces the exact prox with T PSSM steps.
std::vector<double> envelope_gradient(const ProxProblem& p, OracleMode mode, const GameSpec* game, std::size_t i,
                                      const Profile* x, std::uint64_t T, RngStream* rng);

double envelope_value(const ProxProblem& p);

// Prox subproblem of player i's expected objective at x, centered at x_i.
// `with_box` folds the strategy-set indicator into the prox.
ProxProblem player_prox_problem(const GameSpec& game, std::size_t i, const Profile& x, double eta, bool with_box);

}  // namespace msgames
