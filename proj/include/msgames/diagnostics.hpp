#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msgames/game.hpp"
#include "msgames/linalg.hpp"
#include "msgames/rng.hpp"

namespace msgames {

struct ContractionReport {
    std::string kind;  // "gamma1" or "gamma2"
    Matrix matrix;
    double spectral_norm = 0.0;
    bool passes = false;
    double eta = 0.0;
    double mu = 0.0;
    // gamma1 only: per-player moduli and coupling constants that were used, and
    // the norm obtained with the own-cost modulus alone (no price quadratic).
    std::vector<double> sigma_used;
    std::vector<double> coupling_used;
    bool coupling_attested = false;
    std::optional<double> spectral_norm_own_modulus_only;
    // gamma2 only: the (own, others) constants.
    std::vector<std::pair<double, double>> lhat;
};

ContractionReport gamma1_matrix(const GameSpec& game, double eta, double mu,
                                const std::optional<std::vector<double>>& lbar_override = std::nullopt);

struct LhatConstants {
    double own = 0.0;     // L-hat_i
    double others = 0.0;  // L-hat_{-i}
};

ContractionReport gamma2_matrix(const GameSpec& game, double eta, double mu, const std::vector<LhatConstants>& lhat);

// Largest finite-difference ratios of grad_{x_i} f^eta_i(y) - mu*y_i over
// random pairs in `region` (defaults to the game's contraction region, else
// the strategy sets). Pairs differ either in y_i only or in y_{-i} only.
std::vector<LhatConstants> fit_lhat(const GameSpec& game, double eta, double mu, RngStream& rng,
                                    std::size_t pairs = 10000, const std::optional<BoxSet>& region = std::nullopt);

// Stacked grad_{x_i} f-bar^eta_i(x) with the strategy-set indicator folded in.
std::vector<double> residual_gn(const GameSpec& game, const Profile& x, double eta);

// Stacked (x_i - proj[x_i - gamma grad_{x_i} f^eta_i(x)]) / gamma with the
// indicator-free envelope.
std::vector<double> residual_gx(const GameSpec& game, const Profile& x, double eta, double gamma);

// Mean over paths of the euclidean norm of the per-player error norms.
double expected_error(const std::vector<Profile>& paths, const Profile& oracle_eq);

// Sum over players of the envelope of the full own term plus indicator.
double potential_value(const GameSpec& game, const Profile& x, double eta);

// Smallest directional derivative of any player's expected objective toward
// either end of its interval (scaled by the distance). >= -eps certifies an
// eps-QNE.
double qne_gap_1d(const GameSpec& game, const Profile& x);

double qne_bound(double eta, double L, double D, double M_star);

// max_i |grad_{x_i} f^eta_i(x)| with the indicator-free envelope.
double envelope_gradient_bound(const GameSpec& game, const Profile& x, double eta);

// Lipschitz constant of the expected own-term derivative on each piece.
double subgradient_lipschitz_bound(const GameSpec& game);

// Slack of the residual lemmas at player i (positive means violated):
//   |G_n,i(x)| - (mu + 1/eta) |x-hat_i - x_i|        (smoothed BR)
//   |G_X,gamma,i(x)| - mu |x-hat_i - x_i|            (surrogate BR)
double smoothed_residual_lemma_slack(const GameSpec& game, const Profile& x, std::size_t i, double eta, double mu);
double surrogate_residual_lemma_slack(const GameSpec& game, const Profile& x, std::size_t i, double eta, double mu,
                                      double gamma);

}  // namespace msgames
