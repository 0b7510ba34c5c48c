#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msgames/game.hpp"
#include "msgames/moreau.hpp"
#include "msgames/rng.hpp"

namespace msgames {

// Inner sample schedule T(t) = floor(t0 * beta^-(t+1)), optionally capped.
struct ImgmSchedule {
    double beta = 0.5;
    std::uint64_t t0 = 1;
    std::optional<std::uint64_t> sample_cap;
    double gamma = 0.0;  // damped-prox stepsize; 0 selects 1/(1/eta + mu)

    static ImgmSchedule for_scheme(double beta, std::uint64_t t0, std::optional<std::uint64_t> cap, double eta,
                                   double mu);

    void validate() const;
    // Sample count at inner step t; sets *capped when the cap truncated it.
    [[nodiscard]] std::uint64_t samples_at(std::uint64_t t, bool* capped = nullptr) const;
};

struct InnerResult {
    std::vector<double> z;
    std::uint64_t samples = 0;
    bool capped = false;
};

// j damped-prox steps on  f-bar^eta_i(., x_{-i}) + (mu/2)|. - x_i|^2  from
// z = x_i, where f-bar folds the strategy-set indicator into player i's
// expected objective. Analytic mode uses the exact prox, stochastic mode uses
// prox_pssm with T(t) samples at step t.
InnerResult imgm_solve(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu, std::uint64_t j,
                       const ImgmSchedule& sched, OracleMode mode, RngStream& rng);

// Smallest j >= 0 with theta * p_hat^j <= eps^2.
std::uint64_t imgm_steps_for(double eps, double p_hat, double theta);

// One projected step x_i - (1/mu) grad f^eta_i(x) onto X_i, with the envelope
// of player i's objective taken without the strategy-set indicator. In
// stochastic mode the prox inside the gradient uses T PSSM samples.
InnerResult oimgm_step(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu, std::uint64_t T,
                       OracleMode mode, RngStream& rng);

// Exact minimizer of f-bar^eta_i(., x_{-i}) + (mu/2)|. - x_i|^2. The joint
// minimization over the envelope variable reduces it to one prox with
// parameter eta + 1/mu followed by a weighted average with x_i.
std::vector<double> exact_smoothed_br(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu);

// Exact one-step surrogate response (oimgm_step in analytic mode).
std::vector<double> exact_surrogate_br(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu);

}  // namespace msgames
