#include "msgames/inner_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msgames {

namespace {

constexpr double kHardSampleCeiling = 4.0e18;

void check_strongly_convex(const GameSpec& game, std::size_t i) {
    if (!(game.sigma(i) > 0.0))
        throw std::invalid_argument("imgm_solve: player " + std::to_string(i) + " is not strongly convex");
}

}  // namespace

ImgmSchedule ImgmSchedule::for_scheme(double beta, std::uint64_t t0, std::optional<std::uint64_t> cap, double eta,
                                      double mu) {
    ImgmSchedule s;
    s.beta = beta;
    s.t0 = t0;
    s.sample_cap = cap;
    s.gamma = 1.0 / (1.0 / eta + mu);
    s.validate();
    return s;
}

void ImgmSchedule::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("schedule: beta must lie in (0, 1)");
    if (t0 == 0) throw std::invalid_argument("schedule: t0 must be positive");
    if (sample_cap && *sample_cap == 0) throw std::invalid_argument("schedule: sample_cap must be positive");
    if (gamma < 0.0) throw std::invalid_argument("schedule: gamma must be nonnegative");
}

std::uint64_t ImgmSchedule::samples_at(std::uint64_t t, bool* capped) const {
    const double raw = std::floor(static_cast<double>(t0) * std::pow(beta, -static_cast<double>(t + 1)));
    double v = std::min(raw, kHardSampleCeiling);
    bool was_capped = raw > kHardSampleCeiling;
    if (sample_cap && v > static_cast<double>(*sample_cap)) {
        v = static_cast<double>(*sample_cap);
        was_capped = true;
    }
    if (capped) *capped = was_capped;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

InnerResult imgm_solve(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu, std::uint64_t j,
                       const ImgmSchedule& sched, OracleMode mode, RngStream& rng) {
    check_strongly_convex(game, i);
    if (!(eta > 0.0) || !(mu >= 0.0)) throw std::invalid_argument("imgm_solve: need eta > 0 and mu >= 0");
    sched.validate();
    const double gamma = sched.gamma > 0.0 ? sched.gamma : 1.0 / (1.0 / eta + mu);

    ProxProblem prob = player_prox_problem(game, i, x, eta, /*with_box=*/true);
    const std::vector<double> anchor = prob.center;
    InnerResult out;
    out.z = anchor;
    for (std::uint64_t t = 0; t < j; ++t) {
        prob.center = out.z;
        std::vector<double> prox;
        if (mode == OracleMode::Analytic) {
            prox = prox_exact(prob);
        } else {
            bool capped = false;
            const std::uint64_t T = sched.samples_at(t, &capped);
            out.capped = out.capped || capped;
            prox = prox_pssm(prob, game, i, x, T, rng);
            out.samples += T;
        }
        for (std::size_t c = 0; c < out.z.size(); ++c) {
            const double grad = (out.z[c] - prox[c]) / eta + mu * (out.z[c] - anchor[c]);
            out.z[c] -= gamma * grad;
        }
    }
    return out;
}

std::uint64_t imgm_steps_for(double eps, double p_hat, double theta) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("imgm_steps_for: eps must lie in (0, 1]");
    if (!(p_hat > 0.0 && p_hat < 1.0)) throw std::invalid_argument("imgm_steps_for: p_hat must lie in (0, 1)");
    if (!(theta >= 1.0)) throw std::invalid_argument("imgm_steps_for: theta must be at least 1");
    const double target = eps * eps;
    const double est = std::ceil(std::log(theta / target) / std::log(1.0 / p_hat));
    auto j = static_cast<std::uint64_t>(std::max(0.0, est));
    // Guard the closed form against rounding in the logarithms.
    while (theta * std::pow(p_hat, static_cast<double>(j)) > target) ++j;
    while (j > 0 && theta * std::pow(p_hat, static_cast<double>(j - 1)) <= target) --j;
    return j;
}

InnerResult oimgm_step(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu, std::uint64_t T,
                       OracleMode mode, RngStream& rng) {
    if (!(mu > 0.0)) throw std::invalid_argument("oimgm_step: mu must be positive");
    if (eta * game.rho(i) >= 1.0) throw std::invalid_argument("oimgm_step: eta * rho must be below 1");
    const ProxProblem prob = player_prox_problem(game, i, x, eta, /*with_box=*/false);
    InnerResult out;
    std::vector<double> grad;
    if (mode == OracleMode::Analytic) {
        grad = envelope_gradient(prob);
    } else {
        grad = envelope_gradient_from_prox(prob, prox_pssm(prob, game, i, x, T, rng));
        out.samples = T;
    }
    out.z = prob.center;
    for (std::size_t c = 0; c < out.z.size(); ++c) out.z[c] -= grad[c] / mu;
    game.player(i).set.project_in_place(out.z);
    return out;
}

std::vector<double> exact_smoothed_br(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu) {
    if (!(eta > 0.0) || !(mu > 0.0)) throw std::invalid_argument("exact_smoothed_br: need eta > 0 and mu > 0");
    ProxProblem prob = player_prox_problem(game, i, x, eta + 1.0 / mu, /*with_box=*/true);
    const std::vector<double> y = prox_exact(prob);
    std::vector<double> z(y.size());
    for (std::size_t c = 0; c < y.size(); ++c) z[c] = (y[c] / eta + mu * prob.center[c]) / (1.0 / eta + mu);
    return z;
}

std::vector<double> exact_surrogate_br(const GameSpec& game, std::size_t i, const Profile& x, double eta, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("exact_surrogate_br: mu must be positive");
    const ProxProblem prob = player_prox_problem(game, i, x, eta, /*with_box=*/false);
    const auto grad = envelope_gradient(prob);
    std::vector<double> z = prob.center;
    for (std::size_t c = 0; c < z.size(); ++c) z[c] -= grad[c] / mu;
    game.player(i).set.project_in_place(z);
    return z;
}

}  // namespace msgames
