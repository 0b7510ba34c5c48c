#include "msgames/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "msgames/inner_solvers.hpp"
#include "msgames/moreau.hpp"

namespace msgames {

namespace {

double gamma1_norm(std::size_t n, double eta, double mu, const std::vector<double>& sigma,
                   const std::vector<double>& lbar, Matrix* out) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigma[i] / (eta * sigma[i] + 1.0);
        for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? mu : lbar[i]) / (s + mu);
    }
    const double norm = spectral_norm(m).norm;
    if (out) *out = std::move(m);
    return norm;
}

double squared(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

BoxSet default_region(const GameSpec& game, const std::optional<BoxSet>& region) {
    if (region) {
        if (region->dim() != game.total_dim()) throw std::invalid_argument("fit_lhat: region dimension mismatch");
        return *region;
    }
    if (game.contraction_region()) return *game.contraction_region();
    std::vector<double> lo, hi;
    for (const auto& p : game.players()) {
        lo.insert(lo.end(), p.set.lo.begin(), p.set.lo.end());
        hi.insert(hi.end(), p.set.hi.begin(), p.set.hi.end());
    }
    return BoxSet(lo, hi);
}

// grad_{x_i} f^eta_i(y) - mu * y_i, indicator-free envelope.
std::vector<double> surrogate_map(const GameSpec& game, std::size_t i, const Profile& y, double eta, double mu) {
    const ProxProblem p = player_prox_problem(game, i, y, eta, /*with_box=*/false);
    auto g = envelope_gradient(p);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] -= mu * p.center[c];
    return g;
}

}  // namespace

ContractionReport gamma1_matrix(const GameSpec& game, double eta, double mu,
                                const std::optional<std::vector<double>>& lbar_override) {
    if (game.game_class() != GameClass::StronglyConvex)
        throw std::invalid_argument("gamma1_matrix: strongly convex game required");
    if (!(eta > 0.0) || !(mu >= 0.0)) throw std::invalid_argument("gamma1_matrix: need eta > 0 and mu >= 0");
    const std::size_t n = game.num_players();
    ContractionReport r;
    r.kind = "gamma1";
    r.eta = eta;
    r.mu = mu;
    std::vector<double> sig_own(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(game.sigma(i) > 0.0)) throw std::invalid_argument("gamma1_matrix: missing sigma for a player");
        r.sigma_used.push_back(game.sigma(i));
        sig_own[i] = game.sigma_own_only(i);
        r.coupling_used.push_back(game.coupling_lipschitz(i));
        r.coupling_attested = r.coupling_attested || game.coupling_lipschitz_attested(i);
    }
    if (lbar_override) {
        if (lbar_override->size() != n) throw std::invalid_argument("gamma1_matrix: override length mismatch");
        r.coupling_used = *lbar_override;
        r.coupling_attested = true;
    }
    if (mu == 0.0 && n == 1) {
        // Single entry mu / (...) is exactly zero.
        r.matrix = Matrix(1, 1, 0.0);
        r.spectral_norm = 0.0;
    } else {
        r.spectral_norm = gamma1_norm(n, eta, mu, r.sigma_used, r.coupling_used, &r.matrix);
    }
    r.passes = r.spectral_norm < 1.0;
    bool own_positive = std::all_of(sig_own.begin(), sig_own.end(), [](double s) { return s > 0.0; });
    if (own_positive) r.spectral_norm_own_modulus_only = gamma1_norm(n, eta, mu, sig_own, r.coupling_used, nullptr);
    return r;
}

ContractionReport gamma2_matrix(const GameSpec& game, double eta, double mu, const std::vector<LhatConstants>& lhat) {
    const std::size_t n = game.num_players();
    if (lhat.size() != n) throw std::invalid_argument("gamma2_matrix: need one constant pair per player");
    if (!(mu > 0.0)) throw std::invalid_argument("gamma2_matrix: mu must be positive");
    ContractionReport r;
    r.kind = "gamma2";
    r.eta = eta;
    r.mu = mu;
    r.matrix = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lhat[i].own >= 0.0) || !(lhat[i].others >= 0.0))
            throw std::invalid_argument("gamma2_matrix: constants must be nonnegative");
        r.lhat.emplace_back(lhat[i].own, lhat[i].others);
        for (std::size_t j = 0; j < n; ++j) r.matrix(i, j) = (i == j ? lhat[i].own : lhat[i].others) / mu;
    }
    r.spectral_norm = spectral_norm(r.matrix).norm;
    r.passes = r.spectral_norm < 1.0;
    return r;
}

std::vector<LhatConstants> fit_lhat(const GameSpec& game, double eta, double mu, RngStream& rng, std::size_t pairs,
                                    const std::optional<BoxSet>& region) {
    const BoxSet box = default_region(game, region);
    const std::size_t n = game.num_players();
    const std::size_t dim = game.total_dim();
    std::vector<LhatConstants> out(n);

    auto random_point = [&]() {
        Profile y = game.zero_profile();
        for (std::size_t k = 0; k < dim; ++k) y.values[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * rng.uniform01();
        return y;
    };
    // Log-uniform displacement scale between 1e-4 and 1 of the coordinate width.
    auto offset = [&](std::size_t k) {
        const double scale = std::pow(10.0, -4.0 * rng.uniform01());
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        return sign * scale * (box.hi[k] - box.lo[k]);
    };

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = game.offsets()[i];
        const std::size_t e = game.offsets()[i + 1];
        for (int kind = 0; kind < 2; ++kind) {
            if (kind == 1 && n == 1) break;
            double best = 0.0;
            for (std::size_t s = 0; s < pairs; ++s) {
                const Profile y = random_point();
                Profile w = y;
                for (std::size_t k = 0; k < dim; ++k) {
                    const bool own = k >= b && k < e;
                    if (own == (kind == 0)) w.values[k] = std::clamp(y.values[k] + offset(k), box.lo[k], box.hi[k]);
                }
                double dist = 0.0;
                for (std::size_t k = 0; k < dim; ++k) dist += (w.values[k] - y.values[k]) * (w.values[k] - y.values[k]);
                dist = std::sqrt(dist);
                if (dist == 0.0) continue;
                const auto a = surrogate_map(game, i, y, eta, mu);
                const auto c = surrogate_map(game, i, w, eta, mu);
                double diff = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) diff += (a[k] - c[k]) * (a[k] - c[k]);
                best = std::max(best, std::sqrt(diff) / dist);
            }
            (kind == 0 ? out[i].own : out[i].others) = best;
        }
    }
    return out;
}

std::vector<double> residual_gn(const GameSpec& game, const Profile& x, double eta) {
    game.check_profile(x);
    std::vector<double> out;
    out.reserve(x.values.size());
    for (std::size_t i = 0; i < game.num_players(); ++i) {
        const auto g = envelope_gradient(player_prox_problem(game, i, x, eta, /*with_box=*/true));
        out.insert(out.end(), g.begin(), g.end());
    }
    return out;
}

std::vector<double> residual_gx(const GameSpec& game, const Profile& x, double eta, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("residual_gx: gamma must be positive");
    game.check_profile(x);
    std::vector<double> out;
    out.reserve(x.values.size());
    for (std::size_t i = 0; i < game.num_players(); ++i) {
        const ProxProblem p = player_prox_problem(game, i, x, eta, /*with_box=*/false);
        const auto g = envelope_gradient(p);
        std::vector<double> step(g.size());
        for (std::size_t c = 0; c < g.size(); ++c) step[c] = p.center[c] - gamma * g[c];
        game.player(i).set.project_in_place(step);
        for (std::size_t c = 0; c < g.size(); ++c) out.push_back((p.center[c] - step[c]) / gamma);
    }
    return out;
}

double expected_error(const std::vector<Profile>& paths, const Profile& oracle_eq) {
    if (paths.empty()) throw std::invalid_argument("expected_error: no paths");
    double total = 0.0;
    for (const auto& x : paths) {
        if (x.offsets != oracle_eq.offsets) throw std::invalid_argument("expected_error: dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < x.num_players(); ++i) {
            double e = 0.0;
            const auto a = x.slice(i);
            const auto b = oracle_eq.slice(i);
            for (std::size_t c = 0; c < a.size(); ++c) e += (a[c] - b[c]) * (a[c] - b[c]);
            s += e;  // squared per-player norm
        }
        total += std::sqrt(s);
    }
    return total / static_cast<double>(paths.size());
}

double potential_value(const GameSpec& game, const Profile& x, double eta) {
    if (game.potentiality() != Potentiality::Aggregative)
        throw std::invalid_argument("potential_value: game has no aggregative structure");
    double v = 0.0;
    for (std::size_t i = 0; i < game.num_players(); ++i)
        v += envelope_value(player_prox_problem(game, i, x, eta, /*with_box=*/true));
    return v;
}

double qne_gap_1d(const GameSpec& game, const Profile& x) {
    game.check_profile(x);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < game.num_players(); ++i) {
        const auto& p = game.player(i);
        if (p.dim != 1) throw std::invalid_argument("qne_gap_1d: one-dimensional players only");
        const double xi = x.slice(i)[0];
        const double lin = game.expected_linear(i, x)[0];
        const auto& f = game.expected_own(i, 0);
        const double right = f.right_slope(xi) + lin;
        const double left = f.left_slope(xi) + lin;
        gap = std::min(gap, (p.set.hi[0] - xi) * right);
        gap = std::min(gap, (p.set.lo[0] - xi) * left);
    }
    return gap;
}

double qne_bound(double eta, double L, double D, double M_star) {
    if (eta < 0.0 || L < 0.0 || D < 0.0 || M_star < 0.0) throw std::invalid_argument("qne_bound: negative input");
    return eta * L * D * M_star;
}

double envelope_gradient_bound(const GameSpec& game, const Profile& x, double eta) {
    double m = 0.0;
    for (std::size_t i = 0; i < game.num_players(); ++i)
        m = std::max(m, std::sqrt(squared(envelope_gradient(player_prox_problem(game, i, x, eta, false)))));
    return m;
}

double subgradient_lipschitz_bound(const GameSpec& game) {
    double L = 0.0;
    for (std::size_t i = 0; i < game.num_players(); ++i)
        for (std::size_t c = 0; c < game.player(i).dim; ++c)
            for (const auto& q : game.expected_own(i, c).pieces()) L = std::max(L, std::abs(2.0 * q.a));
    return L;
}

double smoothed_residual_lemma_slack(const GameSpec& game, const Profile& x, std::size_t i, double eta, double mu) {
    const auto g = envelope_gradient(player_prox_problem(game, i, x, eta, /*with_box=*/true));
    const auto br = exact_smoothed_br(game, i, x, eta, mu);
    const auto xi = x.slice(i);
    double d = 0.0;
    for (std::size_t c = 0; c < br.size(); ++c) d += (br[c] - xi[c]) * (br[c] - xi[c]);
    return std::sqrt(squared(g)) - (mu + 1.0 / eta) * std::sqrt(d);
}

double surrogate_residual_lemma_slack(const GameSpec& game, const Profile& x, std::size_t i, double eta, double mu,
                                      double gamma) {
    const ProxProblem p = player_prox_problem(game, i, x, eta, /*with_box=*/false);
    const auto g = envelope_gradient(p);
    std::vector<double> step(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) step[c] = p.center[c] - gamma * g[c];
    game.player(i).set.project_in_place(step);
    double r = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) r += (p.center[c] - step[c]) * (p.center[c] - step[c]);
    const auto br = exact_surrogate_br(game, i, x, eta, mu);
    double d = 0.0;
    for (std::size_t c = 0; c < br.size(); ++c) d += (br[c] - p.center[c]) * (br[c] - p.center[c]);
    return std::sqrt(r) / gamma - mu * std::sqrt(d);
}

}  // namespace msgames
