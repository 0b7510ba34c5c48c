#include "msgames/moreau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msgames {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
    double y;
    double value;
};

}  // namespace

const char* to_string(OracleMode m) { return m == OracleMode::Analytic ? "analytic" : "stochastic"; }

void ProxProblem::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("prox: eta must be positive");
    if (own_cost.size() != center.size()) throw std::invalid_argument("prox: own_cost/center dimension mismatch");
    if (!linear_term.empty() && linear_term.size() != center.size())
        throw std::invalid_argument("prox: linear_term dimension mismatch");
    if (box && box->dim() != center.size()) throw std::invalid_argument("prox: box dimension mismatch");
    double r = 0.0;
    for (const auto& f : own_cost) {
        if (f.empty()) throw std::invalid_argument("prox: empty piece list");
        r = std::max(r, coeff_mean >= 0.0 ? coeff_mean * f.rho() : -coeff_mean * f.sigma());
    }
    const double rr = rho.value_or(r);
    if (eta * rr >= 1.0) throw std::invalid_argument("prox: eta * rho must be below 1");
}

double prox_scalar(const PiecewiseQuadratic1D& f, double coeff, double linear, double eta, double center, double lo,
                   double hi, ProxRegime* regime, std::size_t* index) {
    if (f.empty()) throw std::invalid_argument("prox: empty piece list");
    const double inv = 1.0 / eta;
    auto phi = [&](double y) {
        const double d = y - center;
        return coeff * f.value(y) + linear * y + 0.5 * inv * d * d;
    };

    std::vector<Candidate> cand;
    cand.reserve(3 * f.size() + 2);
    auto add = [&](double y) {
        if (y >= lo && y <= hi) cand.push_back({y, 0.0});
    };

    for (std::size_t k = 0; k < f.size(); ++k) {
        const double L = std::max(f.piece_lo(k), lo);
        const double R = std::min(f.piece_hi(k), hi);
        if (L > R) continue;
        const auto& q = f.pieces()[k];
        const double A = coeff * q.a + 0.5 * inv;
        const double B = coeff * q.b + linear - center * inv;
        if (A > 0.0) {
            add(std::clamp(-B / (2.0 * A), L, R));
        } else {
            const bool down_left = A < 0.0 || B > 0.0;
            const bool down_right = A < 0.0 || B < 0.0;
            if ((std::isinf(L) && down_left) || (std::isinf(R) && down_right))
                throw std::domain_error("prox: objective unbounded below on an unbounded piece");
        }
        if (std::isfinite(L)) add(L);
        if (std::isfinite(R)) add(R);
    }
    for (double b : f.breaks()) add(b);
    if (std::isfinite(lo)) add(lo);
    if (std::isfinite(hi)) add(hi);
    if (cand.empty()) throw std::domain_error("prox: no feasible candidate");

    std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.y < b.y; });
    for (auto& c : cand) c.value = phi(c.y);

    double best = kInf;
    for (const auto& c : cand) best = std::min(best, c.value);

    double chosen = 0.0;
#ifdef MSGAMES_FAULT_INJECT_PROX
    // Negative control: loose ties resolved toward the largest coordinate.
    {
        const double slack = 1e-2 * std::max(1.0, std::abs(best));
        for (const auto& c : cand)
            if (c.value <= best + slack) chosen = c.y;
    }
#else
    {
        // Near-ties in value cannot separate candidates closer than about
        // sqrt(eps); prefer the candidate that satisfies the one-sided
        // first-order conditions, falling back to the smallest minimizer.
        const double slack = 1e-12 * std::max(1.0, std::abs(best));
        bool found = false;
        bool have_fallback = false;
        double fallback = 0.0;
        for (const auto& c : cand) {
            if (c.value > best + slack) continue;
            if (!have_fallback && c.value == best) {
                fallback = c.y;
                have_fallback = true;
            }
            const double sl = f.left_slope(c.y);
            const double sr = f.right_slope(c.y);
            const double base = linear + (c.y - center) * inv;
            const double dl = coeff * sl + base;
            const double dr = coeff * sr + base;
            const double tol =
                1e-10 * (1.0 + std::abs(coeff) * (std::abs(sl) + std::abs(sr)) + std::abs(linear) +
                         std::abs(c.y - center) * inv + std::abs(center) * inv);
            const bool left_ok = c.y <= lo || dl <= tol;
            const bool right_ok = c.y >= hi || dr >= -tol;
            if (left_ok && right_ok) {
                chosen = c.y;
                found = true;
                break;
            }
        }
        if (!found) chosen = fallback;
    }
#endif

    if (regime || index) {
        ProxRegime r = ProxRegime::PieceInterior;
        std::size_t idx = 0;
        const auto& br = f.breaks();
        auto it = std::find(br.begin(), br.end(), chosen);
        if (chosen == lo) {
            r = ProxRegime::BoxLower;
        } else if (chosen == hi) {
            r = ProxRegime::BoxUpper;
        } else if (it != br.end()) {
            r = ProxRegime::Breakpoint;
            idx = static_cast<std::size_t>(it - br.begin());
        } else {
            idx = f.first_active(chosen);
        }
        if (regime) *regime = r;
        if (index) *index = idx;
    }
    return chosen;
}

ProxDetail prox_exact_detail(const ProxProblem& p) {
    p.validate();
    ProxDetail out;
    const std::size_t n = p.dim();
    out.y.resize(n);
    out.regime.resize(n);
    out.index.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const double lin = p.linear_term.empty() ? 0.0 : p.linear_term[c];
        const double lo = p.box ? p.box->lo[c] : -kInf;
        const double hi = p.box ? p.box->hi[c] : kInf;
        out.y[c] = prox_scalar(p.own_cost[c], p.coeff_mean, lin, p.eta, p.center[c], lo, hi, &out.regime[c],
                               &out.index[c]);
    }
    return out;
}

std::vector<double> prox_exact(const ProxProblem& p) {
    p.validate();
    std::vector<double> y(p.dim());
    for (std::size_t c = 0; c < p.dim(); ++c) {
        const double lin = p.linear_term.empty() ? 0.0 : p.linear_term[c];
        const double lo = p.box ? p.box->lo[c] : -kInf;
        const double hi = p.box ? p.box->hi[c] : kInf;
        y[c] = prox_scalar(p.own_cost[c], p.coeff_mean, lin, p.eta, p.center[c], lo, hi);
    }
    return y;
}

double prox_objective(const ProxProblem& p, const std::vector<double>& y) {
    double v = 0.0;
    for (std::size_t c = 0; c < p.dim(); ++c) {
        const double lin = p.linear_term.empty() ? 0.0 : p.linear_term[c];
        const double d = y[c] - p.center[c];
        v += p.coeff_mean * p.own_cost[c].value(y[c]) + lin * y[c] + d * d / (2.0 * p.eta);
    }
    return v;
}

std::vector<double> prox_pssm(const ProxProblem& p, const GameSpec& game, std::size_t i, const Profile& x,
                              std::uint64_t T, RngStream& rng) {
    if (T == 0) throw std::invalid_argument("prox_pssm: T must be positive");
    if (!(p.eta > 0.0)) throw std::invalid_argument("prox_pssm: eta must be positive");
    const FrozenSubgradientOracle oracle(game, i, x);
    if (oracle.dim() != p.dim()) throw std::invalid_argument("prox_pssm: dimension mismatch");
    const double modulus = game.sigma(i) > 0.0 ? game.sigma(i) : -game.rho(i);
    const double m = modulus + 1.0 / p.eta;
    if (!(m > 0.0)) throw std::invalid_argument("prox_pssm: prox objective is not strongly convex");
    const double inv_eta = 1.0 / p.eta;

    std::vector<double> y = p.center;
    const std::size_t n = y.size();
    for (std::uint64_t t = 0; t < T; ++t) {
        const double u = rng.uniform01();
        const double step = 1.0 / (m * static_cast<double>(t + 1));
        for (std::size_t c = 0; c < n; ++c) {
            const double g = oracle.at(c, y[c], u) + (y[c] - p.center[c]) * inv_eta;
            double next = y[c] - step * g;
            if (p.box) next = std::clamp(next, p.box->lo[c], p.box->hi[c]);
            y[c] = next;
        }
    }
    return y;
}

std::vector<double> envelope_gradient_from_prox(const ProxProblem& p, const std::vector<double>& prox) {
    std::vector<double> g(p.dim());
    for (std::size_t c = 0; c < p.dim(); ++c) g[c] = (p.center[c] - prox[c]) / p.eta;
    return g;
}

std::vector<double> envelope_gradient(const ProxProblem& p) { return envelope_gradient_from_prox(p, prox_exact(p)); }

std::vector<double> envelope_gradient(const ProxProblem& p, OracleMode mode, const GameSpec* game, std::size_t i,
                                      const Profile* x, std::uint64_t T, RngStream* rng) {
    if (mode == OracleMode::Analytic) return envelope_gradient(p);
    if (!game || !x || !rng) throw std::invalid_argument("envelope_gradient: stochastic mode needs game, profile and rng");
    return envelope_gradient_from_prox(p, prox_pssm(p, *game, i, *x, T, *rng));
}

double envelope_value(const ProxProblem& p) { return prox_objective(p, prox_exact(p)); }

ProxProblem player_prox_problem(const GameSpec& game, std::size_t i, const Profile& x, double eta, bool with_box) {
    const auto& pl = game.player(i);
    ProxProblem p;
    p.own_cost.reserve(pl.dim);
    for (std::size_t c = 0; c < pl.dim; ++c) p.own_cost.push_back(game.expected_own(i, c));
    p.coeff_mean = 1.0;
    p.linear_term = game.expected_linear(i, x);
    if (with_box) p.box = pl.set;
    p.eta = eta;
    p.center = x.part(i);
    p.rho = game.rho(i);
    return p;
}

}  // namespace msgames
