// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "msgames/benchmarks.hpp"
#include "msgames/diagnostics.hpp"
#include "msgames/moreau.hpp"
#include "msgames/rng.hpp"
#include "msgames/schemes.hpp"

using namespace msgames;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failures;
    void require(bool ok, const std::string& why) {
        if (ok) return;
        failures += (pass ? "" : "; ") + why;
        pass = false;
    }
};

int hw_jobs() { return static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency()))); }

// Slopes of a max of quadratics straight from the pieces.
struct MaxOfQuadratics {
    std::vector<Quadratic> q;
    double value(double y) const {
        double v = -kInf;
        for (const auto& p : q) v = std::max(v, p.value(y));
        return v;
    }
    std::pair<double, double> one_sided(double y) const {
        const double v = value(y);
        double lo = kInf, hi = -kInf;
        for (const auto& p : q) {
            if (p.value(y) >= v - 1e-9 * (1.0 + std::abs(v))) {
                lo = std::min(lo, p.slope(y));
                hi = std::max(hi, p.slope(y));
            }
        }
        return {lo, hi};
    }
};

MaxOfQuadratics random_convex(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> a(0.0, 2.0), b(-4.0, 4.0), c(-2.0, 2.0);
    std::uniform_int_distribution<int> n(1, 5);
    MaxOfQuadratics m;
    const int k = n(gen);
    for (int j = 0; j < k; ++j) m.q.push_back({a(gen), b(gen), c(gen)});
    return m;
}

ProxProblem scalar_problem(const PiecewiseQuadratic1D& f, double eta, double x) {
    ProxProblem p;
    p.own_cost = {f};
    p.eta = eta;
    p.center = {x};
    return p;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi, c = b - r * (b - a), d = a + r * (b - a), fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && b - a > 1e-13; ++it) {
        if (fc <= fd) {
            b = d, d = c, fd = fc, c = b - r * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd, d = a + r * (b - a), fd = f(d);
        }
    }
    double best = 0.5 * (a + b);
    for (double e : {lo, hi})
        if (f(e) < f(best)) best = e;
    return best;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

SchemeConfig make(Scheme s, double eta, double mu, int K) {
    SchemeConfig c;
    c.scheme = s;
    c.eta = eta;
    c.mu = mu;
    c.K = K;
    c.jobs = hw_jobs();
    return c;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ------------------------------------------------------------------ criteria

void c1(Outcome& o) {
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> xs(-6.0, 6.0);
    const auto start = std::chrono::steady_clock::now();
    double worst_id = 0.0, worst_cert = 0.0, worst_descent = -kInf;
    for (int trial = 0; trial < 1000; ++trial) {
        const MaxOfQuadratics m = random_convex(gen);
        const PiecewiseQuadratic1D f = PiecewiseQuadratic1D::max_of(m.q);
        const double x = xs(gen);
        for (double eta : {0.1, 1.0, 3.0}) {
            const ProxProblem p = scalar_problem(f, eta, x);
            const double y = prox_exact(p)[0];
            // Optimality of y certified from the raw pieces: 0 lies in
            // [f'_-(y), f'_+(y)] + (y - x)/eta.
            const auto [l, r] = m.one_sided(y);
            const double s = (y - x) / eta;
            worst_cert = std::max({worst_cert, l + s, -(r + s)});
            const double g = envelope_gradient(p)[0];
            worst_id = std::max(worst_id, std::abs(std::abs(y - x) - eta * std::abs(g)));
            worst_descent = std::max(worst_descent, m.value(y) - m.value(x));
        }
    }
    const double secs = seconds_since(start);
    o.require(worst_cert <= 1e-9, "prox certificate violated by " + sci(worst_cert));
    o.require(worst_id <= 1e-9, "identity gap " + sci(worst_id));
    o.require(worst_descent <= 1e-12, "descent violated by " + sci(worst_descent));
    o.require(secs < 5.0, "runtime " + sci(secs) + " s");
    o.detail << "3000 cases, identity gap " << sci(worst_id) << ", certificate " << sci(worst_cert) << ", descent "
             << sci(worst_descent) << ", " << sci(secs) << " s";
}

void c2(Outcome& o) {
    std::mt19937_64 gen(202);
    std::uniform_real_distribution<double> xs(-6.0, 6.0), etas(0.1, 3.0);
    int used = 0, skipped = 0;
    double worst = 0.0;
    while (used < 500) {
        const MaxOfQuadratics m = random_convex(gen);
        const PiecewiseQuadratic1D f = PiecewiseQuadratic1D::max_of(m.q);
        const double x = xs(gen), eta = etas(gen), h = 1e-5;
        // Skip points whose prox sits on a breakpoint or changes regime
        // within the differencing stencil.
        ProxRegime r0{}, r1{}, r2{};
        std::size_t i0 = 0, i1 = 0, i2 = 0;
        prox_scalar(f, 1.0, 0.0, eta, x, -kInf, kInf, &r0, &i0);
        prox_scalar(f, 1.0, 0.0, eta, x - 2 * h, -kInf, kInf, &r1, &i1);
        prox_scalar(f, 1.0, 0.0, eta, x + 2 * h, -kInf, kInf, &r2, &i2);
        if (r0 == ProxRegime::Breakpoint || r0 != r1 || r0 != r2 || i0 != i1 || i0 != i2) {
            ++skipped;
            continue;
        }
        const double fd = (envelope_value(scalar_problem(f, eta, x + h)) - envelope_value(scalar_problem(f, eta, x - h))) /
                          (2 * h);
        const double g = envelope_gradient(scalar_problem(f, eta, x))[0];
        worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(g)));
        ++used;
    }
    o.require(worst <= 1e-6, "relative error " + sci(worst));
    o.detail << "500 points (" << skipped << " skipped near kinks), worst relative error " << sci(worst);
}

void c3(Outcome& o) {
    const GameSpec g = build_cournot_sc();
    double prev = -1.0;
    for (double eta : {1.0, 1.5, 3.0}) {
        const auto rep = gamma1_matrix(g, eta, 2.0);
        o.require(rep.spectral_norm < 1.0, "norm >= 1 at eta " + sci(eta));
        o.require(rep.spectral_norm > prev, "norm not increasing at eta " + sci(eta));
        prev = rep.spectral_norm;
        o.detail << "eta " << eta << ": " << sci(rep.spectral_norm) << "  ";
    }
}

void c4(Outcome& o) {
    const GameSpec g = build_cournot_sc();
    const Profile star = oracle_fixed_point(g);
    const double etas[3] = {1.0, 1.5, 3.0}, mus[4] = {2.0, 4.0, 6.0, 8.0};
    const double published[3][4] = {{2.49e-11, 9.08e-7, 3.66e-5, 2.33e-4},
                                {1.87e-9, 9.71e-6, 1.82e-4, 7.63e-4},
                                {1.45e-6, 3.11e-4, 1.71e-3, 3.74e-3}};
    double cell[3][4];
    double head_secs = 0.0, worst_decades = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 4; ++b) {
            const auto t = std::chrono::steady_clock::now();
            const RunRecord r = run_scheme(g, make(Scheme::MS_SBR, etas[a], mus[b], 100), star);
            if (a == 0 && b == 0) head_secs = seconds_since(t);
            cell[a][b] = r.mean.back().e_k;
            worst_decades = std::max(worst_decades, std::abs(std::log10(cell[a][b] / published[a][b])));
        }
    }
    o.require(cell[0][0] <= 1e-8, "e_K " + sci(cell[0][0]));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a + 1 < 3) o.require(cell[a + 1][b] > cell[a][b], "not increasing in eta at column " + std::to_string(b));
            if (b + 1 < 4) o.require(cell[a][b + 1] > cell[a][b], "not increasing in mu at row " + std::to_string(a));
        }
    o.require(worst_decades <= 3.0, "a cell is " + sci(worst_decades) + " decades from the published value");
    o.require(head_secs < 10.0, "runtime " + sci(head_secs) + " s");
    o.detail << "e_K(1, 2) = " << sci(cell[0][0]) << ", monotone 3x4 grid, max distance to published cells "
             << sci(worst_decades) << " decades, " << sci(head_secs) << " s";
}

void c5(Outcome& o) {
    const GameSpec g = build_cournot_sc();
    SchemeConfig c = make(Scheme::MS_SBR, 1.0, 1.0, 30);
    c.mode = OracleMode::Stochastic;
    c.paths = 10;
    c.seed = 5;
    c.inner.sample_cap = 4096;
    c.inner.max_steps = 40;
    const auto t = std::chrono::steady_clock::now();
    const RunRecord r = run_scheme(g, c, oracle_fixed_point(g));
    const double secs = seconds_since(t);
    o.require(r.mean.back().e_k <= 1e-3, "mean e_K " + sci(r.mean.back().e_k));
    o.require(secs < 300.0, "runtime " + sci(secs) + " s");
    o.detail << "eta 1, mu 1, mean e_K " << sci(r.mean.back().e_k) << " over 10 paths, " << sci(secs) << " s";
}

SchemeConfig abr_stochastic(double eta, int K) {
    SchemeConfig c = make(Scheme::MS_ABR, eta, 1.0 / eta, K);
    c.mode = OracleMode::Stochastic;
    c.paths = 10;
    c.seed = 6;
    c.inner.sample_cap = 4096;
    c.inner.max_steps = 40;
    return c;
}

void c6(Outcome& o) {
    const GameSpec g = build_congestion();
    const Profile star = congestion_closed_form();
    const RunRecord r200 = run_scheme(g, abr_stochastic(2.0, 200), star);
    const RunRecord r400 = run_scheme(g, abr_stochastic(2.0, 400), star);
    double worst = 0.0;
    for (const auto& p : r400.paths)
        for (std::size_t j = 0; j < star.values.size(); ++j)
            worst = std::max(worst, std::abs(p.final.values[j] - star.values[j]));
    o.require(worst <= 1e-2, "coordinate error " + sci(worst));
    const double ratio = r400.expected_resid_at_r / r200.expected_resid_at_r;
    o.require(ratio <= 0.9, "K=400/K=200 residual ratio " + sci(ratio));
    const double at3 = run_scheme(g, abr_stochastic(3.0, 400), star).expected_resid_at_r;
    const double at5 = run_scheme(g, abr_stochastic(5.0, 400), star).expected_resid_at_r;
    o.require(r400.expected_resid_at_r > at3 && at3 > at5, "residual not decreasing in eta");
    o.detail << "max coordinate error " << sci(worst) << ", residual ratio " << sci(ratio) << ", E|G|^2 at eta 2/3/5: "
             << sci(r400.expected_resid_at_r) << " / " << sci(at3) << " / " << sci(at5);
}

void c7(Outcome& o) {
    const GameSpec g = build_cournot_wc();
    const double eta = 0.3, mu = 0.6 / eta;
    SchemeConfig c = make(Scheme::MS_SSBR, eta, mu, 100);
    c.x0 = std::vector<double>(4, 4.0);
    const RunRecord r = run_scheme(g, c, cournot_wc_closed_form());
    double worst = 0.0;
    for (double v : r.paths[0].final.values) worst = std::max(worst, std::abs(v - 40.0 / 7.0));
    o.require(worst <= 1e-3, "coordinate error " + sci(worst));
    // Average per-step decay of e_k before the error reaches roundoff.
    const auto& rows = r.paths[0].rows;
    std::size_t last = 1;
    while (last + 1 < rows.size() && rows[last + 1].e_k > 1e-12) ++last;
    const double rate = std::exp((std::log(rows[last].e_k) - std::log(rows[0].e_k)) / double(last));
    RngStream rng(0, 0, purpose::kDiagnostics);
    const double norm = gamma2_matrix(g, eta, mu, fit_lhat(g, eta, mu, rng)).spectral_norm;
    o.require(rate <= norm + 0.05, "decay ratio " + sci(rate) + " above fitted norm " + sci(norm));
    o.detail << "max |x_i - 40/7| " << sci(worst) << ", decay ratio " << sci(rate) << " vs fitted norm " << sci(norm);
}

SchemeConfig sabr(int K) {
    SchemeConfig c = make(Scheme::MS_SABR, 0.3, 1.0 / 0.3, K);
    c.paths = 10;
    c.seed = 8;
    c.x0 = std::vector<double>(4, 4.0);
    return c;
}

void c8(Outcome& o) {
    const GameSpec g = build_cournot_wc();
    const RunRecord r200 = run_scheme(g, sabr(200));
    const RunRecord r400 = run_scheme(g, sabr(400));
    const double ratio = r400.expected_resid_at_r / r200.expected_resid_at_r;
    o.require(ratio <= 0.9, "K=400/K=200 residual ratio " + sci(ratio));
    double gap = kInf;
    for (const auto& p : r400.paths) gap = std::min(gap, qne_gap_1d(g, p.final));
    o.require(gap >= -1e-3, "qne gap " + sci(gap));
    o.detail << "residual ratio " << sci(ratio) << ", min qne gap " << sci(gap);
}

void c9(Outcome& o) {
    struct Case {
        GameSpec g;
        SchemeConfig c;
    };
    std::vector<Case> cases;
    cases.push_back({build_cournot_sc(), make(Scheme::MS_SBR, 1.0, 2.0, 100)});
    SchemeConfig abr = make(Scheme::MS_ABR, 2.0, 0.5, 400);
    abr.paths = 3;
    cases.push_back({build_congestion(), abr});
    SchemeConfig ssbr = make(Scheme::MS_SSBR, 0.3, 2.0, 100);
    ssbr.x0 = std::vector<double>(4, 4.0);
    cases.push_back({build_cournot_wc(), ssbr});
    SchemeConfig sab = sabr(400);
    sab.paths = 3;
    cases.push_back({build_cournot_wc(), sab});
    double worst = -kInf;
    std::size_t checked = 0;
    for (auto& [g, c] : cases) {
        c.emit_iterates = true;
        const RunRecord r = run_scheme(g, c);
        const bool surrogate = is_surrogate(c.scheme);
        for (const auto& p : r.paths)
            for (const auto& x : p.iterates)
                for (std::size_t i = 0; i < g.num_players(); ++i) {
                    const double s = surrogate
                                         ? surrogate_residual_lemma_slack(g, x, i, c.eta, c.mu, c.gamma_resid_value())
                                         : smoothed_residual_lemma_slack(g, x, i, c.eta, c.mu);
                    worst = std::max(worst, s);
                    ++checked;
                }
    }
    o.require(worst <= 1e-9, "slack " + sci(worst));
    o.detail << checked << " (iterate, player) checks across four schemes, max slack " << sci(worst);
}

void c10(Outcome& o) {
    const GameSpec g = build_cournot_sc();
    const Profile star = oracle_fixed_point(g);
    const Profile a = run_scheme(g, make(Scheme::MS_SBR, 1.0, 2.0, 500)).paths[0].final;
    const Profile b = run_scheme(g, make(Scheme::MS_SBR, 3.0, 2.0, 500)).paths[0].final;
    double ab = 0.0, as = 0.0, bs = 0.0;
    for (std::size_t j = 0; j < star.values.size(); ++j) {
        ab = std::max(ab, std::abs(a.values[j] - b.values[j]));
        as = std::max(as, std::abs(a.values[j] - star.values[j]));
        bs = std::max(bs, std::abs(b.values[j] - star.values[j]));
    }
    o.require(ab <= 2e-6, "limits differ by " + sci(ab));
    o.require(as <= 1e-6 && bs <= 1e-6, "oracle distance " + sci(std::max(as, bs)));
    o.detail << "|x(1) - x(3)| " << sci(ab) << ", oracle distance " << sci(as) << " / " << sci(bs);
}

void c11(Outcome& o) {
    const GameSpec g = build_congestion();
    const std::size_t n = g.num_players();
    std::mt19937_64 gen(1111);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    auto envelope = [&](std::size_t i, const Profile& x, double eta) {
        const double xi = x.slice(i)[0];
        auto phi = [&](double v) {
            Profile z = x;
            z.slice(i)[0] = v;
            return evaluate_expected_objective(g, i, z) + (v - xi) * (v - xi) / (2 * eta);
        };
        return phi(golden_min(phi, 0.0, 10.0));
    };
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        Profile x = g.zero_profile();
        for (std::size_t i = 0; i < n; ++i) x.slice(i)[0] = u(gen);
        const std::size_t i = gen() % n;
        Profile y = x;
        y.slice(i)[0] = u(gen);
        const double eta = (t % 3 == 0) ? 0.5 : (t % 3 == 1 ? 2.0 : 5.0);
        const double lhs = envelope(i, y, eta) - envelope(i, x, eta);
        const double rhs = potential_value(g, y, eta) - potential_value(g, x, eta);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    o.require(worst <= 1e-9, "identity gap " + sci(worst));

    SchemeConfig c = make(Scheme::MS_ABR, 2.0, 0.5, 400);
    c.paths = 5;
    c.emit_iterates = true;
    c.early_stop = 0.0;
    const RunRecord r = run_scheme(g, c);
    double excess = -kInf;
    for (const auto& p : r.paths)
        for (std::size_t k = 0; k + 1 < p.iterates.size(); ++k) {
            const Profile& a = p.iterates[k];
            const Profile& b = p.iterates[k + 1];
            const auto i = static_cast<std::size_t>(p.rows[k + 1].selected);
            const double step = b.slice(i)[0] - a.slice(i)[0];
            const double drop = (c.mu - 1.0 / (2.0 * c.eta)) * step * step;
            excess = std::max(excess, potential_value(g, b, c.eta) - (potential_value(g, a, c.eta) - drop));
        }
    o.require(excess <= 1e-10, "descent violated by " + sci(excess));
    o.detail << "identity gap " << sci(worst) << " on 100 pairs, max descent excess " << sci(excess);
}

void c12(Outcome& o, const char* cli) {
    double worst = 0.0;
    for (const GameSpec& g : {build_cournot_sc(), build_congestion()}) {
        const Profile a = oracle_fixed_point(g), b = oracle_grid(g);
        for (std::size_t j = 0; j < a.values.size(); ++j) worst = std::max(worst, std::abs(a.values[j] - b.values[j]));
    }
    o.require(worst <= 1e-6, "oracle disagreement " + sci(worst));
    const auto t = std::chrono::steady_clock::now();
    const std::string cmd = std::string("\"") + cli + "\" selftest > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t);
    o.require(rc == 0, "selftest exited with status " + std::to_string(rc));
    o.require(secs < 120.0, "selftest took " + sci(secs) + " s");
    o.detail << "oracle disagreement " << sci(worst) << ", selftest status " << rc << " in " << sci(secs) << " s";
}

}  // namespace

int main(int argc, char** argv) {
    const char* cli = argc > 1 ? argv[1] : MSGAMES_CLI_PATH;
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
        {1, c1}, {2, c2}, {3, c3}, {4, c4},  {5, c5},  {6, c6},
        {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}, {12, [cli](Outcome& o) { c12(o, cli); }},
    };
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        const auto t = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.failures += std::string("exception: ") + e.what();
        }
        std::string line = o.detail.str();
        if (!o.pass) line += " [failed: " + o.failures + "]";
        std::printf("%s criterion %d: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, line.c_str(), seconds_since(t));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
