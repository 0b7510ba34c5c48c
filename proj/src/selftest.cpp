#include "msgames/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "msgames/benchmarks.hpp"
#include "msgames/diagnostics.hpp"
#include "msgames/harness.hpp"
#include "msgames/inner_solvers.hpp"
#include "msgames/linalg.hpp"
#include "msgames/moreau.hpp"
#include "msgames/rng.hpp"
#include "msgames/schemes.hpp"

namespace msgames {

namespace {

class Suite {
public:
    explicit Suite(std::string name) { res_.name = std::move(name); }

    void expect(bool ok, const std::function<std::string()>& what) {
        if (ok) {
            ++res_.passed;
            return;
        }
        ++res_.failed;
        if (res_.failures.size() < 5) res_.failures.push_back(what());
    }

    SuiteResult finish(std::chrono::steady_clock::time_point start) {
        res_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res_;
    }

private:
    SuiteResult res_;
};

std::string num(double v) { return short_double(v); }

// Minimizer of a convex function on [lo, hi] by golden-section search.
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 400 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    double best = 0.5 * (a + b);
    for (double cand : {lo, hi})
        if (f(cand) < f(best)) best = cand;
    return best;
}

PiecewiseQuadratic1D random_convex_pq(RngStream& rng) {
    const auto pieces = 1 + rng.uniform_index(4);
    std::vector<Quadratic> qs;
    for (std::uint64_t k = 0; k < pieces; ++k)
        qs.push_back({0.05 + 1.95 * rng.uniform01(), -3.0 + 6.0 * rng.uniform01(), -2.0 + 4.0 * rng.uniform01()});
    return PiecewiseQuadratic1D::max_of(qs);
}

// ---------------------------------------------------------------- Moreau

SuiteResult moreau_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("moreau");
    RngStream rng(seed, 0, purpose::kSelfTest);
    for (int trial = 0; trial < 400; ++trial) {
        const PiecewiseQuadratic1D f = random_convex_pq(rng);
        const double lin = -2.0 + 4.0 * rng.uniform01();
        const bool boxed = rng.uniform01() < 0.5;
        const double lo = -4.0 + 3.0 * rng.uniform01();
        const double hi = lo + 0.5 + 5.0 * rng.uniform01();
        const double center = boxed ? lo + (hi - lo) * rng.uniform01() : -5.0 + 10.0 * rng.uniform01();
        for (double eta : {0.1, 1.0, 3.0}) {
            ProxProblem p;
            p.own_cost = {f};
            p.linear_term = {lin};
            if (boxed) p.box = BoxSet({lo}, {hi});
            p.eta = eta;
            p.center = {center};
            const double y = prox_exact(p)[0];
            auto phi = [&](double v) { return f.value(v) + lin * v + (v - center) * (v - center) / (2.0 * eta); };

            // Brute-force reference on a window that must contain the minimizer.
            double blo = lo, bhi = hi;
            if (!boxed) {
                const double reach = eta * (std::abs(f.subgradient(center)) + std::abs(lin)) + 1.0;
                blo = center - reach;
                bhi = center + reach;
            }
            const double yb = golden_min(phi, blo, bhi);
            const double scale = 1.0 + std::abs(phi(yb));
            s.expect(phi(y) <= phi(yb) + 1e-12 * scale, [&] {
                return "prox value above brute force: eta=" + num(eta) + " phi(prox)=" + num(phi(y)) +
                       " phi(brute)=" + num(phi(yb));
            });
            s.expect(std::abs(y - yb) <= 1e-6, [&] { return "prox location " + num(y) + " vs brute " + num(yb); });

            // One-sided first-order certificate at the prox point.
            const double tol = 1e-9 * (1.0 + std::abs(f.subgradient(y)) + std::abs(lin) + std::abs(y - center) / eta);
            const double dl = f.left_slope(y) + lin + (y - center) / eta;
            const double dr = f.right_slope(y) + lin + (y - center) / eta;
            const bool at_lo = boxed && y <= lo;
            const bool at_hi = boxed && y >= hi;
            s.expect((at_lo || dl <= tol) && (at_hi || dr >= -tol), [&] {
                return "first-order certificate fails at prox " + num(y) + " (left " + num(dl) + ", right " + num(dr) + ")";
            });

            // Moreau identities.
            const double g = envelope_gradient(p)[0];
            s.expect(std::abs(std::abs(y - center) - eta * std::abs(g)) <= 1e-9 * (1.0 + std::abs(y - center)),
                     [&] { return "|prox - x| != eta |grad|"; });
            const double fx = f.value(center) + lin * center;
            const double fy = f.value(y) + lin * y;
            s.expect(!boxed || fy <= fx + 1e-12 * (1.0 + std::abs(fx)), [&] { return "f(prox) > f(x)"; });
        }
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- inner solvers

SuiteResult inner_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("inner");
    RngStream rng(seed, 1, purpose::kSelfTest);
    const GameSpec sc = build_cournot_sc();
    const GameSpec cg = build_congestion();
    const GameSpec wc = build_cournot_wc();

    s.expect(imgm_steps_for(1.0, 0.5, 1.0) == 0, [] { return "imgm_steps_for(1) != 0"; });
    std::uint64_t prev = 0;
    for (double eps : {0.5, 0.1, 1e-2, 1e-4, 1e-8}) {
        const auto j = imgm_steps_for(eps, 0.5, 1.0);
        s.expect(j >= prev && std::pow(0.5, static_cast<double>(j)) <= eps * eps, [&] {
            return "imgm_steps_for not monotone or too small at eps=" + num(eps);
        });
        prev = j;
    }

    for (const GameSpec* g : {&sc, &cg}) {
        for (int trial = 0; trial < 8; ++trial) {
            Profile x = g->zero_profile();
            for (std::size_t i = 0; i < g->num_players(); ++i) {
                const auto& b = g->player(i).set;
                x.slice(i)[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * rng.uniform01();
            }
            const double eta = trial % 2 ? 1.0 : 3.0;
            const double mu = trial % 3 ? 2.0 : 0.5;
            const std::size_t i = trial % g->num_players();
            const auto exact = exact_smoothed_br(*g, i, x, eta, mu);

            // Independent reference: minimize envelope + prox term with a nested search.
            const auto& box = g->player(i).set;
            auto objective_at = [&](double y) {
                Profile z = x;
                z.slice(i)[0] = y;
                return evaluate_expected_objective(*g, i, z);
            };
            auto envelope = [&](double w) {
                const double y = golden_min([&](double v) { return objective_at(v) + (v - w) * (v - w) / (2 * eta); },
                                            box.lo[0], box.hi[0]);
                return objective_at(y) + (y - w) * (y - w) / (2 * eta);
            };
            const double xi = x.slice(i)[0];
            const double ref = golden_min([&](double w) { return envelope(w) + 0.5 * mu * (w - xi) * (w - xi); },
                                          box.lo[0] - 5.0, box.hi[0] + 5.0);
            s.expect(std::abs(exact[0] - ref) <= 1e-6,
                     [&] { return g->name() + ": exact smoothed BR " + num(exact[0]) + " vs nested search " + num(ref); });

            RngStream unused(seed, 2, purpose::kSelfTest);
            const auto sched = ImgmSchedule::for_scheme(0.5, 1, std::nullopt, eta, mu);
            const auto z = imgm_solve(*g, i, x, eta, mu, 400, sched, OracleMode::Analytic, unused);
            s.expect(std::abs(z.z[0] - exact[0]) <= 1e-9,
                     [&] { return g->name() + ": analytic IMGM did not reach the exact response"; });
        }
    }

    // Sample accounting: total samples equal the schedule sum.
    {
        Profile x = sc.uniform_profile(1.0);
        RngStream r(seed, 3, purpose::kSelfTest);
        const auto sched = ImgmSchedule::for_scheme(0.5, 1, 256, 1.0, 2.0);
        const auto res = imgm_solve(sc, 0, x, 1.0, 2.0, 12, sched, OracleMode::Stochastic, r);
        std::uint64_t want = 0;
        for (std::uint64_t t = 0; t < 12; ++t) want += sched.samples_at(t);
        s.expect(res.samples == want, [&] { return "IMGM sample count " + std::to_string(res.samples); });
        s.expect(res.capped, [] { return "cap at 256 should have been reported"; });
    }

    // Surrogate step: Euclidean projection of x_i - grad/mu, grad from a brute-force prox.
    for (int trial = 0; trial < 10; ++trial) {
        Profile x = wc.zero_profile();
        for (std::size_t i = 0; i < 4; ++i) x.slice(i)[0] = 3.0 + 9.0 * rng.uniform01();
        const double eta = 0.3 + 0.5 * rng.uniform01();
        const double mu = 1.0 / eta;
        const std::size_t i = static_cast<std::size_t>(trial % 4);
        const double xi = x.slice(i)[0];
        auto phi = [&](double v) {
            Profile z = x;
            z.slice(i)[0] = v;
            return evaluate_expected_objective(wc, i, z) + (v - xi) * (v - xi) / (2 * eta);
        };
        const double y = golden_min(phi, xi - 30.0, xi + 30.0);
        const double want = std::clamp(xi - (xi - y) / eta / mu, 3.0, 12.0);
        RngStream unused(seed, 4, purpose::kSelfTest);
        const auto got = oimgm_step(wc, i, x, eta, mu, 1, OracleMode::Analytic, unused).z[0];
        s.expect(std::abs(got - want) <= 1e-6, [&] { return "surrogate step " + num(got) + " vs " + num(want); });
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- residual lemmas

SuiteResult residual_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("residual-lemmas");
    RngStream rng(seed, 5, purpose::kSelfTest);
    const GameSpec sc = build_cournot_sc();
    const GameSpec cg = build_congestion();
    const GameSpec wc = build_cournot_wc();
    auto random_profile = [&](const GameSpec& g) {
        Profile x = g.zero_profile();
        for (std::size_t i = 0; i < g.num_players(); ++i) {
            const auto& b = g.player(i).set;
            x.slice(i)[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * rng.uniform01();
        }
        return x;
    };
    for (int trial = 0; trial < 60; ++trial) {
        for (const GameSpec* g : {&sc, &cg}) {
            const Profile x = random_profile(*g);
            const double eta = 0.5 + 2.5 * rng.uniform01();
            const double mu = 0.2 + 4.0 * rng.uniform01();
            for (std::size_t i = 0; i < g->num_players(); ++i) {
                const double slack = smoothed_residual_lemma_slack(*g, x, i, eta, mu);
                s.expect(slack <= 1e-9, [&] { return g->name() + ": smoothed residual bound violated by " + num(slack); });
            }
        }
        const Profile x = random_profile(wc);
        const double eta = 0.3 + 0.5 * rng.uniform01();
        const double mu = (0.6 + 0.6 * rng.uniform01()) / eta;
        const double gamma = 2.0 / mu;
        for (std::size_t i = 0; i < 4; ++i) {
            const double slack = surrogate_residual_lemma_slack(wc, x, i, eta, mu, gamma);
            s.expect(slack <= 1e-9, [&] { return "surrogate residual bound violated by " + num(slack); });
        }
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- oracles

SuiteResult oracle_suite() {
    const auto start = std::chrono::steady_clock::now();
    Suite s("oracles");
    for (const std::string id : {"cournot-sc", "congestion"}) {
        const GameSpec g = build_benchmark(id);
        const Profile a = oracle_fixed_point(g);
        const Profile b = oracle_grid(g);
        double d = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
        s.expect(d <= 1e-6, [&] { return id + ": fixed-point and grid oracles differ by " + num(d); });
        const double r = euclidean_norm(residual_gn(g, a, 1.0));
        s.expect(r <= 1e-9, [&] { return id + ": residual at the oracle equilibrium " + num(r); });
        s.expect(qne_gap_1d(g, a) >= -1e-6, [&] { return id + ": QNE gap at the oracle equilibrium"; });
    }
    {
        const GameSpec g = build_congestion();
        const Profile a = oracle_fixed_point(g);
        const Profile c = congestion_closed_form();
        double d = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - c.values[k]));
        s.expect(d <= 1e-10, [&] { return "congestion closed form mismatch " + num(d); });
    }
    {
        const GameSpec g = build_cournot_wc();
        const Profile b = oracle_grid(g);
        for (double v : b.values)
            s.expect(std::abs(v - 40.0 / 7.0) <= 1e-4, [&] { return "cournot-wc grid oracle at " + num(v); });
        s.expect(qne_gap_1d(g, cournot_wc_closed_form()) >= -1e-6, [] { return "cournot-wc: 40/7 is not a QNE"; });
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- potential

SuiteResult potential_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("potential");
    RngStream rng(seed, 6, purpose::kSelfTest);
    const GameSpec g = build_congestion();
    const std::size_t n = g.num_players();
    auto brute_envelope = [&](std::size_t i, const Profile& x, double eta) {
        const double xi = x.slice(i)[0];
        auto phi = [&](double v) {
            Profile z = x;
            z.slice(i)[0] = v;
            return evaluate_expected_objective(g, i, z) + (v - xi) * (v - xi) / (2 * eta);
        };
        return phi(golden_min(phi, 0.0, 10.0));
    };
    for (int trial = 0; trial < 100; ++trial) {
        Profile x = g.zero_profile();
        for (std::size_t i = 0; i < n; ++i) x.slice(i)[0] = 10.0 * rng.uniform01();
        const std::size_t i = rng.uniform_index(n);
        Profile y = x;
        y.slice(i)[0] = 10.0 * rng.uniform01();
        const double eta = trial % 2 ? 0.5 : 2.0;
        const double lhs = brute_envelope(i, x, eta) - brute_envelope(i, y, eta);
        const double rhs = potential_value(g, x, eta) - potential_value(g, y, eta);
        s.expect(std::abs(lhs - rhs) <= 1e-9, [&] { return "potential identity off by " + num(lhs - rhs); });
    }

    // Exact-response asynchronous runs descend the potential pathwise.
    SchemeConfig cfg;
    cfg.scheme = Scheme::MS_ABR;
    cfg.eta = 2.0;
    cfg.mu = 0.5;
    cfg.K = 150;
    cfg.inner_solver = InnerSolver::Exact;
    cfg.emit_iterates = true;
    cfg.paths = 3;
    cfg.seed = seed;
    cfg.early_stop = 0.0;
    const RunRecord rec = run_scheme(g, cfg);
    for (const auto& path : rec.paths) {
        for (std::size_t k = 0; k + 1 < path.iterates.size(); ++k) {
            const Profile& a = path.iterates[k];
            const Profile& b = path.iterates[k + 1];
            const auto i = static_cast<std::size_t>(path.rows[k + 1].selected);
            const double step = b.slice(i)[0] - a.slice(i)[0];
            const double bound = potential_value(g, a, cfg.eta) - (cfg.mu - 1.0 / (2.0 * cfg.eta)) * step * step + 1e-10;
            s.expect(potential_value(g, b, cfg.eta) <= bound, [&] { return "potential increased at k=" + std::to_string(k); });
        }
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- linear algebra

SuiteResult spectral_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("spectral-norm");
    RngStream rng(seed, 7, purpose::kSelfTest);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix m(2, 2);
        for (auto& v : m.data) v = rng.uniform01();
        // Largest singular value of a 2x2 matrix in closed form.
        const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        const double fro = a * a + b * b + c * c + d * d;
        const double det = a * d - b * c;
        const double want = std::sqrt(0.5 * (fro + std::sqrt(std::max(0.0, fro * fro - 4.0 * det * det))));
        const auto got = spectral_norm(m);
        s.expect(std::abs(got.norm - want) <= 1e-9 * (1.0 + want),
                 [&] { return "spectral norm " + num(got.norm) + " vs closed form " + num(want); });
    }
    return s.finish(start);
}

// ---------------------------------------------------------------- determinism

SuiteResult determinism_suite(std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Suite s("determinism");
    {
        RngStream a(seed, 3, 9), b(seed, 3, 9), c(seed, 3, 10);
        bool same = true, differs = false;
        for (int k = 0; k < 100; ++k) {
            const auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
            same = same && va == vb;
            differs = differs || va != vc;
        }
        s.expect(same, [] { return "equal keys gave different streams"; });
        s.expect(differs, [] { return "distinct purposes gave identical streams"; });
    }
    const GameSpec g = build_congestion();
    SchemeConfig cfg;
    cfg.scheme = Scheme::MS_ABR;
    cfg.eta = 2.0;
    cfg.mu = 0.5;
    cfg.K = 25;
    cfg.mode = OracleMode::Stochastic;
    cfg.inner.sample_cap = 64;
    cfg.inner.max_steps = 8;
    cfg.paths = 3;
    cfg.seed = seed + 17;
    auto serialize = [](const RunRecord& r) {
        std::ostringstream os;
        write_metrics_csv(r, os);
        for (const auto& p : r.paths) os << p.r_index << ';';
        return os.str();
    };
    const auto first = serialize(run_scheme(g, cfg));
    cfg.jobs = 3;
    const auto second = serialize(run_scheme(g, cfg));
    s.expect(first == second, [] { return "stochastic run not reproducible across job counts"; });
    return s.finish(start);
}

}  // namespace

std::vector<SuiteResult> run_selftest(std::uint64_t seed) {
    std::vector<SuiteResult> out;
    auto guarded = [&](const std::string& name, const std::function<SuiteResult()>& fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            SuiteResult r;
            r.name = name;
            r.failed = 1;
            r.failures.push_back(std::string("exception: ") + e.what());
            out.push_back(r);
        }
    };
    guarded("moreau", [&] { return moreau_suite(seed); });
    guarded("inner", [&] { return inner_suite(seed); });
    guarded("residual-lemmas", [&] { return residual_suite(seed); });
    guarded("oracles", [] { return oracle_suite(); });
    guarded("potential", [&] { return potential_suite(seed); });
    guarded("spectral-norm", [&] { return spectral_suite(seed); });
    guarded("determinism", [&] { return determinism_suite(seed); });
    return out;
}

int cmd_selftest(std::ostream& out, std::uint64_t seed) {
    const auto results = run_selftest(seed);
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.failed == 0;
        out << (r.failed == 0 ? "PASS " : "FAIL ") << r.name << ": " << r.passed << " passed, " << r.failed
            << " failed (" << short_double(std::round(r.seconds * 1000.0) / 1000.0) << " s)\n";
        for (const auto& f : r.failures) out << "    " << f << '\n';
    }
    out << (ok ? "selftest passed\n" : "selftest FAILED\n");
    return ok ? kExitOk : kExitRuntime;
}

}  // namespace msgames
