#include <cmath>

#include "doctest.h"
#include "msgames/benchmarks.hpp"
#include "msgames/diagnostics.hpp"
#include "msgames/errors.hpp"
#include "msgames/inner_solvers.hpp"
#include "msgames/schemes.hpp"
#include "support.hpp"

using namespace msgames;

TEST_SUITE("benchmark-games") {
    TEST_CASE("oracles agree on strongly convex benchmarks") {
        for (const auto& id : {"cournot-sc", "congestion"}) {
            const GameSpec g = build_benchmark(id);
            CHECK(testing::max_abs_diff(oracle_fixed_point(g).values, oracle_grid(g).values) <= 1e-6);
        }
        CHECK(testing::max_abs_diff(oracle_fixed_point(build_congestion()).values, congestion_closed_form().values) <=
              1e-10);
        CHECK(congestion_closed_form().values[0] == doctest::Approx(19.0 / 36.0));
    }

    TEST_CASE("grid oracle on the weakly convex game") {
        const Profile x = oracle_grid(build_cournot_wc());
        for (double v : x.values) CHECK(std::abs(v - 40.0 / 7.0) <= 1e-4);
        CHECK_THROWS(oracle_fixed_point(build_cournot_wc()));
    }

    TEST_CASE("single-player quadratic") {
        const GameSpec g = testing::single_player(PiecewiseQuadratic1D::quadratic(0.5, -1.0, 0.5), 0.0, 2.0);
        CHECK(oracle_fixed_point(g).values[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("corner equilibrium") {
        // Increasing cost on [1, 3]: the lower corner is the equilibrium.
        PlayerSpec p;
        p.set = BoxSet({1.0}, {3.0});
        p.own_cost = {PiecewiseQuadratic1D::max_of({{-0.1, 2.0, 0.0}, {0.1, 1.0, 0.0}})};
        const GameSpec g = GameSpec::build("corner", {p, p}, GameClass::WeaklyConvex);
        const Profile x = oracle_grid(g);
        CHECK(x.values[0] == doctest::Approx(1.0));
        CHECK(x.values[1] == doctest::Approx(1.0));
        CHECK(qne_gap_1d(g, x) >= -1e-6);
    }

    TEST_CASE("unknown benchmark id") { CHECK_THROWS(build_benchmark("nope")); }
}

namespace {

SchemeConfig base(Scheme s, double eta, double mu, int K) {
    SchemeConfig c;
    c.scheme = s;
    c.eta = eta;
    c.mu = mu;
    c.K = K;
    return c;
}

}  // namespace

TEST_SUITE("br-schemes") {
    TEST_CASE("config validation") {
        SchemeConfig c = base(Scheme::MS_SBR, 1.0, 2.0, 10);
        CHECK_NOTHROW(c.validate());
        CHECK(c.gamma_resid_value() * c.mu > 1.0);
        CHECK(c.eps_async_value() == doctest::Approx(0.1));
        c.gamma_resid = 0.4;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = base(Scheme::MS_SBR, -1.0, 2.0, 10);
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = base(Scheme::MS_SBR, 1.0, 2.0, 0);
        CHECK_THROWS_AS(c.validate(), ConfigError);
        c = base(Scheme::MS_SBR, 1.0, 2.0, 10);
        c.nu = 1.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
        CHECK_THROWS_AS(scheme_from_string("ms-xyz"), ConfigError);
        CHECK(scheme_from_string("ms-sabr") == Scheme::MS_SABR);
    }

    TEST_CASE("scheme gates") {
        const GameSpec sc = build_cournot_sc(), cg = build_congestion(), wc = build_cournot_wc();
        CHECK_THROWS_AS(run_ms_sbr(wc, base(Scheme::MS_SBR, 0.3, 2.0, 5)), AssumptionError);
        CHECK_THROWS_AS(run_ms_sbr(sc, base(Scheme::MS_SBR, 1000.0, 1000.0, 5)), AssumptionError);
        CHECK_THROWS_AS(run_ms_abr(sc, base(Scheme::MS_ABR, 2.0, 1.0, 5)), AssumptionError);  // not potential
        CHECK_THROWS_AS(run_ms_abr(cg, base(Scheme::MS_ABR, 2.0, 0.2, 5)), AssumptionError);  // mu <= 1/(2 eta)
        CHECK_THROWS_AS(run_ms_ssbr(sc, base(Scheme::MS_SSBR, 0.3, 2.0, 5)), AssumptionError);
        CHECK_THROWS_AS(run_ms_ssbr(wc, base(Scheme::MS_SSBR, 4.0, 2.0, 5)), AssumptionError);
        CHECK_THROWS_AS(run_ms_sabr(wc, base(Scheme::MS_SABR, 2.5, 1.0, 5)), AssumptionError);  // eta rho > 1/2
        CHECK_NOTHROW(run_ms_sabr(wc, base(Scheme::MS_SABR, 0.3, 2.0, 5)));
    }

    TEST_CASE("ms-sbr examples") {
        const GameSpec sc = build_cournot_sc();
        const Profile star = oracle_fixed_point(sc);
        const auto r = run_ms_sbr(sc, base(Scheme::MS_SBR, 1.0, 2.0, 100), star);
        CHECK(r.mean.back().e_k <= 1e-8);
        CHECK(r.assumptions.contraction->passes);

        const GameSpec one = testing::single_player(PiecewiseQuadratic1D::quadratic(0.5), -1, 1);
        SchemeConfig c = base(Scheme::MS_SBR, 1.0, 1.0, 20);
        c.x0 = std::vector<double>{0.0};
        c.emit_iterates = true;
        c.early_stop = 0.0;
        const auto z = run_ms_sbr(one, c);
        for (const auto& x : z.paths[0].iterates) CHECK(x.values[0] == 0.0);

        const auto r1 = run_ms_sbr(sc, base(Scheme::MS_SBR, 1.0, 2.0, 30), star);
        const auto r3 = run_ms_sbr(sc, base(Scheme::MS_SBR, 3.0, 2.0, 30), star);
        CHECK(r3.mean[30].e_k > r1.mean[30].e_k);
    }

    TEST_CASE("ms-abr examples") {
        const GameSpec cg = build_congestion();
        const Profile star = congestion_closed_form();
        SchemeConfig c = base(Scheme::MS_ABR, 2.0, 1.0, 60);
        c.x0 = star.values;
        c.paths = 2;
        c.early_stop = 0.0;
        const auto r = run_ms_abr(cg, c, star);
        for (const auto& p : r.paths)
            for (const auto& row : p.rows) CHECK(row.resid_sq <= 1e-18);

        SchemeConfig d = base(Scheme::MS_ABR, 2.0, 1.0, 80);
        d.paths = 3;
        d.emit_iterates = true;
        const auto run = run_ms_abr(cg, d, star);
        for (const auto& p : run.paths) {
            CHECK(p.r_index >= 0);
            CHECK(p.r_index < d.K);
            for (std::size_t k = 0; k < p.iterates.size(); ++k) {
                const auto& x = p.iterates[k];
                CHECK(cg.feasible(x, 1e-12));
                for (std::size_t i = 0; i < 6; ++i)
                    CHECK(smoothed_residual_lemma_slack(cg, x, i, d.eta, d.mu) <= 1e-9);
            }
        }
    }

    TEST_CASE("ms-ssbr examples") {
        const GameSpec wc = build_cournot_wc();
        SchemeConfig c = base(Scheme::MS_SSBR, 0.3, 2.0, 100);
        c.x0 = std::vector<double>(4, 4.0);
        const auto r = run_ms_ssbr(wc, c, cournot_wc_closed_form());
        for (double v : r.paths[0].final.values) CHECK(std::abs(v - 40.0 / 7.0) <= 1e-3);

        SchemeConfig s = base(Scheme::MS_SSBR, 0.3, 2.0, 20);
        s.x0 = cournot_wc_closed_form().values;
        s.emit_iterates = true;
        s.early_stop = 0.0;
        const auto fixed = run_ms_ssbr(wc, s);
        for (const auto& x : fixed.paths[0].iterates)
            for (double v : x.values) CHECK(std::abs(v - 40.0 / 7.0) <= 1e-12);
    }

    TEST_CASE("ms-sabr examples") {
        const GameSpec wc = build_cournot_wc();
        SchemeConfig c = base(Scheme::MS_SABR, 0.3, 1.0 / 0.3, 40);
        c.x0 = cournot_wc_closed_form().values;
        c.early_stop = 0.0;
        const auto r = run_ms_sabr(wc, c);
        for (const auto& row : r.paths[0].rows) CHECK(row.resid_sq <= 1e-18);

        SchemeConfig d = base(Scheme::MS_SABR, 0.3, 1.0 / 0.3, 100);
        d.x0 = std::vector<double>(4, 4.0);
        d.emit_iterates = true;
        const auto run = run_ms_sabr(wc, d);
        const double gamma = d.gamma_resid_value();
        CHECK(gamma * d.mu > 1.0);
        for (const auto& x : run.paths[0].iterates) {
            CHECK(wc.feasible(x, 1e-12));
            for (std::size_t i = 0; i < 4; ++i) CHECK(surrogate_residual_lemma_slack(wc, x, i, d.eta, d.mu, gamma) <= 1e-9);
        }
    }

    TEST_CASE("sample accounting is exact") {
        const GameSpec sc = build_cournot_sc();
        SchemeConfig c = base(Scheme::MS_SBR, 1.0, 2.0, 6);
        c.mode = OracleMode::Stochastic;
        c.inner.sample_cap = 64;
        const auto r = run_ms_sbr(sc, c);
        const auto& rows = r.paths[0].rows;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            for (std::size_t i = 0; i < 4; ++i) {
                CHECK(rows[k].samples_cum[i] >= rows[k - 1].samples_cum[i]);
                // Each step runs imgm_steps_for(nu^k) inner steps with the capped schedule.
                const auto j = imgm_steps_for(std::pow(0.5, double(k)), c.p_hat_value(), 1.0);
                const auto sched = ImgmSchedule::for_scheme(0.5, 1, 64, 1.0, 2.0);
                std::uint64_t want = 0;
                for (std::uint64_t t = 0; t < j; ++t) want += sched.samples_at(t);
                CHECK(rows[k].samples_cum[i] - rows[k - 1].samples_cum[i] == want);
            }
        }
    }

    TEST_CASE("determinism across repeats and job counts") {
        const GameSpec cg = build_congestion();
        SchemeConfig c = base(Scheme::MS_ABR, 2.0, 0.5, 30);
        c.mode = OracleMode::Stochastic;
        c.inner.sample_cap = 128;
        c.paths = 4;
        c.seed = 99;
        const auto a = run_ms_abr(cg, c);
        c.jobs = 4;
        const auto b = run_ms_abr(cg, c);
        for (std::size_t p = 0; p < 4; ++p) {
            CHECK(a.paths[p].final.values == b.paths[p].final.values);
            CHECK(a.paths[p].r_index == b.paths[p].r_index);
        }
        c.seed = 100;
        const auto d = run_ms_abr(cg, c);
        CHECK(a.paths[0].final.values != d.paths[0].final.values);
    }

    TEST_CASE("early stop carries the last row forward") {
        const GameSpec wc = build_cournot_wc();
        SchemeConfig c = base(Scheme::MS_SSBR, 0.8, 0.75, 200);
        c.x0 = std::vector<double>(4, 4.0);
        const auto r = run_ms_ssbr(wc, c, cournot_wc_closed_form());
        const auto& p = r.paths[0];
        REQUIRE(p.early_stopped);
        CHECK(p.rows.size() < 201);
        CHECK(p.row(200).e_k == p.rows.back().e_k);
        CHECK(r.mean.size() == 201);
    }

    TEST_CASE("potential descent of exact asynchronous responses") {
        const GameSpec cg = build_congestion();
        SchemeConfig c = base(Scheme::MS_ABR, 2.0, 0.5, 200);
        c.inner_solver = InnerSolver::Exact;
        c.emit_iterates = true;
        c.paths = 4;
        c.early_stop = 0.0;
        const auto r = run_ms_abr(cg, c);
        for (const auto& p : r.paths) {
            for (std::size_t k = 0; k + 1 < p.iterates.size(); ++k) {
                const auto i = static_cast<std::size_t>(p.rows[k + 1].selected);
                const auto hat = exact_smoothed_br(cg, i, p.iterates[k], c.eta, c.mu);
                const double step = hat[0] - p.iterates[k].slice(i)[0];
                CHECK(potential_value(cg, p.iterates[k + 1], c.eta) <=
                      potential_value(cg, p.iterates[k], c.eta) - (c.mu - 1.0 / (2 * c.eta)) * step * step + 1e-10);
            }
        }
    }
}
