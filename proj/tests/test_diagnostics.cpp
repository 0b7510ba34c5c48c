#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "msgames/benchmarks.hpp"
#include "msgames/diagnostics.hpp"
#include "msgames/inner_solvers.hpp"
#include "msgames/moreau.hpp"
#include "support.hpp"

using namespace msgames;

namespace {

double eigen_spectral_norm(const Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e);
    return std::sqrt(es.eigenvalues().maxCoeff());
}

}  // namespace

TEST_SUITE("diagnostics") {
    TEST_CASE("power iteration agrees with a dense eigen solver") {
        RngStream rng(1, 0, 1);
        for (int trial = 0; trial < 200; ++trial) {
            Matrix m(6, 6);
            for (auto& v : m.data) v = rng.uniform01();
            const auto r = spectral_norm(m);
            CHECK(r.converged);
            CHECK(r.norm == doctest::Approx(eigen_spectral_norm(m)).epsilon(1e-9));
        }
        Matrix zero(3, 3);
        CHECK(spectral_norm(zero).norm == 0.0);
    }

    TEST_CASE("gamma1 examples") {
        const GameSpec one = testing::single_player(PiecewiseQuadratic1D::quadratic(0.5), -1, 1);
        const auto r0 = gamma1_matrix(one, 1.0, 0.0);
        CHECK(r0.matrix.rows == 1);
        CHECK(r0.matrix(0, 0) == 0.0);
        CHECK(r0.spectral_norm == 0.0);
        CHECK(r0.passes);

        const GameSpec sc = build_cournot_sc();
        double prev = 0.0;
        for (double eta : {1.0, 1.5, 3.0}) {
            const auto r = gamma1_matrix(sc, eta, 2.0);
            CHECK(r.passes);
            CHECK(r.spectral_norm < 1.0);
            CHECK(r.spectral_norm > prev);
            CHECK(r.spectral_norm == doctest::Approx(eigen_spectral_norm(r.matrix)).epsilon(1e-9));
            for (double v : r.matrix.data) CHECK(v >= 0.0);
            for (std::size_t i = 0; i < 4; ++i) {
                const double s = sc.sigma(i) / (eta * sc.sigma(i) + 1.0);
                CHECK(r.matrix(i, i) == doctest::Approx(2.0 / (s + 2.0)));
                CHECK(r.matrix(i, (i + 1) % 4) == doctest::Approx(sc.coupling_lipschitz(i) / (s + 2.0)));
            }
            REQUIRE(r.spectral_norm_own_modulus_only);
            prev = r.spectral_norm;
        }
        // Diagonal entries increase with eta.
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(gamma1_matrix(sc, 1.1, 2.0).matrix(i, i) < gamma1_matrix(sc, 1.2, 2.0).matrix(i, i));

        // Inflated coupling constants break the contraction.
        const auto bad = gamma1_matrix(sc, 1.0, 1000.0, std::vector<double>(4, 5.0));
        CHECK_FALSE(bad.passes);
        CHECK(bad.coupling_attested);
    }

    TEST_CASE("gamma2 examples") {
        const GameSpec wc = build_cournot_wc();
        const auto z = gamma2_matrix(wc, 0.3, 2.0, std::vector<LhatConstants>(4));
        CHECK(z.spectral_norm == 0.0);
        CHECK(z.passes);
        const double mu = 2.0;
        const auto half = gamma2_matrix(wc, 0.3, mu, std::vector<LhatConstants>(4, {mu / 8.0, mu / 8.0}));
        CHECK(half.spectral_norm <= 0.5 + 1e-12);
        CHECK(half.passes);
        RngStream rng(0, 0, purpose::kDiagnostics);
        const auto fitted = gamma2_matrix(wc, 0.3, mu, fit_lhat(wc, 0.3, mu, rng));
        CHECK(fitted.passes);
        CHECK(fitted.lhat.size() == 4);
    }

    TEST_CASE("residual_gn") {
        const GameSpec sc = build_cournot_sc();
        const Profile x = sc.uniform_profile(1.0);
        const auto r = residual_gn(sc, x, 1.0);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto p = player_prox_problem(sc, i, x, 1.0, true);
            CHECK(r[i] == doctest::Approx((1.0 - prox_exact(p)[0]) / 1.0));
        }
        const Profile star = oracle_fixed_point(sc);
        CHECK(euclidean_norm(residual_gn(sc, star, 1.0)) <= 1e-9);
    }

    TEST_CASE("residual_gx") {
        const GameSpec wc = build_cournot_wc();
        const Profile star = cournot_wc_closed_form();
        CHECK(euclidean_norm(residual_gx(wc, star, 0.3, 0.6)) <= 1e-12);
        const Profile x = wc.uniform_profile(4.0);
        const double eta = 0.3, gamma = 2 * eta;
        const auto r = residual_gx(wc, x, eta, gamma);
        CHECK(euclidean_norm(r) > 0.0);
        for (std::size_t i = 0; i < 4; ++i) {
            // Unconstrained prox by direct minimization, then the projected step.
            auto phi = [&](double v) {
                Profile z = x;
                z.slice(i)[0] = v;
                return evaluate_expected_objective(wc, i, z) + (v - 4.0) * (v - 4.0) / (2 * eta);
            };
            const double grad = (4.0 - testing::argmin_1d(phi, -30, 30)) / eta;
            const double want = (4.0 - std::clamp(4.0 - gamma * grad, 3.0, 12.0)) / gamma;
            CHECK(r[i] == doctest::Approx(want).epsilon(1e-7));
        }
    }

    TEST_CASE("expected error") {
        const Profile a = Profile::assemble({{0.0}, {0.0}});
        CHECK(expected_error({a, a}, a) == 0.0);
        const Profile b = Profile::assemble({{3.0}, {4.0}});
        CHECK(expected_error({b}, a) == doctest::Approx(5.0));
        const Profile c = Profile::assemble({{1.0}, {0.0}});
        const Profile d = Profile::assemble({{3.0}, {0.0}});
        CHECK(expected_error({c, d}, a) == doctest::Approx(2.0));
        const Profile wrong = Profile::assemble({{1.0}});
        CHECK_THROWS(expected_error({wrong}, a));
    }

    TEST_CASE("potential value") {
        const GameSpec cg = build_congestion();
        const Profile zero = cg.zero_profile();
        const double eta = 1.0;
        double want = 0.0;
        for (int i = 1; i <= 6; ++i) {
            const double c = 1.0 + i / 18.0;
            auto phi = [&](double y) { return -c * std::min(y, 0.5 * y + 3.0) + y * y + y * y / (2 * eta); };
            want += phi(testing::argmin_1d(phi, 0.0, 10.0));
        }
        CHECK(potential_value(cg, zero, eta) == doctest::Approx(want).epsilon(1e-10));
        CHECK_THROWS(potential_value(build_cournot_sc(), build_cournot_sc().zero_profile(), 1.0));

        PlayerSpec p;
        p.set = BoxSet({-1.0}, {1.0});
        p.own_cost = {PiecewiseQuadratic1D::quadratic(0.0)};
        p.own_quadratic = UniformCoefficient::constant(0.0);
        p.offset = SeparableOffset{UniformCoefficient::constant(1.0), PiecewiseQuadratic1D::quadratic(0.0)};
        const GameSpec flat = GameSpec::build("flat", {p, p}, GameClass::WeaklyConvex);
        CHECK(potential_value(flat, flat.uniform_profile(0.5), 1.0) == 0.0);
    }

    TEST_CASE("potential identity on random pairs") {
        const GameSpec cg = build_congestion();
        RngStream rng(6, 0, 1);
        for (int trial = 0; trial < 100; ++trial) {
            Profile x = cg.zero_profile();
            for (auto& v : x.values) v = 10.0 * rng.uniform01();
            const std::size_t i = rng.uniform_index(6);
            Profile y = x;
            y.slice(i)[0] = 10.0 * rng.uniform01();
            const double eta = 0.5 + 2.0 * rng.uniform01();
            auto smoothed = [&](const Profile& z) {
                const double zi = z.slice(i)[0];
                auto phi = [&](double v) {
                    Profile w = z;
                    w.slice(i)[0] = v;
                    return evaluate_expected_objective(cg, i, w) + (v - zi) * (v - zi) / (2 * eta);
                };
                return phi(testing::argmin_1d(phi, 0.0, 10.0));
            };
            CHECK(std::abs((smoothed(x) - smoothed(y)) - (potential_value(cg, x, eta) - potential_value(cg, y, eta))) <=
                  1e-9);
        }
    }

    TEST_CASE("qne gap") {
        const GameSpec wc = build_cournot_wc();
        CHECK(qne_gap_1d(wc, cournot_wc_closed_form()) >= -1e-6);
        const GameSpec sc = build_cournot_sc();
        CHECK(qne_gap_1d(sc, oracle_fixed_point(sc)) >= -1e-6);
        CHECK(qne_gap_1d(wc, wc.uniform_profile(3.0)) < 0.0);
        CHECK(qne_gap_1d(sc, sc.uniform_profile(0.0)) < 0.0);
    }

    TEST_CASE("qne bound") {
        CHECK(qne_bound(0.3, 1.0, 18.0, 0.0) == 0.0);
        CHECK(qne_bound(0.3, 1.0, 9.0 * std::sqrt(4.0), 2.0) == doctest::Approx(10.8));
        CHECK(qne_bound(0.15, 1.0, 18.0, 2.0) == doctest::Approx(0.5 * qne_bound(0.3, 1.0, 18.0, 2.0)));
        CHECK_THROWS(qne_bound(-1.0, 1.0, 1.0, 1.0));
    }

    TEST_CASE("residual lemma bounds at random points") {
        RngStream rng(7, 0, 1);
        const GameSpec sc = build_cournot_sc();
        const GameSpec wc = build_cournot_wc();
        for (int trial = 0; trial < 100; ++trial) {
            Profile x = sc.zero_profile();
            for (auto& v : x.values) v = 20.0 * rng.uniform01();
            const double eta = 0.5 + 2.0 * rng.uniform01(), mu = 0.5 + 4.0 * rng.uniform01();
            for (std::size_t i = 0; i < 4; ++i) CHECK(smoothed_residual_lemma_slack(sc, x, i, eta, mu) <= 1e-9);
            Profile y = wc.zero_profile();
            for (auto& v : y.values) v = 3.0 + 9.0 * rng.uniform01();
            const double eta2 = 0.3 + 0.5 * rng.uniform01(), mu2 = 1.0 / eta2;
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(surrogate_residual_lemma_slack(wc, y, i, eta2, mu2, 1.5 / mu2) <= 1e-9);
        }
    }
}
