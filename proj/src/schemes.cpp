#include "msgames/schemes.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "msgames/errors.hpp"

namespace msgames {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSampleCeiling = 4.0e18;

double sq_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Prox sample count for the one-step surrogate update at target inexactness eps.
std::uint64_t surrogate_samples(const SchemeConfig& cfg, double eps, bool* capped) {
    const double raw = std::ceil(cfg.q_prime / (cfg.mu * cfg.mu * cfg.eta * cfg.eta * eps * eps));
    double v = std::min(raw, kSampleCeiling);
    bool was_capped = raw > kSampleCeiling;
    if (cfg.prox_sample_cap && v > static_cast<double>(*cfg.prox_sample_cap)) {
        v = static_cast<double>(*cfg.prox_sample_cap);
        was_capped = true;
    }
    *capped = was_capped;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

std::size_t select_player(const std::vector<double>& probs, RngStream& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

Profile initial_profile(const GameSpec& game, const SchemeConfig& cfg) {
    Profile x = game.zero_profile();
    if (cfg.x0) {
        if (cfg.x0->size() != x.values.size()) throw ConfigError("x0 has the wrong dimension");
        x.values = *cfg.x0;
        if (!game.feasible(x)) throw ConfigError("x0 is not feasible");
    } else {
        game.project(x);
    }
    return x;
}

class PathRunner {
public:
    PathRunner(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle)
        : game_(game), cfg_(cfg), oracle_(oracle) {}

    PathRecord run(std::uint64_t path_id) const {
        const RngStream root(cfg_.seed, path_id, 0);
        RngStream selection = root.fork(purpose::kSelection);
        RngStream output = root.fork(purpose::kOutputIndex);
        const RngStream oracle_root = root.fork(purpose::kOracle);

        const std::size_t n = game_.num_players();
        PathRecord rec;
        rec.path_id = path_id;
        Profile x = initial_profile(game_, cfg_);
        std::vector<std::uint64_t> samples(n, 0);
        rec.rows.push_back(make_row(0, x, samples, 0.0, 0.0, -1, false));
        if (cfg_.emit_iterates) rec.iterates.push_back(x);
        rec.early_stopped = below_floor(rec.rows.back());

        const bool async = is_asynchronous(cfg_.scheme);
        for (int k = 0; k < cfg_.K && !rec.early_stopped; ++k) {
            const double eps = async ? cfg_.eps_async_value() : std::pow(cfg_.nu, k + 1);
            std::vector<std::size_t> movers;
            if (async) {
                movers.push_back(select_player(game_.selection_probs(), selection));
            } else {
                for (std::size_t i = 0; i < n; ++i) movers.push_back(i);
            }
            Profile next = x;
            double realized = 0.0;
            bool capped = false;
            const RngStream step_stream = oracle_root.fork(static_cast<std::uint64_t>(k));
            for (std::size_t i : movers) {
                RngStream rng = step_stream.fork(i);
                InnerResult r = update(i, x, eps, rng);
                const auto exact = is_surrogate(cfg_.scheme) ? exact_surrogate_br(game_, i, x, cfg_.eta, cfg_.mu)
                                                             : exact_smoothed_br(game_, i, x, cfg_.eta, cfg_.mu);
                double d = 0.0;
                for (std::size_t c = 0; c < exact.size(); ++c) d += (r.z[c] - exact[c]) * (r.z[c] - exact[c]);
                realized = std::max(realized, std::sqrt(d));
                samples[i] += r.samples;
                capped = capped || r.capped;
                next.set_slice(i, r.z);
            }
            x = std::move(next);
            const int sel = async ? static_cast<int>(movers.front()) : -1;
            rec.rows.push_back(make_row(k + 1, x, samples, realized, eps, sel, capped));
            if (cfg_.emit_iterates) rec.iterates.push_back(x);
            if (below_floor(rec.rows.back())) rec.early_stopped = true;
        }
        rec.final = x;
        rec.r_index = static_cast<int>(output.uniform_index(static_cast<std::uint64_t>(cfg_.K)));
        rec.resid_at_r = rec.row(rec.r_index).resid_sq;
        return rec;
    }

private:
    InnerResult update(std::size_t i, const Profile& x, double eps, RngStream& rng) const {
        switch (cfg_.scheme) {
            case Scheme::MS_SBR:
            case Scheme::MS_ABR: {
                if (cfg_.inner_solver == InnerSolver::Exact) {
                    InnerResult r;
                    r.z = exact_smoothed_br(game_, i, x, cfg_.eta, cfg_.mu);
                    return r;
                }
                std::uint64_t j = imgm_steps_for(std::min(eps, 1.0), cfg_.p_hat_value(), cfg_.inner.theta);
                bool capped = false;
                if (cfg_.inner.max_steps && j > *cfg_.inner.max_steps) {
                    j = *cfg_.inner.max_steps;
                    capped = true;
                }
                ImgmSchedule sched = ImgmSchedule::for_scheme(cfg_.inner.beta, cfg_.inner.t0, cfg_.inner.sample_cap,
                                                              cfg_.eta, cfg_.mu);
                if (cfg_.inner.gamma) sched.gamma = *cfg_.inner.gamma;
                InnerResult r = imgm_solve(game_, i, x, cfg_.eta, cfg_.mu, j, sched, cfg_.mode, rng);
                r.capped = r.capped || capped;
                return r;
            }
            case Scheme::MS_SSBR:
            case Scheme::MS_SABR: {
                bool capped = false;
                const std::uint64_t T = surrogate_samples(cfg_, eps, &capped);
                InnerResult r = oimgm_step(game_, i, x, cfg_.eta, cfg_.mu, T, cfg_.mode, rng);
                r.capped = cfg_.mode == OracleMode::Stochastic && capped;
                return r;
            }
        }
        throw std::logic_error("unknown scheme");
    }

    IterRow make_row(int k, const Profile& x, const std::vector<std::uint64_t>& samples, double realized,
                     double scheduled, int selected, bool capped) const {
        IterRow row;
        row.k = k;
        row.e_k = oracle_ ? expected_error({x}, *oracle_) : kNaN;
        row.resid_sq = is_surrogate(cfg_.scheme) ? sq_norm(residual_gx(game_, x, cfg_.eta, cfg_.gamma_resid_value()))
                                                 : sq_norm(residual_gn(game_, x, cfg_.eta));
        row.realized_eps = realized;
        row.scheduled_eps = scheduled;
        row.samples_cum = samples;
        row.selected = selected;
        row.capped = capped;
        return row;
    }

    bool below_floor(const IterRow& row) const {
        if (oracle_) return row.e_k < cfg_.early_stop;
        return std::sqrt(row.resid_sq) < cfg_.early_stop;
    }

    const GameSpec& game_;
    const SchemeConfig& cfg_;
    const std::optional<Profile>& oracle_;
};

void require_config(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

// ---------------------------------------------------------------- names

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::MS_SBR: return "ms-sbr";
        case Scheme::MS_ABR: return "ms-abr";
        case Scheme::MS_SSBR: return "ms-ssbr";
        case Scheme::MS_SABR: return "ms-sabr";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "ms-sbr") return Scheme::MS_SBR;
    if (s == "ms-abr") return Scheme::MS_ABR;
    if (s == "ms-ssbr") return Scheme::MS_SSBR;
    if (s == "ms-sabr") return Scheme::MS_SABR;
    throw ConfigError("unknown scheme '" + s + "'");
}

bool is_asynchronous(Scheme s) { return s == Scheme::MS_ABR || s == Scheme::MS_SABR; }
bool is_surrogate(Scheme s) { return s == Scheme::MS_SSBR || s == Scheme::MS_SABR; }

const IterRow& PathRecord::row(int k) const {
    return static_cast<std::size_t>(k) < rows.size() ? rows[static_cast<std::size_t>(k)] : rows.back();
}

double SchemeConfig::p_hat_value() const { return inner.p_hat.value_or(std::pow(inner.beta, 1.0 / 1.1)); }

void SchemeConfig::validate() const {
    require_config(std::isfinite(eta) && eta > 0.0, "eta must be positive");
    require_config(std::isfinite(mu) && mu > 0.0, "mu must be positive");
    require_config(K >= 1, "K must be at least 1");
    require_config(nu > 0.0 && nu < 1.0, "nu must lie in (0, 1)");
    if (eps_async) require_config(*eps_async > 0.0 && *eps_async <= 1.0, "eps_async must lie in (0, 1]");
    require_config(gamma_resid_value() > 0.0, "gamma_resid must be positive");
    require_config(gamma_resid_value() * mu > 1.0, "gamma_resid * mu must exceed 1");
    require_config(inner.beta > 0.0 && inner.beta < 1.0, "inner.beta must lie in (0, 1)");
    require_config(inner.t0 >= 1, "inner.t0 must be positive");
    if (inner.sample_cap) require_config(*inner.sample_cap >= 1, "inner.sample_cap must be positive");
    if (inner.gamma) require_config(*inner.gamma > 0.0, "inner.gamma must be positive");
    if (inner.p_hat) require_config(*inner.p_hat > 0.0 && *inner.p_hat < 1.0, "inner.p_hat must lie in (0, 1)");
    require_config(inner.theta >= 1.0, "inner.theta must be at least 1");
    require_config(q_prime > 0.0, "q_prime must be positive");
    if (prox_sample_cap) require_config(*prox_sample_cap >= 1, "prox_sample_cap must be positive");
    require_config(paths >= 1, "paths must be at least 1");
    require_config(jobs >= 1, "jobs must be at least 1");
    require_config(early_stop >= 0.0, "early_stop must be nonnegative");
}

// ---------------------------------------------------------------- gate

AssumptionSummary check_scheme_assumptions(const GameSpec& game, const SchemeConfig& cfg) {
    AssumptionSummary s;
    s.potentiality = to_string(game.potentiality());
    const double eta = cfg.eta;
    const double mu = cfg.mu;
    const bool strong = game.game_class() == GameClass::StronglyConvex;
    switch (cfg.scheme) {
        case Scheme::MS_SBR:
            if (!strong) {
                s.failures.push_back("ms-sbr needs a strongly convex game");
                break;
            }
            s.contraction = gamma1_matrix(game, eta, mu);
            if (!s.contraction->passes)
                s.failures.push_back("gamma1 spectral norm " + fmt(s.contraction->spectral_norm) + " is not below 1");
            break;
        case Scheme::MS_ABR:
            if (!strong) {
                s.failures.push_back("ms-abr needs a strongly convex game");
                break;
            }
            if (game.potentiality() == Potentiality::None) s.failures.push_back("game is not known to be potential");
            if (!(mu > 1.0 / (2.0 * eta))) s.failures.push_back("ms-abr needs mu > 1/(2 eta)");
            break;
        case Scheme::MS_SSBR: {
            if (strong) {
                s.failures.push_back("ms-ssbr needs a weakly convex game");
                break;
            }
            if (!(eta * game.max_rho() < 1.0)) {
                s.failures.push_back("ms-ssbr needs eta * rho < 1");
                break;
            }
            RngStream rng(cfg.seed, 0, purpose::kDiagnostics);
            s.contraction = gamma2_matrix(game, eta, mu, fit_lhat(game, eta, mu, rng));
            if (!s.contraction->passes)
                s.failures.push_back("gamma2 spectral norm " + fmt(s.contraction->spectral_norm) + " is not below 1");
            break;
        }
        case Scheme::MS_SABR:
            if (strong) {
                s.failures.push_back("ms-sabr needs a weakly convex game");
                break;
            }
            if (!(eta * game.max_rho() <= 0.5)) s.failures.push_back("ms-sabr needs eta * rho <= 1/2");
            if (!(mu > 1.0 / (2.0 * eta))) s.failures.push_back("ms-sabr needs mu > 1/(2 eta)");
            if (game.potentiality() == Potentiality::None) s.failures.push_back("game is not known to be potential");
            break;
    }
    return s;
}

// ---------------------------------------------------------------- runs

RunRecord run_scheme(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq) {
    cfg.validate();
    if (oracle_eq) game.check_profile(*oracle_eq);
    const auto start = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.cfg = cfg;
    rec.assumptions = check_scheme_assumptions(game, cfg);
    if (!rec.assumptions.ok()) {
        std::string msg = "assumption check failed:";
        for (const auto& f : rec.assumptions.failures) msg += " " + f + ";";
        throw AssumptionError(msg);
    }
    initial_profile(game, cfg);  // surface x0 errors before spawning workers

    const PathRunner runner(game, cfg, oracle_eq);
    rec.paths.resize(static_cast<std::size_t>(cfg.paths));
    const int workers = std::min(cfg.jobs, cfg.paths);
    if (workers <= 1) {
        for (int p = 0; p < cfg.paths; ++p) rec.paths[p] = runner.run(static_cast<std::uint64_t>(p));
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int p = next++; p < cfg.paths; p = next++) {
                    try {
                        rec.paths[p] = runner.run(static_cast<std::uint64_t>(p));
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Path averages; stopped paths carry their last row forward.
    const double np = static_cast<double>(cfg.paths);
    for (int k = 0; k <= cfg.K; ++k) {
        MeanRow m;
        m.k = k;
        for (const auto& path : rec.paths) {
            const auto& row = path.row(k);
            m.e_k += row.e_k / np;
            m.resid_sq += row.resid_sq / np;
            double total = 0.0;
            for (auto s : row.samples_cum) total += static_cast<double>(s);
            m.samples_cum += total / np;
        }
        rec.mean.push_back(m);
    }
    for (const auto& path : rec.paths) {
        double s = 0.0;
        for (int k = 0; k < cfg.K; ++k) s += path.row(k).resid_sq;
        rec.expected_resid_at_r += s / cfg.K / np;
        rec.sampled_resid_at_r += path.resid_at_r / np;
        for (const auto& row : path.rows) {
            rec.any_capped = rec.any_capped || row.capped;
            if (row.scheduled_eps > 0.0)
                rec.max_realized_over_scheduled =
                    std::max(rec.max_realized_over_scheduled, row.realized_eps / row.scheduled_eps);
        }
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

namespace {

SchemeConfig with_scheme(SchemeConfig cfg, Scheme s) {
    cfg.scheme = s;
    return cfg;
}

}  // namespace

RunRecord run_ms_sbr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq) {
    return run_scheme(game, with_scheme(cfg, Scheme::MS_SBR), oracle_eq);
}

RunRecord run_ms_abr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq) {
    return run_scheme(game, with_scheme(cfg, Scheme::MS_ABR), oracle_eq);
}

RunRecord run_ms_ssbr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq) {
    return run_scheme(game, with_scheme(cfg, Scheme::MS_SSBR), oracle_eq);
}

RunRecord run_ms_sabr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq) {
    return run_scheme(game, with_scheme(cfg, Scheme::MS_SABR), oracle_eq);
}

}  // namespace msgames
