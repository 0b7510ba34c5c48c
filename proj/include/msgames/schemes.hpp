#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msgames/diagnostics.hpp"
#include "msgames/game.hpp"
#include "msgames/inner_solvers.hpp"
#include "msgames/moreau.hpp"

namespace msgames {

enum class Scheme { MS_SBR, MS_ABR, MS_SSBR, MS_SABR };
enum class InnerSolver { Imgm, Exact };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
bool is_asynchronous(Scheme s);
bool is_surrogate(Scheme s);

struct InnerConfig {
    double beta = 0.5;
    std::uint64_t t0 = 1;
    std::optional<std::uint64_t> sample_cap;
    std::optional<double> gamma;
    std::optional<double> p_hat;  // default beta^(1/(1+0.1))
    double theta = 1.0;
    std::optional<std::uint64_t> max_steps;
};

struct SchemeConfig {
    Scheme scheme = Scheme::MS_SBR;
    double eta = 1.0;
    double mu = 1.0;
    int K = 100;
    double nu = 0.5;
    std::optional<double> eps_async;    // default 1/K
    std::optional<double> gamma_resid;  // default 2/mu
    InnerConfig inner;
    InnerSolver inner_solver = InnerSolver::Imgm;
    double q_prime = 1.0;
    std::optional<std::uint64_t> prox_sample_cap;
    OracleMode mode = OracleMode::Analytic;
    int paths = 1;
    std::uint64_t seed = 0;
    std::optional<std::vector<double>> x0;  // default: projection of 0
    bool emit_iterates = false;
    double early_stop = 1e-14;
    int jobs = 1;

    // Throws ConfigError on out-of-range fields.
    void validate() const;
    [[nodiscard]] double eps_async_value() const { return eps_async.value_or(1.0 / K); }
    [[nodiscard]] double gamma_resid_value() const { return gamma_resid.value_or(2.0 / mu); }
    [[nodiscard]] double p_hat_value() const;
};

struct IterRow {
    int k = 0;
    double e_k = 0.0;  // NaN without an oracle equilibrium
    double resid_sq = 0.0;
    double realized_eps = 0.0;   // max over updated players of |z_i - exact response|
    double scheduled_eps = 0.0;  // target inexactness of the step that produced x^k
    std::vector<std::uint64_t> samples_cum;
    int selected = -1;  // updated player for asynchronous schemes
    bool capped = false;
};

struct PathRecord {
    std::uint64_t path_id = 0;
    std::vector<IterRow> rows;  // rows[k] describes x^k
    Profile final;
    std::vector<Profile> iterates;  // only with emit_iterates
    int r_index = 0;
    double resid_at_r = 0.0;
    bool early_stopped = false;

    // Row k, or the last row when the path stopped early.
    [[nodiscard]] const IterRow& row(int k) const;
};

struct MeanRow {
    int k = 0;
    double e_k = 0.0;
    double resid_sq = 0.0;
    double samples_cum = 0.0;  // total over players
};

struct AssumptionSummary {
    std::optional<ContractionReport> contraction;
    std::string potentiality;
    std::vector<std::string> failures;
    [[nodiscard]] bool ok() const { return failures.empty(); }
};

struct RunRecord {
    SchemeConfig cfg;
    AssumptionSummary assumptions;
    std::vector<PathRecord> paths;
    std::vector<MeanRow> mean;
    // E|G(x^{R_K})|^2: per path the mean of resid_sq over k < K, averaged
    // over paths, and the average of the sampled R_K values.
    double expected_resid_at_r = 0.0;
    double sampled_resid_at_r = 0.0;
    double max_realized_over_scheduled = 0.0;
    bool any_capped = false;
    double wall_seconds = 0.0;
};

// Evaluates the structural assumptions of cfg.scheme on the game.
AssumptionSummary check_scheme_assumptions(const GameSpec& game, const SchemeConfig& cfg);

RunRecord run_ms_sbr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq = {});
RunRecord run_ms_abr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq = {});
RunRecord run_ms_ssbr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq = {});
RunRecord run_ms_sabr(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq = {});
// Dispatches on cfg.scheme. Throws AssumptionError when the gate fails.
RunRecord run_scheme(const GameSpec& game, const SchemeConfig& cfg, const std::optional<Profile>& oracle_eq = {});

}  // namespace msgames
