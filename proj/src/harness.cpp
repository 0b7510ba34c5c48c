#include "msgames/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "msgames/benchmarks.hpp"
#include "msgames/errors.hpp"

namespace msgames {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_metrics_csv(const RunRecord& rec, std::ostream& os) {
    os << "k,metric,value,path\n";
    const bool have_e = !rec.mean.empty() && !std::isnan(rec.mean.front().e_k);
    auto emit = [&](int k, const char* metric, double v, const std::string& path) {
        os << k << ',' << metric << ',' << format_double(v) << ',' << path << '\n';
    };
    for (const auto& path : rec.paths) {
        const std::string id = std::to_string(path.path_id);
        for (const auto& row : path.rows) {
            if (have_e) emit(row.k, "e_k", row.e_k, id);
            emit(row.k, "resid_sq", row.resid_sq, id);
            double total = 0.0;
            for (auto s : row.samples_cum) total += static_cast<double>(s);
            emit(row.k, "samples_cum", total, id);
        }
    }
    for (const auto& m : rec.mean) {
        if (have_e) emit(m.k, "e_k", m.e_k, "mean");
        emit(m.k, "resid_sq", m.resid_sq, "mean");
        emit(m.k, "samples_cum", m.samples_cum, "mean");
    }
}

void write_iterates_csv(const RunRecord& rec, std::ostream& os) {
    os << "path,k,player,coord,value\n";
    for (const auto& path : rec.paths) {
        for (std::size_t k = 0; k < path.iterates.size(); ++k) {
            const Profile& x = path.iterates[k];
            for (std::size_t i = 0; i < x.num_players(); ++i) {
                const auto s = x.slice(i);
                for (std::size_t c = 0; c < s.size(); ++c)
                    os << path.path_id << ',' << k << ',' << i << ',' << c << ',' << format_double(s[c]) << '\n';
            }
        }
    }
}

json contraction_to_json(const ContractionReport& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.matrix.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < r.matrix.cols; ++j) row.push_back(r.matrix(i, j));
        rows.push_back(row);
    }
    json lhat = json::array();
    for (const auto& [own, others] : r.lhat) lhat.push_back({{"own", own}, {"others", others}});
    return json{{"kind", r.kind},
                {"eta", r.eta},
                {"mu", r.mu},
                {"matrix", rows},
                {"spectral_norm", r.spectral_norm},
                {"passes", r.passes},
                {"sigma_used", r.sigma_used},
                {"coupling_used", r.coupling_used},
                {"coupling_attested", r.coupling_attested},
                {"spectral_norm_own_modulus_only",
                 r.spectral_norm_own_modulus_only ? json(*r.spectral_norm_own_modulus_only) : json(nullptr)},
                {"lhat", lhat}};
}

namespace {

json profile_json(const Profile& x) {
    json out = json::array();
    for (const auto& part : x.split()) out.push_back(part);
    return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json run_summary_json(const ExperimentConfig& cfg, const RunRecord& rec, const std::optional<Profile>& oracle) {
    json paths = json::array();
    for (const auto& p : rec.paths) {
        const auto& last = p.rows.back();
        std::uint64_t total = 0;
        for (auto s : last.samples_cum) total += s;
        double worst = 0.0;
        for (const auto& row : p.rows)
            if (row.scheduled_eps > 0.0) worst = std::max(worst, row.realized_eps / row.scheduled_eps);
        json selected = json::array();
        if (is_asynchronous(rec.cfg.scheme))
            for (std::size_t k = 1; k < p.rows.size(); ++k) selected.push_back(p.rows[k].selected);
        paths.push_back({{"path", p.path_id},
                         {"final_profile", profile_json(p.final)},
                         {"R_K", p.r_index},
                         {"resid_sq_at_R_K", p.resid_at_r},
                         {"iterations_run", static_cast<int>(p.rows.size()) - 1},
                         {"early_stopped", p.early_stopped},
                         {"final_e_k", finite_or_null(last.e_k)},
                         {"final_resid_sq", last.resid_sq},
                         {"samples_total", total},
                         {"samples_per_player", last.samples_cum},
                         {"max_realized_over_scheduled", worst},
                         {"selected_players", selected}});
    }
    json inexact = json::array();
    if (!rec.paths.empty()) {
        for (const auto& row : rec.paths.front().rows) {
            if (row.k == 0) continue;
            inexact.push_back({{"k", row.k},
                               {"scheduled", row.scheduled_eps},
                               {"realized", row.realized_eps},
                               {"capped", row.capped}});
        }
    }
    json caps{{"inner_sample_cap", rec.cfg.inner.sample_cap ? json(*rec.cfg.inner.sample_cap) : json(nullptr)},
              {"inner_max_steps", rec.cfg.inner.max_steps ? json(*rec.cfg.inner.max_steps) : json(nullptr)},
              {"prox_sample_cap", rec.cfg.prox_sample_cap ? json(*rec.cfg.prox_sample_cap) : json(nullptr)},
              {"any_capped", rec.any_capped}};
    json doc{{"config", experiment_to_json(cfg)},
             {"game", cfg.game_doc.is_string() ? cfg.game_doc : json(cfg.game_doc.value("name", "custom"))},
             {"scheme", to_string(rec.cfg.scheme)},
             {"mode", to_string(rec.cfg.mode)},
             {"seed", rec.cfg.seed},
             {"oracle_equilibrium", oracle ? profile_json(*oracle) : json(nullptr)},
             {"potentiality", rec.assumptions.potentiality},
             {"contraction_report",
              rec.assumptions.contraction ? contraction_to_json(*rec.assumptions.contraction) : json(nullptr)},
             {"paths", paths},
             {"expected_resid_sq_at_R_K", rec.expected_resid_at_r},
             {"sampled_resid_sq_at_R_K", rec.sampled_resid_at_r},
             {"final_mean_e_k", rec.mean.empty() ? json(nullptr) : finite_or_null(rec.mean.back().e_k)},
             {"final_mean_resid_sq", rec.mean.empty() ? json(nullptr) : json(rec.mean.back().resid_sq)},
             {"max_realized_over_scheduled", rec.max_realized_over_scheduled},
             {"inexactness_path0", inexact},
             {"caps", caps},
             {"wall_seconds", rec.wall_seconds}};
    return doc;
}

std::optional<std::uint64_t> seed_from_env() {
    const char* raw = std::getenv("MSGAMES_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    std::uint64_t v = 0;
    const char* end = raw + std::char_traits<char>::length(raw);
    const auto [ptr, ec] = std::from_chars(raw, end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(std::string("MSGAMES_SEED is not an unsigned integer: ") + raw);
    return v;
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + p.string());
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir, std::optional<int> jobs,
            std::ostream& log) {
    ExperimentConfig cfg;
    GameSpec game;
    std::string out;
    try {
        json doc;
        try {
            doc = json::parse(read_text(config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("malformed JSON: ") + e.what());
        }
        cfg = parse_experiment(doc);
        if (auto s = seed_from_env()) cfg.scheme.seed = *s;
        if (jobs) {
            if (*jobs < 1) throw ConfigError("--jobs must be at least 1");
            cfg.scheme.jobs = *jobs;
        }
        if (out_dir)
            out = *out_dir;
        else if (cfg.outputs)
            out = *cfg.outputs;
        else
            throw ConfigError("no output directory: pass --out or set outputs");
        game = cfg.build_game();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const auto gate = check_scheme_assumptions(game, cfg.scheme);
        if (!gate.ok()) {
            log << "assumption check failed:";
            for (const auto& f : gate.failures) log << ' ' << f << ';';
            log << '\n';
            return kExitAssumption;
        }
        const auto oracle = resolve_oracle(game, cfg);
        const RunRecord rec = run_scheme(game, cfg.scheme, oracle);

        fs::create_directories(out);
        std::ostringstream metrics;
        write_metrics_csv(rec, metrics);
        write_text(fs::path(out) / "metrics.csv", metrics.str());
        if (cfg.scheme.emit_iterates) {
            std::ostringstream it;
            write_iterates_csv(rec, it);
            write_text(fs::path(out) / "iterates.csv", it.str());
        }
        write_text(fs::path(out) / "summary.json", run_summary_json(cfg, rec, oracle).dump(2) + "\n");
        log << to_string(cfg.scheme.scheme) << " on " << game.name() << ": K=" << cfg.scheme.K
            << " paths=" << cfg.scheme.paths << " final mean resid_sq=" << short_double(rec.mean.back().resid_sq);
        if (oracle) log << " e_K=" << short_double(rec.mean.back().e_k);
        log << " (" << std::fixed << std::setprecision(2) << rec.wall_seconds << " s)\n";
        log.unsetf(std::ios::floatfield);
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const AssumptionError& e) {
        log << e.what() << '\n';
        return kExitAssumption;
    } catch (const std::exception& e) {
        log << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------- reproduce

namespace {

struct PlannedRun {
    std::string panel;
    ExperimentConfig cfg;
};

ExperimentConfig base_experiment(const std::string& game, Scheme s, double eta, double mu, int K,
                                 const ReproduceOptions& opts, std::uint64_t seed) {
    ExperimentConfig c;
    c.game_doc = game;
    c.scheme.scheme = s;
    c.scheme.eta = eta;
    c.scheme.mu = mu;
    c.scheme.K = K;
    c.scheme.mode = opts.mode;
    c.scheme.seed = seed;
    c.scheme.jobs = opts.jobs;
    return c;
}

// Stochastic budgets are capped so each target finishes in minutes on a laptop.
void cap_stochastic(ExperimentConfig& c) {
    if (c.scheme.mode != OracleMode::Stochastic) return;
    if (is_surrogate(c.scheme.scheme)) {
        c.scheme.prox_sample_cap = 4096;
    } else {
        c.scheme.inner.sample_cap = 4096;
        c.scheme.inner.max_steps = 40;
    }
}

std::vector<PlannedRun> plan(const std::string& target, const ReproduceOptions& opts, std::uint64_t seed) {
    std::vector<PlannedRun> runs;
    const bool stochastic = opts.mode == OracleMode::Stochastic;
    if (target == "table3") {
        for (double eta : {1.0, 1.5, 3.0}) {
            for (double mu : {2.0, 4.0, 6.0, 8.0}) {
                auto c = base_experiment("cournot-sc", Scheme::MS_SBR, eta, mu, 100, opts, seed);
                c.oracle = OracleChoice::FixedPoint;
                c.scheme.paths = stochastic ? 10 : 1;
                if (stochastic) {
                    c.scheme.inner.sample_cap = 1024;
                    c.scheme.inner.max_steps = 40;
                }
                runs.push_back({"table3", c});
            }
        }
    } else if (target == "fig1") {
        for (double eta : {1.0, 1.5, 3.0}) {
            auto c = base_experiment("cournot-sc", Scheme::MS_SBR, eta, 2.0, 100, opts, seed);
            c.oracle = OracleChoice::FixedPoint;
            c.scheme.paths = stochastic ? 10 : 1;
            cap_stochastic(c);
            runs.push_back({"sbr", c});
        }
        for (double eta : {2.0, 3.0, 5.0}) {
            auto c = base_experiment("congestion", Scheme::MS_ABR, eta, 1.0 / eta, 400, opts, seed);
            c.oracle = OracleChoice::ClosedForm;
            c.scheme.paths = 10;
            cap_stochastic(c);
            runs.push_back({"abr", c});
        }
    } else if (target == "fig2") {
        for (double eta : {0.3, 0.5, 0.8}) {
            auto c = base_experiment("cournot-wc", Scheme::MS_SSBR, eta, 0.6 / eta, 100, opts, seed);
            c.oracle = OracleChoice::ClosedForm;
            c.scheme.paths = stochastic ? 10 : 1;
            c.scheme.x0 = std::vector<double>(4, 4.0);
            cap_stochastic(c);
            runs.push_back({"ssbr", c});
        }
        for (double eta : {0.3, 0.5, 0.8}) {
            auto c = base_experiment("cournot-wc", Scheme::MS_SABR, eta, 1.0 / eta, 400, opts, seed);
            c.oracle = OracleChoice::ClosedForm;
            c.scheme.paths = 10;
            c.scheme.x0 = std::vector<double>(4, 4.0);
            cap_stochastic(c);
            runs.push_back({"sabr", c});
        }
    } else {
        throw ConfigError("unknown reproduce target '" + target + "' (expected table3, fig1 or fig2)");
    }
    return runs;
}

}  // namespace

int cmd_reproduce(const std::string& target, const std::string& out_dir, const ReproduceOptions& opts,
                  std::ostream& log) {
    std::uint64_t seed = 0;
    std::vector<PlannedRun> runs;
    try {
        seed = opts.seed.value_or(target == "table3" ? kSeedTable3 : target == "fig1" ? kSeedFig1 : kSeedFig2);
        if (auto s = seed_from_env()) seed = *s;
        if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
        runs = plan(target, opts, seed);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    const std::string mode = to_string(opts.mode);
    std::ostringstream csv;
    if (target == "table3")
        csv << "eta,mu,e_K,e_K_path0,paths,mode,seed\n";
    else
        csv << "panel,scheme,game,eta,mu,k,metric,value,mode,seed\n";
    json summary{{"target", target}, {"mode", mode}, {"seed", seed}, {"runs", json::array()}};

    try {
        for (const auto& pr : runs) {
            const GameSpec game = pr.cfg.build_game();
            const auto oracle = resolve_oracle(game, pr.cfg);
            const RunRecord rec = run_scheme(game, pr.cfg.scheme, oracle);
            const auto& sc = pr.cfg.scheme;
            const std::string game_id = pr.cfg.game_doc.get<std::string>();
            if (target == "table3") {
                csv << short_double(sc.eta) << ',' << short_double(sc.mu) << ','
                    << short_double(rec.mean.back().e_k) << ','
                    << short_double(rec.paths.front().row(sc.K).e_k) << ',' << sc.paths << ',' << mode << ','
                    << seed << '\n';
            } else {
                auto emit = [&](int k, const char* metric, double v) {
                    csv << pr.panel << ',' << to_string(sc.scheme) << ',' << game_id << ',' << short_double(sc.eta)
                        << ',' << short_double(sc.mu) << ',' << k << ',' << metric << ',' << short_double(v) << ','
                        << mode << ',' << seed << '\n';
                };
                for (const auto& m : rec.mean) {
                    emit(m.k, "e_k", m.e_k);
                    emit(m.k, "resid_sq", m.resid_sq);
                }
                for (int k = 0; k <= sc.K; ++k) {
                    emit(k, "e_k_path0", rec.paths.front().row(k).e_k);
                    emit(k, "resid_sq_path0", rec.paths.front().row(k).resid_sq);
                }
            }
            json entry = run_summary_json(pr.cfg, rec, oracle);
            entry["panel"] = pr.panel;
            entry.erase("inexactness_path0");
            summary["runs"].push_back(entry);
            log << target << ' ' << pr.panel << ' ' << to_string(sc.scheme) << " eta=" << short_double(sc.eta)
                << " mu=" << short_double(sc.mu) << " e_K=" << short_double(rec.mean.back().e_k)
                << " resid_sq=" << short_double(rec.mean.back().resid_sq) << '\n';
        }
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / (target + ".csv"), csv.str());
        write_text(fs::path(out_dir) / (target + "_summary.json"), summary.dump(2) + "\n");
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const AssumptionError& e) {
        log << e.what() << '\n';
        return kExitAssumption;
    } catch (const std::exception& e) {
        log << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& game_id, const std::vector<double>& etas, double mu, const std::vector<double>& lbar,
              std::ostream& out) {
    GameSpec game;
    try {
        game = build_benchmark(game_id);
        if (etas.empty()) throw ConfigError("need at least one eta");
        for (double e : etas)
            if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eta values must be positive");
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be nonnegative");
        if (!lbar.empty() && lbar.size() != 1 && lbar.size() != game.num_players())
            throw ConfigError("--lbar takes one value or one per player");
        if (!lbar.empty() && game.game_class() != GameClass::StronglyConvex)
            throw ConfigError("--lbar applies to the gamma1 check of strongly convex games");
    } catch (const std::invalid_argument& e) {
        out << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        bool all = true;
        out << "game " << game.name() << " (" << to_string(game.game_class()) << ", " << game.num_players()
            << " players)\n";
        for (double eta : etas) {
            ContractionReport r;
            if (game.game_class() == GameClass::StronglyConvex) {
                std::optional<std::vector<double>> override_;
                if (!lbar.empty())
                    override_ = lbar.size() == 1 ? std::vector<double>(game.num_players(), lbar[0]) : lbar;
                r = gamma1_matrix(game, eta, mu, override_);
            } else {
                if (!(eta * game.max_rho() < 1.0)) {
                    out << "eta=" << short_double(eta) << " fails: eta * rho = " << short_double(eta * game.max_rho())
                        << " is not below 1\n";
                    all = false;
                    continue;
                }
                RngStream rng(0, 0, purpose::kDiagnostics);
                r = gamma2_matrix(game, eta, mu, fit_lhat(game, eta, mu, rng));
            }
            all = all && r.passes;
            out << "eta=" << short_double(eta) << " mu=" << short_double(mu) << ' ' << r.kind
                << " spectral_norm=" << short_double(r.spectral_norm);
            if (r.spectral_norm_own_modulus_only)
                out << " (own-cost modulus only: " << short_double(*r.spectral_norm_own_modulus_only) << ')';
            out << (r.passes ? " pass" : " FAIL") << '\n';
            out << "  report " << contraction_to_json(r).dump() << '\n';
        }
        out << "potentiality: " << to_string(game.potentiality()) << '\n';
        out << (all ? "all contraction checks pass\n" : "contraction check failed\n");
        return all ? kExitOk : kExitAssumption;
    } catch (const std::exception& e) {
        out << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace msgames
