#include "msgames/config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "msgames/benchmarks.hpp"
#include "msgames/errors.hpp"

namespace msgames {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

bool present(const json& obj, const char* key) { return obj.contains(key) && !obj.at(key).is_null(); }

double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
    return d;
}

std::uint64_t get_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(where + ": expected a nonnegative integer");
}

int get_int(const json& v, const std::string& where) {
    const auto c = get_count(v, where);
    if (c > 1000000000ULL) throw ConfigError(where + ": too large");
    return static_cast<int>(c);
}

bool get_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(get_number(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

UniformCoefficient coeff_from_json(const json& v, const std::string& where) {
    if (v.is_number()) return UniformCoefficient::constant(get_number(v, where));
    reject_unknown(v, {"lo", "hi"}, where);
    if (!v.contains("lo") || !v.contains("hi")) throw ConfigError(where + ": need lo and hi");
    return {get_number(v.at("lo"), where + ".lo"), get_number(v.at("hi"), where + ".hi")};
}

json coeff_to_json(const UniformCoefficient& c) {
    if (c.deterministic()) return c.lo;
    return json{{"lo", c.lo}, {"hi", c.hi}};
}

std::vector<Quadratic> quads_from_json(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a nonempty array of [a, b, c]");
    std::vector<Quadratic> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto q = get_numbers(v[k], where + "[" + std::to_string(k) + "]");
        if (q.size() != 3) throw ConfigError(where + ": each piece needs exactly three coefficients");
        out.push_back({q[0], q[1], q[2]});
    }
    return out;
}

const char* solver_name(InnerSolver s) { return s == InnerSolver::Exact ? "exact" : "imgm"; }

const char* oracle_name(OracleChoice c) {
    switch (c) {
        case OracleChoice::Auto: return "auto";
        case OracleChoice::None: return "none";
        case OracleChoice::FixedPoint: return "fixed_point";
        case OracleChoice::Grid: return "grid";
        case OracleChoice::ClosedForm: return "closed_form";
        case OracleChoice::Explicit: return "explicit";
    }
    return "auto";
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

PiecewiseQuadratic1D pq_from_json(const json& doc) {
    reject_unknown(doc, {"max_of", "pieces", "breaks"}, "piecewise quadratic");
    try {
        if (doc.contains("max_of")) {
            if (doc.contains("pieces") || doc.contains("breaks"))
                throw ConfigError("piecewise quadratic: use either max_of or pieces/breaks");
            return PiecewiseQuadratic1D::max_of(quads_from_json(doc.at("max_of"), "max_of"));
        }
        if (!doc.contains("pieces")) throw ConfigError("piecewise quadratic: need max_of or pieces");
        const auto breaks = doc.contains("breaks") ? get_numbers(doc.at("breaks"), "breaks") : std::vector<double>{};
        return PiecewiseQuadratic1D(quads_from_json(doc.at("pieces"), "pieces"), breaks);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("piecewise quadratic: ") + e.what());
    }
}

json pq_to_json(const PiecewiseQuadratic1D& f) {
    json pieces = json::array();
    for (const auto& q : f.pieces()) pieces.push_back({q.a, q.b, q.c});
    return json{{"pieces", pieces}, {"breaks", f.breaks()}};
}

GameSpec game_from_json(const json& doc) {
    if (doc.is_string()) {
        try {
            return build_benchmark(doc.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    reject_unknown(doc, {"name", "class", "players", "selection_probs", "potential_attested", "contraction_region"},
                   "game");
    const std::string name = present(doc, "name") ? get_string(doc.at("name"), "game.name") : "custom";
    if (!present(doc, "class")) throw ConfigError("game: missing class");
    const std::string cls = get_string(doc.at("class"), "game.class");
    GameClass gc;
    if (cls == "strongly_convex")
        gc = GameClass::StronglyConvex;
    else if (cls == "weakly_convex")
        gc = GameClass::WeaklyConvex;
    else
        throw ConfigError("game.class must be strongly_convex or weakly_convex");

    if (!present(doc, "players") || !doc.at("players").is_array() || doc.at("players").empty())
        throw ConfigError("game: players must be a nonempty array");
    std::vector<PlayerSpec> players;
    try {
        for (std::size_t i = 0; i < doc.at("players").size(); ++i) {
            const json& pj = doc.at("players")[i];
            const std::string where = "game.players[" + std::to_string(i) + "]";
            reject_unknown(pj,
                           {"dim", "lo", "hi", "own_cost", "own_coeff", "own_quadratic", "intercept", "coupling",
                            "coupling_lipschitz", "offset", "declared_rho"},
                           where);
            PlayerSpec p;
            if (!pj.contains("lo") || !pj.contains("hi")) throw ConfigError(where + ": need lo and hi");
            p.set = BoxSet(get_numbers(pj.at("lo"), where + ".lo"), get_numbers(pj.at("hi"), where + ".hi"));
            p.dim = present(pj, "dim") ? get_count(pj.at("dim"), where + ".dim") : p.set.dim();
            if (!pj.contains("own_cost") || !pj.at("own_cost").is_array())
                throw ConfigError(where + ": own_cost must be an array (one entry per coordinate)");
            for (const auto& f : pj.at("own_cost")) p.own_cost.push_back(pq_from_json(f));
            if (present(pj, "own_coeff")) p.own_coeff = coeff_from_json(pj.at("own_coeff"), where + ".own_coeff");
            if (present(pj, "own_quadratic"))
                p.own_quadratic = coeff_from_json(pj.at("own_quadratic"), where + ".own_quadratic");
            if (present(pj, "intercept")) {
                if (!pj.at("intercept").is_array()) throw ConfigError(where + ".intercept: expected an array");
                for (const auto& c : pj.at("intercept")) p.intercept.push_back(coeff_from_json(c, where + ".intercept"));
            }
            if (present(pj, "coupling")) {
                if (!pj.at("coupling").is_array()) throw ConfigError(where + ".coupling: expected an array");
                for (const auto& t : pj.at("coupling")) {
                    reject_unknown(t, {"row", "player", "coord", "weight"}, where + ".coupling");
                    CouplingTerm term;
                    term.row = present(t, "row") ? get_count(t.at("row"), "row") : 0;
                    if (!present(t, "player") || !present(t, "weight"))
                        throw ConfigError(where + ".coupling: need player and weight");
                    term.player = get_count(t.at("player"), "player");
                    term.coord = present(t, "coord") ? get_count(t.at("coord"), "coord") : 0;
                    term.weight = coeff_from_json(t.at("weight"), where + ".coupling.weight");
                    p.coupling.push_back(term);
                }
            }
            if (present(pj, "coupling_lipschitz"))
                p.coupling_lipschitz = get_number(pj.at("coupling_lipschitz"), where + ".coupling_lipschitz");
            if (present(pj, "offset")) {
                const json& o = pj.at("offset");
                reject_unknown(o, {"coeff", "h"}, where + ".offset");
                if (!present(o, "h")) throw ConfigError(where + ".offset: need h");
                p.offset = SeparableOffset{present(o, "coeff") ? coeff_from_json(o.at("coeff"), where + ".offset.coeff")
                                                               : UniformCoefficient::constant(1.0),
                                           pq_from_json(o.at("h"))};
            }
            if (present(pj, "declared_rho")) p.declared_rho = get_number(pj.at("declared_rho"), where + ".declared_rho");
            players.push_back(std::move(p));
        }
        std::optional<std::vector<double>> probs;
        if (present(doc, "selection_probs")) probs = get_numbers(doc.at("selection_probs"), "game.selection_probs");
        const bool attested = present(doc, "potential_attested") && get_bool(doc.at("potential_attested"), "game.potential_attested");
        std::optional<BoxSet> region;
        if (present(doc, "contraction_region")) {
            const json& r = doc.at("contraction_region");
            reject_unknown(r, {"lo", "hi"}, "game.contraction_region");
            region = BoxSet(get_numbers(r.at("lo"), "contraction_region.lo"), get_numbers(r.at("hi"), "contraction_region.hi"));
        }
        return GameSpec::build(name, std::move(players), gc, probs, attested, region);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("game: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("game: ") + e.what());
    }
}

json game_to_json(const GameSpec& game) {
    json players = json::array();
    for (const auto& p : game.players()) {
        json pj{{"dim", p.dim}, {"lo", p.set.lo}, {"hi", p.set.hi}};
        json own = json::array();
        for (const auto& f : p.own_cost) own.push_back(pq_to_json(f));
        pj["own_cost"] = own;
        pj["own_coeff"] = coeff_to_json(p.own_coeff);
        pj["own_quadratic"] = coeff_to_json(p.own_quadratic);
        json icpt = json::array();
        for (const auto& c : p.intercept) icpt.push_back(coeff_to_json(c));
        pj["intercept"] = icpt;
        json coup = json::array();
        for (const auto& t : p.coupling)
            coup.push_back({{"row", t.row}, {"player", t.player}, {"coord", t.coord}, {"weight", coeff_to_json(t.weight)}});
        pj["coupling"] = coup;
        pj["coupling_lipschitz"] = opt(p.coupling_lipschitz);
        pj["offset"] = p.offset ? json{{"coeff", coeff_to_json(p.offset->coeff)}, {"h", pq_to_json(p.offset->h)}}
                                : json(nullptr);
        pj["declared_rho"] = opt(p.declared_rho);
        players.push_back(pj);
    }
    json doc{{"name", game.name()},
             {"class", to_string(game.game_class())},
             {"players", players},
             {"selection_probs", game.selection_probs()},
             {"potential_attested", game.potential_attested()}};
    if (game.contraction_region())
        doc["contraction_region"] = {{"lo", game.contraction_region()->lo}, {"hi", game.contraction_region()->hi}};
    else
        doc["contraction_region"] = nullptr;
    return doc;
}

GameSpec ExperimentConfig::build_game() const { return game_from_json(game_doc); }

ExperimentConfig parse_experiment(const json& doc) {
    reject_unknown(doc,
                   {"game", "scheme", "eta", "mu", "K", "nu", "eps_async", "gamma_resid", "inner", "inner_solver",
                    "q_prime", "prox_sample_cap", "mode", "paths", "seed", "x0", "oracle", "outputs", "emit_iterates",
                    "early_stop", "jobs"},
                   "config");
    ExperimentConfig c;
    if (!present(doc, "game")) throw ConfigError("config: missing game");
    c.game_doc = doc.at("game");
    if (!c.game_doc.is_string() && !c.game_doc.is_object()) throw ConfigError("config.game: expected an id or object");
    if (!present(doc, "scheme")) throw ConfigError("config: missing scheme");
    SchemeConfig& s = c.scheme;
    s.scheme = scheme_from_string(get_string(doc.at("scheme"), "scheme"));
    if (present(doc, "eta")) s.eta = get_number(doc.at("eta"), "eta");
    if (present(doc, "mu")) s.mu = get_number(doc.at("mu"), "mu");
    if (present(doc, "K")) s.K = get_int(doc.at("K"), "K");
    if (present(doc, "nu")) s.nu = get_number(doc.at("nu"), "nu");
    if (present(doc, "eps_async")) s.eps_async = get_number(doc.at("eps_async"), "eps_async");
    if (present(doc, "gamma_resid")) s.gamma_resid = get_number(doc.at("gamma_resid"), "gamma_resid");
    if (present(doc, "inner")) {
        const json& in = doc.at("inner");
        reject_unknown(in, {"beta", "t0", "sample_cap", "gamma", "p_hat", "theta", "max_steps"}, "inner");
        if (present(in, "beta")) s.inner.beta = get_number(in.at("beta"), "inner.beta");
        if (present(in, "t0")) s.inner.t0 = get_count(in.at("t0"), "inner.t0");
        if (present(in, "sample_cap")) s.inner.sample_cap = get_count(in.at("sample_cap"), "inner.sample_cap");
        if (present(in, "gamma")) s.inner.gamma = get_number(in.at("gamma"), "inner.gamma");
        if (present(in, "p_hat")) s.inner.p_hat = get_number(in.at("p_hat"), "inner.p_hat");
        if (present(in, "theta")) s.inner.theta = get_number(in.at("theta"), "inner.theta");
        if (present(in, "max_steps")) s.inner.max_steps = get_count(in.at("max_steps"), "inner.max_steps");
    }
    if (present(doc, "inner_solver")) {
        const auto v = get_string(doc.at("inner_solver"), "inner_solver");
        if (v == "imgm")
            s.inner_solver = InnerSolver::Imgm;
        else if (v == "exact")
            s.inner_solver = InnerSolver::Exact;
        else
            throw ConfigError("inner_solver must be imgm or exact");
    }
    if (present(doc, "q_prime")) s.q_prime = get_number(doc.at("q_prime"), "q_prime");
    if (present(doc, "prox_sample_cap")) s.prox_sample_cap = get_count(doc.at("prox_sample_cap"), "prox_sample_cap");
    if (present(doc, "mode")) {
        const auto v = get_string(doc.at("mode"), "mode");
        if (v == "analytic")
            s.mode = OracleMode::Analytic;
        else if (v == "stochastic")
            s.mode = OracleMode::Stochastic;
        else
            throw ConfigError("mode must be analytic or stochastic");
    }
    if (present(doc, "paths")) s.paths = get_int(doc.at("paths"), "paths");
    if (present(doc, "seed")) s.seed = get_count(doc.at("seed"), "seed");
    if (present(doc, "x0")) s.x0 = get_numbers(doc.at("x0"), "x0");
    if (present(doc, "emit_iterates")) s.emit_iterates = get_bool(doc.at("emit_iterates"), "emit_iterates");
    if (present(doc, "early_stop")) s.early_stop = get_number(doc.at("early_stop"), "early_stop");
    if (present(doc, "jobs")) s.jobs = get_int(doc.at("jobs"), "jobs");
    if (present(doc, "outputs")) c.outputs = get_string(doc.at("outputs"), "outputs");
    if (present(doc, "oracle")) {
        const json& o = doc.at("oracle");
        if (o.is_array()) {
            c.oracle = OracleChoice::Explicit;
            c.oracle_values = get_numbers(o, "oracle");
        } else {
            const auto v = get_string(o, "oracle");
            if (v == "auto")
                c.oracle = OracleChoice::Auto;
            else if (v == "none")
                c.oracle = OracleChoice::None;
            else if (v == "fixed_point")
                c.oracle = OracleChoice::FixedPoint;
            else if (v == "grid")
                c.oracle = OracleChoice::Grid;
            else if (v == "closed_form")
                c.oracle = OracleChoice::ClosedForm;
            else
                throw ConfigError("oracle must be auto, none, fixed_point, grid, closed_form or an array");
        }
    }
    s.validate();
    return c;
}

json experiment_to_json(const ExperimentConfig& c) {
    const SchemeConfig& s = c.scheme;
    json inner{{"beta", s.inner.beta},           {"t0", s.inner.t0},       {"sample_cap", opt(s.inner.sample_cap)},
               {"gamma", opt(s.inner.gamma)},    {"p_hat", opt(s.inner.p_hat)}, {"theta", s.inner.theta},
               {"max_steps", opt(s.inner.max_steps)}};
    json doc{{"game", c.game_doc},
             {"scheme", to_string(s.scheme)},
             {"eta", s.eta},
             {"mu", s.mu},
             {"K", s.K},
             {"nu", s.nu},
             {"eps_async", opt(s.eps_async)},
             {"gamma_resid", opt(s.gamma_resid)},
             {"inner", inner},
             {"inner_solver", solver_name(s.inner_solver)},
             {"q_prime", s.q_prime},
             {"prox_sample_cap", opt(s.prox_sample_cap)},
             {"mode", to_string(s.mode)},
             {"paths", s.paths},
             {"seed", s.seed},
             {"x0", opt(s.x0)},
             {"outputs", opt(c.outputs)},
             {"emit_iterates", s.emit_iterates},
             {"early_stop", s.early_stop},
             {"jobs", s.jobs}};
    doc["oracle"] = c.oracle == OracleChoice::Explicit ? json(c.oracle_values) : json(oracle_name(c.oracle));
    return doc;
}

std::optional<Profile> resolve_oracle(const GameSpec& game, const ExperimentConfig& cfg) {
    switch (cfg.oracle) {
        case OracleChoice::None: return std::nullopt;
        case OracleChoice::FixedPoint: return oracle_fixed_point(game);
        case OracleChoice::Grid: return oracle_grid(game);
        case OracleChoice::ClosedForm:
            if (game.name() == "congestion") return congestion_closed_form();
            if (game.name() == "cournot-wc") return cournot_wc_closed_form();
            throw ConfigError("oracle closed_form is only available for congestion and cournot-wc");
        case OracleChoice::Explicit: {
            Profile p = game.zero_profile();
            if (cfg.oracle_values.size() != p.values.size()) throw ConfigError("oracle: wrong dimension");
            p.values = cfg.oracle_values;
            return p;
        }
        case OracleChoice::Auto: {
            if (game.game_class() == GameClass::StronglyConvex) return oracle_fixed_point(game);
            for (const auto& p : game.players())
                if (p.dim != 1) return std::nullopt;
            return oracle_grid(game);
        }
    }
    return std::nullopt;
}

}  // namespace msgames
