#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msgames/game.hpp"
#include "msgames/schemes.hpp"

namespace msgames {

// Game documents. Unknown keys are rejected with ConfigError.
GameSpec game_from_json(const nlohmann::json& doc);
nlohmann::json game_to_json(const GameSpec& game);

PiecewiseQuadratic1D pq_from_json(const nlohmann::json& doc);
nlohmann::json pq_to_json(const PiecewiseQuadratic1D& f);

enum class OracleChoice { Auto, None, FixedPoint, Grid, ClosedForm, Explicit };

struct ExperimentConfig {
    nlohmann::json game_doc;  // benchmark id string or inline game document
    SchemeConfig scheme;
    OracleChoice oracle = OracleChoice::Auto;
    std::vector<double> oracle_values;  // OracleChoice::Explicit
    std::optional<std::string> outputs;

    [[nodiscard]] GameSpec build_game() const;
};

// Strict parse: unknown fields, wrong types and out-of-range values raise
// ConfigError.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
// Canonical form with every field explicit; parse_experiment(to_json(c))
// reproduces c.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

// Equilibrium used for e_k, or nullopt when the choice yields none.
std::optional<Profile> resolve_oracle(const GameSpec& game, const ExperimentConfig& cfg);

}  // namespace msgames
