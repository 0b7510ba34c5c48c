#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msgames/config.hpp"
#include "msgames/schemes.hpp"

namespace msgames {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitAssumption = 2, kExitRuntime = 3 };

// %.17g, which round-trips every finite double.
std::string format_double(double v);
// Shortest round-trip form, for human-readable output.
std::string short_double(double v);

// metrics.csv body: header `k,metric,value,path`, per-path rows followed by
// rows with path = "mean". e_k rows are omitted when the run had no oracle.
void write_metrics_csv(const RunRecord& rec, std::ostream& os);
void write_iterates_csv(const RunRecord& rec, std::ostream& os);

nlohmann::json contraction_to_json(const ContractionReport& r);
nlohmann::json run_summary_json(const ExperimentConfig& cfg, const RunRecord& rec, const std::optional<Profile>& oracle);

// MSGAMES_SEED, when set, replaces the configured seed. Throws ConfigError on
// an unparsable value.
std::optional<std::uint64_t> seed_from_env();

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir, std::optional<int> jobs,
            std::ostream& log);

struct ReproduceOptions {
    OracleMode mode = OracleMode::Analytic;
    std::optional<std::uint64_t> seed;  // default: per-target seed
    int jobs = 1;
};

// Default seeds per target.
inline constexpr std::uint64_t kSeedTable3 = 11;
inline constexpr std::uint64_t kSeedFig1 = 12;
inline constexpr std::uint64_t kSeedFig2 = 13;

int cmd_reproduce(const std::string& target, const std::string& out_dir, const ReproduceOptions& opts,
                  std::ostream& log);

// lbar: empty, one value for every player, or one value per player.
int cmd_check(const std::string& game_id, const std::vector<double>& etas, double mu, const std::vector<double>& lbar,
              std::ostream& out);

int cmd_selftest(std::ostream& out, std::uint64_t seed = 0);

}  // namespace msgames
