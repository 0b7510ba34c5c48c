#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msgames/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Moreau-smoothed best-response solvers for stochastic nonsmooth games"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one configured experiment");
    std::string config_path;
    std::string run_out;
    int run_jobs = 0;
    run->add_option("--config", config_path, "Experiment JSON")->required();
    run->add_option("--out", run_out, "Output directory (overrides the config's outputs)");
    run->add_option("--jobs", run_jobs, "Concurrent sample paths");

    auto* repro = app.add_subcommand("reproduce", "Regenerate the table3, fig1 or fig2 data");
    std::string target;
    std::string repro_out;
    std::string mode = "analytic";
    std::optional<std::uint64_t> repro_seed;
    int repro_jobs = 1;
    repro->add_option("target", target, "table3 | fig1 | fig2")->required();
    repro->add_option("--out", repro_out, "Output directory")->required();
    repro->add_option("--mode", mode, "analytic | stochastic")->check(CLI::IsMember({"analytic", "stochastic"}));
    repro->add_option("--seed", repro_seed, "Seed (default: fixed per target)");
    repro->add_option("--jobs", repro_jobs, "Concurrent sample paths")->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "Contraction and potentiality checks for a benchmark game");
    std::string game_id;
    std::vector<double> etas;
    double mu = 0.0;
    std::vector<double> lbar;
    check->add_option("--game", game_id, "cournot-sc | congestion | cournot-wc")->required();
    check->add_option("--eta", etas, "Smoothing parameters (comma separated)")->required()->delimiter(',');
    check->add_option("--mu", mu, "Proximal weight")->required();
    check->add_option("--lbar", lbar, "Coupling Lipschitz override, one value or one per player")->delimiter(',');

    auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");
    std::uint64_t selftest_seed = 0;
    selftest->add_option("--seed", selftest_seed, "Seed for randomized suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? msgames::kExitOk : msgames::kExitConfig;
    }

    if (*run) {
        std::optional<std::string> out;
        if (!run_out.empty()) out = run_out;
        std::optional<int> jobs;
        if (run->count("--jobs") > 0) jobs = run_jobs;
        return msgames::cmd_run(config_path, out, jobs, std::cerr);
    }
    if (*repro) {
        msgames::ReproduceOptions opts;
        opts.mode = mode == "stochastic" ? msgames::OracleMode::Stochastic : msgames::OracleMode::Analytic;
        opts.seed = repro_seed;
        opts.jobs = repro_jobs;
        return msgames::cmd_reproduce(target, repro_out, opts, std::cout);
    }
    if (*check) return msgames::cmd_check(game_id, etas, mu, lbar, std::cout);
    if (*selftest) return msgames::cmd_selftest(std::cout, selftest_seed);
    return msgames::kExitConfig;
}
