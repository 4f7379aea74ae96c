#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "fedgbdt/commands.hpp"
#include "fedgbdt/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

fedgbdt::RunConfig load_with_overrides(const CommonArgs& args) {
    fedgbdt::RunConfig cfg = fedgbdt::load_run_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_given) cfg.master_seed = args.seed;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
    cmd->add_option("--out", args.out_dir, "override the config's output directory");
    cmd->add_option("--seed", args.seed, "override the config's master seed")
        ->each([&args](const std::string&) { args.seed_given = true; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated GBDT intrusion-detection simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args, central_args, ledger_args;
    CLI::App* sim = app.add_subcommand("simulate", "run the federated training pipeline");
    add_common(sim, sim_args);
    CLI::App* central = app.add_subcommand("central", "train the pooled-data comparator");
    add_common(central, central_args);
    CLI::App* ledger = app.add_subcommand("ledger", "emit the communication-cost table");
    add_common(ledger, ledger_args);

    std::string unlearn_model, unlearn_out;
    int unlearn_client = -1;
    CLI::App* unlearn = app.add_subcommand("unlearn", "remove one client from a saved model");
    unlearn->add_option("--model", unlearn_model, "saved model directory")->required();
    unlearn->add_option("--client", unlearn_client, "client id to remove")->required();
    unlearn->add_option("--out", unlearn_out, "output directory (default: inside the model dir)");

    std::string rules_model, rules_out;
    CLI::App* rules = app.add_subcommand("rules", "dump a saved model's decision rules");
    rules->add_option("--model", rules_model, "saved model directory")->required();
    rules->add_option("--out", rules_out, "directory to write rules.txt into");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? fedgbdt::kExitOk : fedgbdt::kExitConfigError;
    }

    try {
        if (sim->parsed()) return fedgbdt::cmd_simulate(load_with_overrides(sim_args));
        if (central->parsed()) return fedgbdt::cmd_central(load_with_overrides(central_args));
        if (ledger->parsed()) return fedgbdt::cmd_ledger(load_with_overrides(ledger_args));
        if (unlearn->parsed())
            return fedgbdt::cmd_unlearn(unlearn_model, unlearn_client, unlearn_out);
        if (rules->parsed()) return fedgbdt::cmd_rules(rules_model, rules_out);
    } catch (const fedgbdt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return fedgbdt::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fedgbdt::kExitPipelineError;
    }
    return fedgbdt::kExitConfigError;
}
