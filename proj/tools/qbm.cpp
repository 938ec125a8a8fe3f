// qbm: price options in the quantum binomial market, inspect the risk-neutral
// disk, run the oracle agreement checks, and sweep prices over N.
//
// Precedence: command-line flags > --config file > built-in defaults.

#include "qbm/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
    std::optional<double> s0, b0, a, b, r, strike;
    std::optional<int> periods, samples;
    std::optional<std::string> model, format, config;
    std::optional<std::uint64_t> seed;
    std::optional<double> inject_fault;
    bool dump_config = false;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--s0", f.s0, "Initial stock price S0");
    cmd->add_option("--b0", f.b0, "Initial bond value B0");
    cmd->add_option("--a", f.a, "Down return a (>= -1)");
    cmd->add_option("--b", f.b, "Up return b");
    cmd->add_option("--r", f.r, "Risk-free rate per period");
    cmd->add_option("--strike", f.strike, "Call strike K");
    cmd->add_option("--periods", f.periods, "Number of periods N (max N for sweep)");
    cmd->add_option("--model", f.model, "classical | quantum_single | mb | be");
    cmd->add_option("--seed", f.seed, "Seed for disk sampling and random oracle inputs");
    cmd->add_option("--samples", f.samples, "Number of disk samples");
    cmd->add_option("--format", f.format, "table | csv | json");
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_flag("--dump-config", f.dump_config, "Print the effective config as JSON and exit");
}

qbm::cli::RunConfig resolve(const Flags& f) {
    qbm::cli::RunConfig cfg;
    if (f.config) qbm::cli::apply_config_file(cfg, *f.config);
    if (f.s0) cfg.market.stock_initial = *f.s0;
    if (f.b0) cfg.market.bond_initial = *f.b0;
    if (f.a) cfg.market.down = *f.a;
    if (f.b) cfg.market.up = *f.b;
    if (f.r) cfg.market.rate = *f.r;
    if (f.strike) cfg.strike = *f.strike;
    if (f.periods) cfg.periods = *f.periods;
    if (f.samples) cfg.samples = *f.samples;
    if (f.seed) cfg.seed = *f.seed;
    if (f.model) cfg.model = qbm::parse_model(*f.model);
    if (f.format) cfg.output_format = qbm::cli::parse_format(*f.format);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum binomial market option pricer"};
    app.require_subcommand(1);

    Flags flags;
    CLI::App* price = app.add_subcommand("price", "Price a European call");
    CLI::App* disk = app.add_subcommand("disk", "Report risk-neutral disk geometry");
    CLI::App* verify = app.add_subcommand("verify", "Run the oracle agreement checks");
    CLI::App* sweep = app.add_subcommand("sweep", "Price for N = 1..periods (CSV)");
    for (CLI::App* cmd : {price, disk, verify, sweep}) add_common_flags(cmd, flags);
    verify->add_option("--inject-fault", flags.inject_fault,
                       "Offset added to the closed form before comparison (failure-path testing)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    qbm::cli::RunConfig cfg;
    try {
        cfg = resolve(flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    if (flags.dump_config) {
        std::cout << qbm::cli::to_json(cfg).dump(2) << '\n';
        return 0;
    }

    qbm::cli::Command command = qbm::cli::Command::price;
    if (disk->parsed()) command = qbm::cli::Command::disk;
    else if (verify->parsed()) command = qbm::cli::Command::verify;
    else if (sweep->parsed()) command = qbm::cli::Command::sweep;

    qbm::cli::VerifyOptions opts;
    if (flags.inject_fault) opts.inject_fault = *flags.inject_fault;
    return qbm::cli::dispatch(command, cfg, std::cout, std::cerr, opts);
}
