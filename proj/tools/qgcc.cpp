// qgcc: robust guaranteed-cost analysis and coherent controller synthesis.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qgcc/cli.hpp"

namespace {

using namespace qgcc::cli;

struct Flags {
    std::string config_path;
    std::string method;
    std::string out;
    int samples = -1;
    long long seed = -1;
};

void add_common(CLI::App* sub, Flags& flags, Invocation& inv) {
    sub->add_option("--config", flags.config_path, "JSON run configuration");
    sub->add_option("--method", flags.method, "smallgain or popov")
        ->check(CLI::IsMember({"smallgain", "popov"}));
    sub->add_option("--out", flags.out, "output file (default: stdout)");
    sub->add_option("--samples", flags.samples, "verification samples");
    sub->add_option("--seed", flags.seed, "verification seed");
    sub->add_flag("--timing", inv.timing, "record wall-clock times in wall_ms");
}

// Loads the config and applies command-line overrides.
RunConfig resolve(const Flags& flags) {
    RunConfig config = flags.config_path.empty() ? default_config() : load_config(flags.config_path);
    if (flags.method == "smallgain") config.method = qgcc::Method::SmallGain;
    if (flags.method == "popov") config.method = qgcc::Method::Popov;
    if (!flags.out.empty()) config.output = flags.out;
    if (flags.samples >= 0) config.samples = flags.samples;
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qgcc - guaranteed cost analysis and coherent controller synthesis"};
    app.require_subcommand(1);

    Flags flags;
    Invocation inv;
    double from = 0.0, to = 0.0, step = 0.0, ktilde = 0.0, bound = 0.0;
    std::string controller;

    auto* analyze = app.add_subcommand("analyze", "guaranteed cost bound without a controller");
    auto* synthesize = app.add_subcommand("synthesize", "coherent controller with a cost bound");
    auto* sweep = app.add_subcommand("sweep", "bounds over a kappa or theta grid");
    auto* verify = app.add_subcommand("verify", "check a bound against sampled perturbations");
    auto* realize = app.add_subcommand("realize", "static squeezer realizing a controller");

    for (auto* sub : {analyze, synthesize, sweep, verify, realize}) add_common(sub, flags, inv);

    synthesize->add_option("--controller", controller, "controller JSON path");
    sweep->add_option("--param", inv.param, "kappa or theta")->check(CLI::IsMember({"kappa", "theta"}));
    auto* from_opt = sweep->add_option("--from", from, "first grid point");
    auto* to_opt = sweep->add_option("--to", to, "last grid point");
    auto* step_opt = sweep->add_option("--step", step, "grid step");
    sweep->add_option("--mode", inv.mode, "synthesis or analysis");
    verify->add_option("--controller", controller, "controller JSON from synthesize");
    auto* bound_opt = verify->add_option("--bound", bound, "bound to check instead of the computed one");
    verify->add_option("--mode", inv.mode, "synthesis or analysis");
    realize->add_option("--controller", controller, "controller JSON from synthesize")->required();
    auto* ktilde_opt = realize->add_option("--ktilde", ktilde, "squeezer coupling kappa_tilde")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        inv.config = resolve(flags);
    } catch (const qgcc::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (!controller.empty()) inv.controller_path = controller;
    if (*from_opt) inv.from = from;
    if (*to_opt) inv.to = to;
    if (*step_opt) inv.step = step;
    if (*bound_opt) inv.bound_override = bound;
    if (*ktilde_opt) inv.kappa_tilde = ktilde;

    if (*analyze) return cmd_analyze(inv, std::cout, std::cerr);
    if (*synthesize) return cmd_synthesize(inv, std::cout, std::cerr);
    if (*sweep) return cmd_sweep(inv, std::cout, std::cerr);
    if (*verify) return cmd_verify(inv, std::cout, std::cerr);
    return cmd_realize(inv, std::cout, std::cerr);
}
