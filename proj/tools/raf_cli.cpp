#include "raf/commands.hpp"
#include "raf/config.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

const char* describe_command(const std::string& c) {
    if (c == "bo") return "Bayes-optimal generalization error (optionally swept over alpha or eps)";
    if (c == "bo-rate") return "Large-alpha rate of the Bayes-optimal error (JSON)";
    if (c == "state-eq") return "Solve the state equations at one point or along a sweep";
    if (c == "sweep-lambda") return "Trade-off curve over lambda with the ridgeless and infinite-lambda endpoints";
    if (c == "sweep-angle") return "Errors over the kernel angle at lambda_opt, lambda -> 0+ or a fixed lambda";
    if (c == "threshold") return "Hinge interpolation threshold alpha_c(eps) (JSON)";
    if (c == "rate") return "Log-log rate fit of E_gen over alpha (JSON)";
    if (c == "cross-validate") return "Lambda minimizing the generalization error";
    if (c == "mc") return "Monte Carlo kernel or random-features experiment with theory rows";
    if (c == "kernels") return "Kernel families and their (mu0, mu1, mustar) coefficients";
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rules-and-facts learning curves: state equations, closed forms and Monte Carlo"};
    app.require_subcommand(1);
    app.footer("Worker threads: RAF_WORKERS. Exit codes: 0 ok, 1 config or io error, 2 non-convergence.");

    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::map<std::string, std::string>> values;
    for (const auto& name : raf::command_names()) {
        CLI::App* sub = app.add_subcommand(name, describe_command(name));
        sub->add_option("--config", config_paths[name], "flat key = value file; flags override it");
        for (const auto& key : raf::command_keys(name)) {
            std::string* slot = &values[name][key.name];
            sub->add_option("--" + key.name, *slot, key.help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : raf::kExitConfig;
    }

    for (const auto& name : raf::command_names()) {
        CLI::App* sub = app.get_subcommand(name);
        if (!sub->parsed()) continue;
        raf::ConfigMap flags;
        for (const auto& key : raf::command_keys(name))
            if (sub->count("--" + key.name) > 0) flags[key.name] = values[name][key.name];
        return raf::run_cli(name, config_paths[name], flags, std::cout, std::cerr);
    }
    return raf::kExitConfig;
}
