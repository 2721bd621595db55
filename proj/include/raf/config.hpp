#pragma once

#include "raf/channel.hpp"
#include "raf/kernels.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace raf {

// Flat "key = value" text; '#' starts a comment. Duplicate keys are an error.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);
std::string emit_config_text(const ConfigMap& m);

enum class KeyKind { Real, Integer, Text, Flag, RealList };

struct KeySpec {
    std::string name;
    KeyKind kind = KeyKind::Real;
    std::string help;
};

const std::vector<std::string>& command_names();
// Keys accepted by a command, in documentation order.
const std::vector<KeySpec>& command_keys(const std::string& command);

// Validated description of one run. Fields a command does not use keep their defaults.
struct RunConfig {
    std::string command;
    Loss loss = Loss::Square;
    double alpha = 0.0;
    double eps = 0.0;
    // geometry: explicit (mu1, mustar), a kernel family, or an angle
    double mu1 = 0.0;
    double mustar = 0.0;
    std::optional<KernelFamily> kernel;
    double lambda = 0.0;
    double kappa = 0.0;  // 0 = kernel limit
    // grid
    std::string sweep;  // lambda | angle | alpha | eps | kappa, or empty
    double min = 0.0;
    double max = 0.0;
    int count = 0;
    bool log_spacing = true;
    bool endpoints = true;
    std::string objective = "lambda-opt";  // angle sweeps: lambda-opt | ridgeless | fixed
    std::string estimator = "erm";         // rate: bo | erm
    // Monte Carlo
    int d = 200;
    int repeats = 5;
    std::uint64_t seed = 1;
    std::uint64_t seed_features = 2;
    int n_test = 2000;
    std::string model = "kernel";  // kernel | rf
    std::string activation = "relu";
    std::vector<double> lambda_grid;
    bool drop_constant = true;
    bool theory = true;
    std::string output = "-";
    std::string gnuplot;  // optional script path

    bool operator==(const RunConfig&) const = default;
};

// Checks every key against the command schema and range rules. Throws ConfigError
// naming the offending key.
RunConfig build_run_config(const std::string& command, const ConfigMap& m);

// Canonical key set for `cfg`; build_run_config(cfg.command, to_config_map(cfg)) == cfg.
ConfigMap to_config_map(const RunConfig& cfg);

std::vector<double> grid_values(const RunConfig& cfg);

}  // namespace raf
