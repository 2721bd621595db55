#pragma once

#include "raf/config.hpp"
#include "raf/csv.hpp"
#include "raf/state_eqs.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace raf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNoConvergence = 2 };

// Theory at one point: kernel limit when kappa == 0, random features otherwise.
// lambda == 0 selects the ridgeless branch.
StateSolution theory_point(Loss loss, double alpha, double eps, double mu1, double mustar, double lambda,
                           double kappa = 0.0);

CsvRow theory_row(double sweep_value, Loss loss, double alpha, double eps, double mu1, double mustar,
                  double lambda, const StateSolution& sol);

// Rows of a theory sweep (state-eq, sweep-lambda, sweep-angle, cross-validate, bo) in
// grid order. Points that fail are kept and flagged.
std::vector<CsvRow> run_sweep(const RunConfig& cfg);

// Runs a validated command and writes its CSV or JSON output. Returns the exit code;
// io and config problems are reported on `err`.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses, validates and runs. `flags` override the values from `config_path`.
int run_cli(const std::string& command, const std::string& config_path, const ConfigMap& flags,
            std::ostream& out, std::ostream& err);

std::string gnuplot_stub(const std::string& csv_path, const std::string& title);

}  // namespace raf
