#pragma once

#include "raf/closed_forms.hpp"
#include "raf/state_eqs.hpp"

#include <functional>
#include <vector>

namespace raf {

struct CvResult {
    double lambda = 0.0;
    bool zero_plus = false;  // optimum at lambda -> 0+
    StateSolution sol;
};

struct LambdaSearch {
    double log_lo = -8.0;  // log10 bounds
    double log_hi = 3.0;
    int scan_points = 23;
    double tol = 1e-4;  // on log10 lambda
    long max_scan_iter = 5000;
};

// Errors at a given lambda, or at lambda -> 0+ when lambda == 0.
StateSolution solve_at(Loss loss, double alpha, double eps, double mu1, double mu_star, double lambda,
                       const SolverConfig& cfg = {});

// Square loss: closed-form lambda_opt. Hinge: log-lambda scan then golden section,
// compared against the ridgeless value.
CvResult cross_validate_lambda(Loss loss, double alpha, double eps, double mu1, double mu_star,
                               const SolverConfig& cfg = {}, const LambdaSearch& search = {});

enum class AngleObjective { LambdaOpt, Ridgeless };

struct AngleResult {
    double gamma = 0.0;
    double lambda = 0.0;
    bool zero_plus = false;
    StateSolution sol;
};

// Minimum of E_gen over gamma on the unit circle mu1 = sin, mu_star = cos. The
// ridgeless objective excludes gamma = pi/2, whose lambda -> 0+ limit does not
// interpolate above the hinge threshold.
AngleResult min_over_angle(Loss loss, double alpha, double eps, AngleObjective objective,
                           const SolverConfig& cfg = {}, int scan_points = 31, double tol = 1e-5);

struct RateFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double r2 = 0.0;
};

// Least squares of log E against log alpha.
RateFit fit_rate(const std::vector<double>& alpha, const std::vector<double>& err);

}  // namespace raf
