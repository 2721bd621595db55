#pragma once

#include "raf/state_eqs.hpp"

namespace raf {

struct ErrorPair {
    double e_gen = 0.5;
    double e_mem = 0.5;
};

// Square-loss kernel solution in closed form (lambda > 0).
OrderParams krr_closed_solution(const ErmSpec& spec);

struct LambdaOpt {
    double lambda = 0.0;
    bool zero_plus = false;  // the optimum sits at lambda -> 0+
};

LambdaOpt krr_lambda_opt(double eps, double mu1, double mu_star);

// lambda -> 0+ for the square loss with mu_star > 0.
OrderParams ridgeless_kernel_square_params(double alpha, double eps, double mu1, double mu_star);
ErrorPair ridgeless_kernel_square(double alpha, double eps, double mu1, double mu_star);

// Minimum-norm least squares for the linear model; alpha = 1 is singular.
ErrorPair ridgeless_perceptron_square(double alpha, double eps);

// Ridgeless errors for any geometry and loss, dispatching to the closed forms, the
// rescaled hinge system, or the finite lambda = 0 system of the linear model.
StateSolution ridgeless_solution(Loss loss, double alpha, double eps, double mu1, double mu_star,
                                 const SolverConfig& cfg = {});

// Root of 1 = alpha [1/2 - (1-eps)/pi atan(alpha (1-eps)/pi)]; +inf at eps = 0.
double hinge_interp_threshold(double eps);

ErrorPair infinite_lambda_errors(double alpha, double eps, double mu1, double mu_star);

// sqrt(1 - a^2) / (pi a), a = (1-eps) sqrt(2/pi): E_gen ~ coefficient / sqrt(alpha).
double krr_large_alpha_coeff(double eps);

}  // namespace raf
