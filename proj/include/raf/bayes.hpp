#pragma once

#include "raf/numerics.hpp"

namespace raf {

struct BoSolution {
    double q_b = 0.0;
    double q_hat_b = 0.0;
    long iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

struct BoConfig {
    FixedPointConfig fp{};
    int quad_order = 400;
    double init_q = 0.5;
};

// Right-hand side of the conjugate equation as a function of q_b.
double bo_q_hat(double q_b, double alpha, double eps, int quad_order = 400);

BoSolution solve_bo(double alpha, double eps, const BoConfig& cfg = {});

double bo_gen_error(double q_b);

// Integral of exp(-t^2) / (1 + (1-eps) erf(t/sqrt 2)) over the real line.
double bo_J(double eps, int quad_order = 400);

// Large-alpha constant C with alpha * E_gen -> C.
double bo_rate_constant(double eps);

}  // namespace raf
