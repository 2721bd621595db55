#pragma once

#include "raf/channel.hpp"
#include "raf/kernels.hpp"
#include "raf/numerics.hpp"

#include <string>

namespace raf {

struct OrderParams {
    double m = 0.0;
    double q = 0.0;
    double V = 0.0;
    double m_hat = 0.0;
    double q_hat = 0.0;
    double V_hat = 0.0;
};

struct ErmSpec {
    Loss loss = Loss::Square;
    double alpha = 1.0;
    double eps = 0.0;
    double mu1 = 1.0;
    double mu_star = 0.0;
    double lambda = 1.0;
};

void validate(const ErmSpec& spec, bool allow_zero_lambda = false);

enum class HatMethod {
    Analytic,    // loss-specific closed forms (with interval quadrature for hinge)
    Quadrature,  // generic denoising-function integrals, valid for any shipped loss
};

struct SolverConfig {
    FixedPointConfig fp{};
    HatMethod method = HatMethod::Analytic;
};

// The loss-dependent expectations with the kernel coefficients stripped:
//   m_hat = mu1 a_m,  q_hat = mu1^2 a_q,  V_hat = mu1^2 a_v.
// Each already carries the factor alpha.
struct ChannelIntegrals {
    double a_m = 0.0;
    double a_q = 0.0;
    double a_v = 0.0;
};

double clamp_eta(double m, double q);

ChannelIntegrals channel_integrals(Loss loss, double alpha, double eps, double m, double q, double V,
                                   HatMethod method = HatMethod::Analytic);

struct StateSolution {
    OrderParams op;
    double e_gen = 0.5;
    double e_mem = 0.5;
    long iterations = 0;
    bool converged = false;
    double residual = 0.0;
    std::string status = "ok";
};

// Kernel-limit state equations at lambda > 0. The iteration runs in the reduced
// variables l = lambda / mu1^2 and s = mu_star^2 / mu1^2, so (m, q, V) depend on the
// geometry only through its angle.
StateSolution solve_kernel_state_eqs(const ErmSpec& spec, const SolverConfig& cfg = {},
                                     const OrderParams* warm_start = nullptr);

// Relative residual of the six equations at op (conjugates and overlaps re-evaluated).
double state_residual(const ErmSpec& spec, const OrderParams& op, HatMethod method = HatMethod::Analytic);

// Integrals of the hinge equations in the lambda -> 0+ interpolating regime, where
// the first proximal branch is absent. Conjugates are alpha I / V, alpha I_q / V^2,
// alpha I_v / V in the rescaled variables.
struct HingeRidgelessIntegrals {
    double i_m = 0.0;
    double i_q = 0.0;
    double i_v = 0.0;
};
HingeRidgelessIntegrals hinge_ridgeless_integrals(double eps, double q, double eta);

// Rescaled ridgeless hinge system (lambda V, lambda^-1 conjugates finite). Valid for
// mu_star > 0 at any alpha, and for mu_star = 0 below the interpolation threshold.
StateSolution solve_hinge_ridgeless(double alpha, double eps, double mu1, double mu_star,
                                    const SolverConfig& cfg = {});

// State equations at lambda = 0 exactly, for mu_star = 0 (the linear model above
// its interpolation threshold keeps all order parameters finite).
StateSolution solve_perceptron_lambda_zero(Loss loss, double alpha, double eps,
                                           const SolverConfig& cfg = {});

}  // namespace raf
