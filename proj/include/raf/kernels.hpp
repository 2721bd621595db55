#pragma once

#include <functional>
#include <optional>
#include <string>

namespace raf {

struct KernelGeometry {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu_star = 0.0;
};

enum class KernelTag {
    Linear,
    Sign,
    Erf,
    Relu,
    Polynomial,
    Exponential,
    SphericalGaussian,
    Geometric,
    TruncatedQuadratic,
};

// Dot-product kernel K(rho) on normalized inputs.
//   polynomial:          (c + rho)^m        p1 = c,   p2 = m
//   exponential:         exp(beta rho)      p1 = beta
//   spherical-gaussian:  exp(-eta (1-rho))  p1 = eta
//   geometric:           1 / (1 - g rho)    p1 = g
//   truncated-quadratic: mu1^2 rho + mustar^2 rho^2   p1 = mu1, p2 = mustar
struct KernelFamily {
    KernelTag tag = KernelTag::Linear;
    double p1 = 0.0;
    double p2 = 0.0;

    bool operator==(const KernelFamily&) const = default;
};

void validate(const KernelFamily& k);

std::string kernel_name(KernelTag tag);
KernelTag parse_kernel_tag(const std::string& name);
std::string describe(const KernelFamily& k);

double kernel_value(const KernelFamily& k, double rho);
double kernel_derivative_at_zero(const KernelFamily& k);

// Closed-form (mu0, mu1, mu_star) for each family.
KernelGeometry family_geometry(const KernelFamily& k);

// mu0^2 = K(0), mu1^2 = K'(0), mu_star^2 = K(1) - K(0) - K'(0).
// Without an analytic derivative, K'(0) uses a Richardson-extrapolated central difference.
KernelGeometry mu_from_kernel(const std::function<double(double)>& K,
                              std::optional<double> derivative_at_zero = std::nullopt);

// mu0 = E[s(g)], mu1 = E[g s(g)], mu_star^2 = E[s(g)^2] - mu0^2 - mu1^2.
KernelGeometry mu_from_activation(const std::function<double(double)>& sigma);

// gamma = arctan(mu1 / mu_star) in [0, pi/2].
double angle(const KernelGeometry& g);
double angle(double mu1, double mu_star);

// Geometry on the unit circle at angle gamma: mu1 = sin(gamma), mu_star = cos(gamma).
KernelGeometry geometry_at_angle(double gamma);

double optimal_mem_angle(double eps);

// Free family parameter that realizes tan^2(gamma) = mu1^2 / mu_star^2 at the optimal
// memorization angle. For polynomial kernels the degree is held fixed and c is returned.
double match_family_to_angle(KernelTag tag, double eps, int degree = 2);

}  // namespace raf
