#include "raf/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace raf {

namespace {

constexpr double kQMax = 1.0 - 1e-12;

// exp(-q t^2 / 2) / (1 + (1-eps) erf(sqrt(q/2) t)), arranged so that neither the
// numerator nor the denominator underflows for large negative t.
double bo_integrand(double t, double q, double eps) {
    const double x = std::sqrt(q / 2.0) * t;
    if (x >= 0.0) return std::exp(-x * x) / (1.0 + (1.0 - eps) * std::erf(x));
    const double facts = eps > 0.0 ? eps * std::exp(x * x) : 0.0;
    return 1.0 / (facts + (1.0 - eps) * erfcx(-x));
}

}  // namespace

double bo_q_hat(double q_b, double alpha, double eps, int quad_order) {
    if (eps >= 1.0) return 0.0;
    const double q = std::clamp(q_b, 0.0, kQMax);
    const Quadrature& gh = gauss_hermite_cached(quad_order);
    const double mean = gaussian_expectation([&](double t) { return bo_integrand(t, q, eps); }, gh);
    return 2.0 * alpha * (1.0 - eps) * (1.0 - eps) * mean / (std::numbers::pi * std::sqrt(1.0 - q));
}

BoSolution solve_bo(double alpha, double eps, const BoConfig& cfg) {
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_bo: alpha must be positive");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_bo: eps must lie in [0,1]");
    auto map = [&](const std::vector<double>& x) {
        const double qh = bo_q_hat(x[0], alpha, eps, cfg.quad_order);
        return std::vector<double>{std::clamp(qh / (1.0 + qh), 0.0, kQMax)};
    };
    const FixedPointResult fp = damped_fixed_point(map, {std::clamp(cfg.init_q, 0.0, kQMax)}, cfg.fp);
    BoSolution s;
    s.q_b = fp.x[0];
    s.q_hat_b = bo_q_hat(s.q_b, alpha, eps, cfg.quad_order);
    s.iterations = fp.iterations;
    s.converged = fp.converged;
    s.residual = fp.residual;
    return s;
}

double bo_gen_error(double q_b) {
    if (!(q_b >= 0.0 && q_b <= 1.0)) throw std::invalid_argument("bo_gen_error: q_b must lie in [0,1]");
    // arccos(sqrt q) = atan2(sqrt(1-q), sqrt q) keeps precision as q -> 1
    return std::atan2(std::sqrt(1.0 - q_b), std::sqrt(q_b)) / std::numbers::pi;
}

double bo_J(double eps, int quad_order) {
    const Quadrature& gh = gauss_hermite_cached(quad_order);
    return std::sqrt(2.0 * std::numbers::pi) *
           gaussian_expectation([&](double t) { return bo_integrand(t, 1.0, eps); }, gh);
}

double bo_rate_constant(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("bo_rate_constant: eps must lie in [0,1)");
    return std::sqrt(2.0 * std::numbers::pi) / (2.0 * (1.0 - eps) * (1.0 - eps) * bo_J(eps));
}

}  // namespace raf
