#include "raf/closed_forms.hpp"

#include "raf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace raf {

using std::numbers::pi;

namespace {

double teacher_slope(double eps) { return (1.0 - eps) * std::sqrt(2.0 / pi); }

// Positive root of x^2 + b x - c = 0 (c > 0) without cancellation.
double positive_root(double b, double c) {
    const double disc = std::sqrt(b * b + 4.0 * c);
    if (b > 0.0) return 2.0 * c / (b + disc);
    return 0.5 * (disc - b);
}

// m and q of the square loss once P = alpha + l (1 + V) is known.
void square_overlaps(double alpha, double eps, double P, double& m, double& q) {
    const double a = teacher_slope(eps);
    m = alpha * a / P;
    q = alpha * (1.0 + alpha * a * a * (P - 2.0) / P) / (P * P - alpha);
}

void check_eps_below_one(double eps, const char* who) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument(std::string(who) + ": eps must lie in [0,1)");
}

}  // namespace

OrderParams krr_closed_solution(const ErmSpec& spec) {
    validate(spec);
    OrderParams op;
    if (spec.mu1 == 0.0) {
        op.V = spec.mu_star * spec.mu_star / spec.lambda;
        return op;
    }
    const double mu1sq = spec.mu1 * spec.mu1;
    const double ell = spec.lambda / mu1sq;
    const double s = spec.mu_star * spec.mu_star / mu1sq;
    const double alpha = spec.alpha;
    // l^2 V^2 + l (l + alpha - s - 1) V - (l + s l + s alpha) = 0, solved for U = l V
    const double U = positive_root(ell + alpha - s - 1.0, ell + s * ell + s * alpha);
    op.V = U / ell;
    const double P = alpha + ell + U;
    square_overlaps(alpha, spec.eps, P, op.m, op.q);
    const double a = teacher_slope(spec.eps);
    const double d = 1.0 + op.V;
    op.m_hat = spec.mu1 * alpha * a / d;
    op.q_hat = mu1sq * alpha * (1.0 + op.q - 2.0 * a * op.m) / (d * d);
    op.V_hat = mu1sq * alpha / d;
    return op;
}

LambdaOpt krr_lambda_opt(double eps, double mu1, double mu_star) {
    check_eps_below_one(eps, "krr_lambda_opt");
    const double val = mu1 * mu1 * (pi / (2.0 * (1.0 - eps) * (1.0 - eps)) - 1.0) - mu_star * mu_star;
    if (val <= 0.0) return {0.0, true};
    return {val, false};
}

OrderParams ridgeless_kernel_square_params(double alpha, double eps, double mu1, double mu_star) {
    if (!(mu_star > 0.0)) throw std::invalid_argument("ridgeless_kernel_square: needs mu_star > 0");
    if (!(mu1 > 0.0)) throw std::invalid_argument("ridgeless_kernel_square: needs mu1 > 0");
    const double s = mu_star * mu_star / (mu1 * mu1);
    const double V0 = positive_root(alpha - 1.0 - s, s * alpha);
    OrderParams op;
    square_overlaps(alpha, eps, alpha + V0, op.m, op.q);
    op.V = mu1 * mu1 * V0;  // lim lambda V
    return op;
}

ErrorPair ridgeless_kernel_square(double alpha, double eps, double mu1, double mu_star) {
    const OrderParams op = ridgeless_kernel_square_params(alpha, eps, mu1, mu_star);
    return {gen_error(op.m, op.q), 0.0};
}

ErrorPair ridgeless_perceptron_square(double alpha, double eps) {
    if (!(alpha > 0.0)) throw std::invalid_argument("ridgeless_perceptron_square: alpha must be positive");
    if (alpha == 1.0) throw SingularPoint("ridgeless_perceptron_square: alpha = 1 is the interpolation cusp");
    const double c = (1.0 - eps) * (1.0 - eps);
    if (alpha < 1.0) {
        const double r = (1.0 - eps) * std::sqrt(2.0 * alpha * (1.0 - alpha) / (pi - 2.0 * alpha * c));
        return {std::acos(std::min(1.0, r)) / pi, 0.0};
    }
    const double r = (1.0 - eps) * std::sqrt(2.0 * (alpha - 1.0) / (pi + 2.0 * (alpha - 2.0) * c));
    const double z = std::sqrt(pi / (2.0 * (alpha - 1.0) * (pi + 2.0 * c * (alpha - 2.0))));
    return {std::acos(std::min(1.0, r)) / pi, 0.5 * std::erfc(z)};
}

StateSolution ridgeless_solution(Loss loss, double alpha, double eps, double mu1, double mu_star,
                                 const SolverConfig& cfg) {
    validate(ErmSpec{loss, alpha, eps, mu1, mu_star, 1.0});
    StateSolution sol;
    sol.converged = true;
    if (mu1 == 0.0) {
        sol.e_gen = 0.5;
        sol.e_mem = 0.0;
        sol.status = "degenerate";
        return sol;
    }
    if (loss == Loss::Square) {
        if (mu_star > 0.0) {
            sol.op = ridgeless_kernel_square_params(alpha, eps, mu1, mu_star);
            sol.e_gen = gen_error(sol.op.m, sol.op.q);
            sol.e_mem = 0.0;
            return sol;
        }
        const ErrorPair e = ridgeless_perceptron_square(alpha, eps);
        const double a = teacher_slope(eps);
        if (alpha < 1.0) {
            sol.op.m = alpha * a;
            sol.op.q = alpha * (1.0 - alpha * a * a) / (1.0 - alpha);
        } else {
            sol.op.m = a;
            sol.op.q = (1.0 + a * a * (alpha - 2.0)) / (alpha - 1.0);
            sol.op.V = 1.0 / (alpha - 1.0);
        }
        sol.e_gen = e.e_gen;
        sol.e_mem = e.e_mem;
        return sol;
    }
    if (mu_star > 0.0 || alpha < hinge_interp_threshold(eps)) return solve_hinge_ridgeless(alpha, eps, mu1, mu_star, cfg);
    return solve_perceptron_lambda_zero(Loss::Hinge, alpha, eps, cfg);
}

double hinge_interp_threshold(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("hinge_interp_threshold: eps must lie in [0,1]");
    if (eps == 0.0) return std::numeric_limits<double>::infinity();
    const double c = (1.0 - eps) / pi;
    auto f = [c](double a) { return a * (0.5 - c * std::atan(a * c)) - 1.0; };
    // first sign change going up from alpha = 1 (f(1) < 0 for every eps)
    double lo = 1.0;
    double hi = 1.0;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 1.25;
        if (hi > 1e12) throw NoSolution("hinge_interp_threshold: no root found");
    }
    return bisect_root(f, lo, hi, 1e-15 * hi);
}

ErrorPair infinite_lambda_errors(double alpha, double eps, double mu1, double mu_star) {
    if (!(alpha > 0.0)) throw std::invalid_argument("infinite_lambda_errors: alpha must be positive");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("infinite_lambda_errors: eps must lie in [0,1]");
    if (mu1 < 0.0 || mu_star < 0.0 || (mu1 == 0.0 && mu_star == 0.0))
        throw std::invalid_argument("infinite_lambda_errors: invalid geometry");
    const double a = teacher_slope(eps);
    ErrorPair e;
    e.e_gen = mu1 == 0.0 ? 0.5 : std::acos(a * std::sqrt(alpha) / std::sqrt(1.0 + a * a * alpha)) / pi;
    if (mu1 == 0.0) {
        e.e_mem = 0.0;
    } else {
        const double ratio = 1.0 + mu_star * mu_star / (mu1 * mu1);
        e.e_mem = 0.5 * std::erfc(ratio / std::sqrt(2.0 * (alpha * a) * (alpha * a) + 2.0 * alpha));
    }
    return e;
}

double krr_large_alpha_coeff(double eps) {
    check_eps_below_one(eps, "krr_large_alpha_coeff");
    const double a = teacher_slope(eps);
    return std::sqrt(1.0 - a * a) / (pi * a);
}

}  // namespace raf
