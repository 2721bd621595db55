#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "raf/errors.hpp"

namespace raf {

// Nodes and weights for expectations under N(0,1), or for plain integrals on [-1,1]
// in the Legendre case.
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
};

// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E[f(xi)], xi ~ N(0,1).
Quadrature gauss_hermite(int order);

// Cached rule, built once per order.
const Quadrature& gauss_hermite_cached(int order);

// Gauss-Legendre rule on [-1, 1].
Quadrature gauss_legendre(int order);
const Quadrature& gauss_legendre_cached(int order);

double gaussian_expectation(const std::function<double(double)>& f, const Quadrature& rule);

// Fixed-order Gauss-Legendre on [a, b] split into `panels` equal pieces.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels = 1, int order = 32);

// Recursive bisection of Gauss-Legendre panels until two levels agree to tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-13, int max_depth = 30);

// E[f(xi)] for xi ~ N(0,1) when f is only piecewise smooth. The breakpoints split
// the real line; each piece is integrated against the normal density with adaptive
// panels. Pieces beyond |xi| > cutoff are dropped.
double normal_expectation_piecewise(const std::function<double(double)>& f,
                                    std::vector<double> breakpoints, double tol = 1e-12,
                                    double cutoff = 12.0);

double normal_pdf(double x);
double normal_cdf(double x);

// exp(x^2) erfc(x), accurate for large positive x.
double erfcx(double x);

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol = 1e-12, int max_iter = 400);

struct FixedPointConfig {
    double damping = 0.5;
    double tol = 1e-10;
    long max_iter = 100000;
};

void validate(const FixedPointConfig& cfg);

struct FixedPointResult {
    std::vector<double> x;
    long iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

// x <- (1-d) x + d map(x). Stops when max_i |map(x)_i - x_i| / max(1, |x_i|) <= tol.
FixedPointResult damped_fixed_point(
    const std::function<std::vector<double>(const std::vector<double>&)>& map,
    std::vector<double> init, const FixedPointConfig& cfg);

struct MinResult {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
};

MinResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-6, int max_iter = 200);

// Scan a grid, then golden-section refine around the best grid point.
MinResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                           int scan_points, double tol = 1e-6);

std::vector<double> linspace(double lo, double hi, std::size_t count);
std::vector<double> logspace(double lo, double hi, std::size_t count);

}  // namespace raf
