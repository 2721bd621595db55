#include "raf/kernels.hpp"

#include "raf/errors.hpp"
#include "raf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace raf {

using std::numbers::pi;

void validate(const KernelFamily& k) {
    switch (k.tag) {
        case KernelTag::Polynomial:
            if (k.p1 < 0.0) throw std::invalid_argument("polynomial kernel: c must be >= 0");
            if (k.p2 < 1.0 || std::floor(k.p2) != k.p2)
                throw std::invalid_argument("polynomial kernel: degree must be a positive integer");
            break;
        case KernelTag::Exponential:
            if (k.p1 < 0.0) throw std::invalid_argument("exponential kernel: beta must be >= 0");
            break;
        case KernelTag::SphericalGaussian:
            if (k.p1 < 0.0) throw std::invalid_argument("spherical-gaussian kernel: eta must be >= 0");
            break;
        case KernelTag::Geometric:
            if (k.p1 < 0.0 || k.p1 >= 1.0)
                throw std::invalid_argument("geometric kernel: g must lie in [0,1)");
            break;
        case KernelTag::TruncatedQuadratic:
            if (k.p1 < 0.0 || k.p2 < 0.0)
                throw std::invalid_argument("truncated-quadratic kernel: coefficients must be >= 0");
            break;
        default:
            break;
    }
}

std::string kernel_name(KernelTag tag) {
    switch (tag) {
        case KernelTag::Linear: return "linear";
        case KernelTag::Sign: return "sign";
        case KernelTag::Erf: return "erf";
        case KernelTag::Relu: return "relu";
        case KernelTag::Polynomial: return "polynomial";
        case KernelTag::Exponential: return "exponential";
        case KernelTag::SphericalGaussian: return "gaussian";
        case KernelTag::Geometric: return "geometric";
        case KernelTag::TruncatedQuadratic: return "truncated-quadratic";
    }
    return "unknown";
}

KernelTag parse_kernel_tag(const std::string& name) {
    if (name == "linear" || name == "perceptron") return KernelTag::Linear;
    if (name == "sign" || name == "sign-arcsine") return KernelTag::Sign;
    if (name == "erf" || name == "erf-arcsine") return KernelTag::Erf;
    if (name == "relu" || name == "relu-arccos") return KernelTag::Relu;
    if (name == "polynomial") return KernelTag::Polynomial;
    if (name == "exponential") return KernelTag::Exponential;
    if (name == "gaussian" || name == "spherical-gaussian") return KernelTag::SphericalGaussian;
    if (name == "geometric") return KernelTag::Geometric;
    if (name == "truncated-quadratic") return KernelTag::TruncatedQuadratic;
    throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::string describe(const KernelFamily& k) {
    std::ostringstream os;
    os << kernel_name(k.tag);
    switch (k.tag) {
        case KernelTag::Polynomial: os << "(c=" << k.p1 << ",m=" << k.p2 << ")"; break;
        case KernelTag::Exponential: os << "(beta=" << k.p1 << ")"; break;
        case KernelTag::SphericalGaussian: os << "(eta=" << k.p1 << ")"; break;
        case KernelTag::Geometric: os << "(g=" << k.p1 << ")"; break;
        case KernelTag::TruncatedQuadratic: os << "(mu1=" << k.p1 << ",mustar=" << k.p2 << ")"; break;
        default: break;
    }
    return os.str();
}

double kernel_value(const KernelFamily& k, double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    switch (k.tag) {
        case KernelTag::Linear: return rho;
        case KernelTag::Sign: return 2.0 / pi * std::asin(rho);
        case KernelTag::Erf: return 2.0 / pi * std::asin(2.0 * rho / 3.0);
        case KernelTag::Relu:
            return (std::sqrt(std::max(0.0, 1.0 - rho * rho)) + (pi - std::acos(rho)) * rho) / (2.0 * pi);
        case KernelTag::Polynomial: return std::pow(k.p1 + rho, k.p2);
        case KernelTag::Exponential: return std::exp(k.p1 * rho);
        case KernelTag::SphericalGaussian: return std::exp(-k.p1 * (1.0 - rho));
        case KernelTag::Geometric: return 1.0 / (1.0 - k.p1 * rho);
        case KernelTag::TruncatedQuadratic: return k.p1 * k.p1 * rho + k.p2 * k.p2 * rho * rho;
    }
    return 0.0;
}

double kernel_derivative_at_zero(const KernelFamily& k) {
    switch (k.tag) {
        case KernelTag::Linear: return 1.0;
        case KernelTag::Sign: return 2.0 / pi;
        case KernelTag::Erf: return 4.0 / (3.0 * pi);
        case KernelTag::Relu: return 0.25;
        case KernelTag::Polynomial: return k.p2 * std::pow(k.p1, k.p2 - 1.0);
        case KernelTag::Exponential: return k.p1;
        case KernelTag::SphericalGaussian: return k.p1 * std::exp(-k.p1);
        case KernelTag::Geometric: return k.p1;
        case KernelTag::TruncatedQuadratic: return k.p1 * k.p1;
    }
    return 0.0;
}

KernelGeometry family_geometry(const KernelFamily& k) {
    validate(k);
    switch (k.tag) {
        case KernelTag::Linear: return {0.0, 1.0, 0.0};
        case KernelTag::Sign: return {0.0, std::sqrt(2.0 / pi), std::sqrt(1.0 - 2.0 / pi)};
        case KernelTag::Erf:
            return {0.0, 2.0 / std::sqrt(3.0 * pi),
                    std::sqrt(2.0 / pi * std::asin(2.0 / 3.0) - 4.0 / (3.0 * pi))};
        case KernelTag::Relu:
            return {1.0 / std::sqrt(2.0 * pi), 0.5, std::sqrt(0.5 * (0.5 - 1.0 / pi))};
        case KernelTag::Polynomial: {
            const double c = k.p1;
            const double m = k.p2;
            const double cm1 = m == 1.0 ? 1.0 : std::pow(c, m - 1.0);
            const double star2 = std::pow(c + 1.0, m) - std::pow(c, m) - m * cm1;
            return {std::pow(c, m / 2.0), std::sqrt(m * cm1), std::sqrt(std::max(0.0, star2))};
        }
        case KernelTag::Exponential: {
            const double b = k.p1;
            return {1.0, std::sqrt(b), std::sqrt(std::max(0.0, std::expm1(b) - b))};
        }
        case KernelTag::SphericalGaussian: {
            const double e = k.p1;
            return {std::exp(-e / 2.0), std::sqrt(e * std::exp(-e)),
                    std::sqrt(std::max(0.0, 1.0 - std::exp(-e) * (1.0 + e)))};
        }
        case KernelTag::Geometric: {
            const double g = k.p1;
            return {1.0, std::sqrt(g), g / std::sqrt(1.0 - g)};
        }
        case KernelTag::TruncatedQuadratic: return {0.0, k.p1, k.p2};
    }
    return {};
}

KernelGeometry mu_from_kernel(const std::function<double(double)>& K,
                              std::optional<double> derivative_at_zero) {
    double d0 = 0.0;
    if (derivative_at_zero) {
        d0 = *derivative_at_zero;
    } else {
        const double h = 1e-5;
        const double dh = (K(h) - K(-h)) / (2.0 * h);
        const double dh2 = (K(h / 2) - K(-h / 2)) / h;
        d0 = (4.0 * dh2 - dh) / 3.0;
    }
    const double k0 = K(0.0);
    const double star2 = K(1.0) - k0 - d0;
    if (star2 < -1e-8) throw NotAdmissibleKernel("kernel has K(1) - K(0) - K'(0) < 0");
    if (d0 < -1e-8) throw NotAdmissibleKernel("kernel has K'(0) < 0");
    if (k0 < -1e-8) throw NotAdmissibleKernel("kernel has K(0) < 0");
    return {std::sqrt(std::max(0.0, k0)), std::sqrt(std::max(0.0, d0)),
            std::sqrt(std::max(0.0, star2))};
}

KernelGeometry mu_from_activation(const std::function<double(double)>& sigma) {
    // Common activations have their kinks at the origin.
    const std::vector<double> bp{0.0};
    const double m0 = normal_expectation_piecewise(sigma, bp, 1e-13);
    const double m1 = normal_expectation_piecewise([&](double g) { return g * sigma(g); }, bp, 1e-13);
    const double m2 =
        normal_expectation_piecewise([&](double g) { const double s = sigma(g); return s * s; }, bp, 1e-13);
    const double star2 = m2 - m0 * m0 - m1 * m1;
    if (star2 < -1e-8) throw NumericError("mu_from_activation: negative mu_star^2");
    return {std::abs(m0), std::abs(m1), std::sqrt(std::max(0.0, star2))};
}

double angle(double mu1, double mu_star) {
    if (mu1 < 0.0 || mu_star < 0.0) throw std::invalid_argument("angle: coefficients must be >= 0");
    if (mu1 == 0.0 && mu_star == 0.0) throw std::invalid_argument("angle: both coefficients vanish");
    return std::atan2(mu1, mu_star);
}

double angle(const KernelGeometry& g) { return angle(g.mu1, g.mu_star); }

KernelGeometry geometry_at_angle(double gamma) {
    if (gamma < 0.0 || gamma > pi / 2 + 1e-15)
        throw std::invalid_argument("geometry_at_angle: gamma must lie in [0, pi/2]");
    if (gamma >= pi / 2) return {0.0, 1.0, 0.0};
    return {0.0, std::sin(gamma), std::cos(gamma)};
}

double optimal_mem_angle(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("optimal_mem_angle: eps must lie in [0,1)");
    const double a = pi / (2.0 * (1.0 - eps) * (1.0 - eps)) - 1.0;
    return std::atan(1.0 / std::sqrt(a));
}

double match_family_to_angle(KernelTag tag, double eps, int degree) {
    const double gamma = optimal_mem_angle(eps);
    const double target = std::pow(std::tan(gamma), 2);  // mu1^2 / mu_star^2
    auto ratio_root = [&](std::function<double(double)> ratio, double lo, double hi) {
        auto f = [&](double p) { return ratio(p) - target; };
        try {
            return bisect_root(f, lo, hi, 1e-14);
        } catch (const BracketError&) {
            throw NoSolution("target angle is not reachable by the " + kernel_name(tag) + " family");
        }
    };
    // beta / (e^beta - 1 - beta); the spherical gaussian has the same ratio in eta.
    auto exp_ratio = [](double b) {
        const double den = std::expm1(b) - b;
        return b / den;
    };
    switch (tag) {
        case KernelTag::Geometric: return std::pow(std::cos(gamma), 2);
        case KernelTag::Exponential:
        case KernelTag::SphericalGaussian: return ratio_root(exp_ratio, 1e-6, 700.0);
        case KernelTag::Polynomial: {
            if (degree < 2) throw NoSolution("degree-1 polynomial kernels have mu_star = 0");
            auto ratio = [degree](double c) {
                const KernelGeometry g = family_geometry({KernelTag::Polynomial, c, static_cast<double>(degree)});
                return g.mu1 * g.mu1 / (g.mu_star * g.mu_star);
            };
            return ratio_root(ratio, 1e-12, 1e6);
        }
        default:
            throw NoSolution("kernel family " + kernel_name(tag) + " has no free parameter");
    }
}

}  // namespace raf
