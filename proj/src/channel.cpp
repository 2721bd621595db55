#include "raf/channel.hpp"

#include "raf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace raf {

namespace {

void check_label(int y) {
    if (y != 1 && y != -1) throw std::invalid_argument("label must be +1 or -1");
}

void check_tau(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("channel variance tau must be positive");
}

void check_V(double V) {
    if (!(V > 0.0)) throw std::invalid_argument("V must be positive");
}

}  // namespace

std::string loss_name(Loss loss) { return loss == Loss::Square ? "square" : "hinge"; }

Loss parse_loss(const std::string& name) {
    if (name == "square") return Loss::Square;
    if (name == "hinge") return Loss::Hinge;
    throw std::invalid_argument("unknown loss '" + name + "'");
}

double z_out_star(int y, double omega, double tau, double eps) {
    check_label(y);
    check_tau(tau);
    return 0.5 + 0.5 * y * (1.0 - eps) * std::erf(omega / std::sqrt(2.0 * tau));
}

double f_out_star(int y, double omega, double tau, double eps) {
    check_label(y);
    check_tau(tau);
    if (eps >= 1.0) return 0.0;
    const double x = y * omega / std::sqrt(2.0 * tau);
    const double c = 2.0 * (1.0 - eps) / std::sqrt(2.0 * std::numbers::pi * tau);
    if (x >= 0.0) return y * c * std::exp(-x * x) / (eps + (1.0 - eps) * std::erfc(-x));
    // erfc(|x|) underflows long before the Gaussian factor does not
    const double flip = eps > 0.0 ? eps * std::exp(x * x) : 0.0;
    return y * c / (flip + (1.0 - eps) * erfcx(-x));
}

double prox(Loss loss, int y, double omega, double V) {
    check_label(y);
    check_V(V);
    if (loss == Loss::Square) return (omega + V * y) / (1.0 + V);
    const double yw = y * omega;
    if (yw < 1.0 - V) return omega + V * y;
    if (yw <= 1.0) return static_cast<double>(y);
    return omega;
}

double f_out(Loss loss, int y, double omega, double V) {
    check_label(y);
    check_V(V);
    if (loss == Loss::Square) return (y - omega) / (1.0 + V);
    const double yw = y * omega;
    if (yw < 1.0 - V) return static_cast<double>(y);
    if (yw <= 1.0) return (y - omega) / V;
    return 0.0;
}

double d_f_out_d_omega(Loss loss, int y, double omega, double V) {
    check_label(y);
    check_V(V);
    if (loss == Loss::Square) return -1.0 / (1.0 + V);
    const double yw = y * omega;
    if (yw < 1.0 - V || yw > 1.0) return 0.0;
    return -1.0 / V;
}

std::vector<double> kink_points(Loss loss, double V) {
    if (loss == Loss::Square) return {};
    return {1.0 - V, 1.0, -(1.0 - V), -1.0};
}

double gen_error(double m, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("gen_error: q must be positive");
    const double c = std::clamp(m / std::sqrt(q), -1.0, 1.0);
    return std::acos(c) / std::numbers::pi;
}

double mem_error(double q, double V) {
    if (!(q > 0.0)) throw std::invalid_argument("mem_error: q must be positive");
    if (V < 0.0) throw std::invalid_argument("mem_error: V must be >= 0");
    return 0.5 * std::erfc(V / std::sqrt(2.0 * q));
}

double mem_error_generic(Loss loss, double q, double V) {
    if (!(q > 0.0)) throw std::invalid_argument("mem_error_generic: q must be positive");
    check_V(V);
    const double sq = std::sqrt(q);
    // The proximal map is nondecreasing in omega, so each indicator switches once.
    auto crossing = [&](int y) {
        auto g = [&](double xi) { return prox(loss, y, sq * xi, V); };
        const double lo = -40.0;
        const double hi = 40.0;
        if (g(lo) >= 0.0) return lo;
        if (g(hi) < 0.0) return hi;
        return bisect_root(g, lo, hi, 1e-15);
    };
    std::vector<double> bp{crossing(1), crossing(-1)};
    for (double k : kink_points(loss, V)) bp.push_back(k / sq);
    auto err = [&](double xi) {
        const double w = sq * xi;
        const double wrong_neg = prox(loss, -1, w, V) >= 0.0 ? 1.0 : 0.0;
        const double wrong_pos = prox(loss, 1, w, V) < 0.0 ? 1.0 : 0.0;
        return 0.5 * (wrong_neg + wrong_pos);
    };
    return normal_expectation_piecewise(err, bp, 1e-14, 40.0);
}

}  // namespace raf
