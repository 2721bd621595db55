#include "raf/state_eqs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace raf {

using std::numbers::pi;

namespace {

constexpr double kEtaMax = 1.0 - 1e-12;
const double kSqrt2 = std::numbers::sqrt2;

// Phi(b) - Phi(a) without cancellation in the upper tail.
double normal_mass(double a, double b) {
    if (a > 0.0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
    return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
}

// Integral of phi(x) erf(k x) w(x) over [a, b], split at the erf transition.
template <class W>
double phi_erf_integral(double k, double a, double b, W weight) {
    // the normal density is negligible beyond the cutoff
    constexpr double cut = 14.0;
    const double sign = a <= b ? 1.0 : -1.0;
    if (a > b) std::swap(a, b);
    a = std::clamp(a, -cut, cut);
    b = std::clamp(b, -cut, cut);
    if (a == b) return 0.0;
    auto f = [&](double x) { return normal_pdf(x) * std::erf(k * x) * weight(x); };
    const double tol = 1e-14;
    if (a < 0.0 && b > 0.0)
        return sign * (integrate_adaptive(f, a, 0.0, tol) + integrate_adaptive(f, 0.0, b, tol));
    return sign * integrate_adaptive(f, a, b, tol);
}

ChannelIntegrals square_integrals(double alpha, double eps, double m, double q, double V) {
    const double a = (1.0 - eps) * std::sqrt(2.0 / pi);
    const double d = 1.0 + V;
    return {alpha * a / d, alpha * (1.0 + q - 2.0 * a * m) / (d * d), alpha / d};
}

ChannelIntegrals hinge_integrals(double alpha, double eps, double m, double q, double V) {
    const double eta = clamp_eta(m, q);
    const double sq = std::sqrt(q);
    const double k = std::sqrt(eta / (2.0 * (1.0 - eta)));
    const double lo = (1.0 - V) / sq;
    const double hi = 1.0 / sq;

    // teacher-overlap conjugate: Gaussian of variance q (1 - eta) against the hinge branches
    const double s2 = q * (1.0 - eta);
    const double s = std::sqrt(s2);
    const double e_hi = std::erf(1.0 / (kSqrt2 * s));
    const double e_lo = std::erf((1.0 - V) / (kSqrt2 * s));
    const double g_hi = std::exp(-1.0 / (2.0 * s2));
    const double g_lo = std::exp(-(1.0 - V) * (1.0 - V) / (2.0 * s2));
    const double bracket_m =
        1.0 + (e_hi - (1.0 - V) * e_lo) / V + std::sqrt(2.0 * s2 / pi) * (g_hi - g_lo) / V;
    const double a_m = alpha * (1.0 - eps) / std::sqrt(2.0 * pi) * bracket_m;

    const double mass = normal_mass(lo, hi);  // = (erf(hi/sqrt2) - erf(lo/sqrt2)) / 2
    const double below = normal_cdf(lo);      // = (1 + erf(lo/sqrt2)) / 2
    const double sym_q = alpha * below +
                         alpha / (V * V) *
                             ((1.0 + q) * mass + sq * (normal_pdf(hi) - (1.0 + V) * normal_pdf(lo)));
    const double sq_weight_int =
        phi_erf_integral(k, lo, hi, [sq](double x) { const double r = 1.0 - sq * x; return r * r; });
    const double left = -std::atan(std::sqrt(eta / (1.0 - eta))) / pi +
                        phi_erf_integral(k, 0.0, lo, [](double) { return 1.0; });
    const double a_q = sym_q + alpha * (1.0 - eps) * (left + sq_weight_int / (V * V));

    const double mid = phi_erf_integral(k, lo, hi, [](double) { return 1.0; });
    const double a_v = alpha / V * (mass + (1.0 - eps) * mid);
    return {a_m, a_q, a_v};
}

ChannelIntegrals quadrature_integrals(Loss loss, double alpha, double eps, double m, double q, double V) {
    const double eta = clamp_eta(m, q);
    const double sq = std::sqrt(q);
    const double k = std::sqrt(eta / (2.0 * (1.0 - eta)));
    const std::vector<double> kinks = kink_points(loss, V);

    const double c = sq * std::sqrt(1.0 - eta);
    std::vector<double> bp_m;
    for (double w : kinks) bp_m.push_back(w / c);
    const double em = normal_expectation_piecewise(
        [&](double s) { return f_out(loss, 1, c * s, V) - f_out(loss, -1, c * s, V); }, bp_m);
    const double a_m = alpha * (1.0 - eps) / std::sqrt(2.0 * pi) * em;

    std::vector<double> bp{0.0};
    for (double w : kinks) bp.push_back(w / sq);
    const double eq = normal_expectation_piecewise(
        [&](double x) {
            const double fp = f_out(loss, 1, sq * x, V);
            const double fm = f_out(loss, -1, sq * x, V);
            return 0.5 * (fp * fp + fm * fm) + 0.5 * (1.0 - eps) * std::erf(k * x) * (fp * fp - fm * fm);
        },
        bp);
    const double ev = normal_expectation_piecewise(
        [&](double x) {
            const double dp = d_f_out_d_omega(loss, 1, sq * x, V);
            const double dm = d_f_out_d_omega(loss, -1, sq * x, V);
            return 0.5 * (dp + dm) + 0.5 * (1.0 - eps) * std::erf(k * x) * (dp - dm);
        },
        bp);
    return {a_m, alpha * eq, -alpha * ev};
}

struct ReducedResult {
    double m = 0.0;
    double q = 0.0;
    double V = 0.0;
    ChannelIntegrals ci;
    FixedPointResult fp;
};

// Overlaps from the channel integrals in reduced units.
std::vector<double> reduced_update(const ChannelIntegrals& ci, double ell, double s) {
    const double d = ell + ci.a_v;
    const double V = 1.0 / d + (ell > 0.0 ? s / ell : 0.0);
    return {ci.a_m / d, (ci.a_m * ci.a_m + ci.a_q) / (d * d), V};
}

ReducedResult solve_reduced(Loss loss, double alpha, double eps, double ell, double s,
                            const SolverConfig& cfg, std::vector<double> init) {
    auto map = [&](const std::vector<double>& x) {
        const ChannelIntegrals ci = channel_integrals(loss, alpha, eps, x[0], x[1], x[2], cfg.method);
        return reduced_update(ci, ell, s);
    };
    ReducedResult r;
    r.fp = damped_fixed_point(map, std::move(init), cfg.fp);
    r.m = r.fp.x[0];
    r.q = r.fp.x[1];
    r.V = r.fp.x[2];
    r.ci = channel_integrals(loss, alpha, eps, r.m, r.q, r.V, cfg.method);
    return r;
}

std::vector<double> default_init(double eps) { return {0.1 * (1.0 - eps), 0.5, 1.0}; }

StateSolution finish(const ReducedResult& r, double mu1, bool interpolating) {
    StateSolution sol;
    sol.op.m = r.m;
    sol.op.q = r.q;
    sol.op.V = r.V;
    sol.op.m_hat = mu1 * r.ci.a_m;
    sol.op.q_hat = mu1 * mu1 * r.ci.a_q;
    sol.op.V_hat = mu1 * mu1 * r.ci.a_v;
    sol.iterations = r.fp.iterations;
    sol.converged = r.fp.converged;
    sol.residual = r.fp.residual;
    sol.status = r.fp.converged ? "ok" : "not-converged";
    if (r.q > 0.0 && std::isfinite(r.q)) {
        sol.e_gen = gen_error(r.m, r.q);
        sol.e_mem = interpolating ? 0.0 : mem_error(r.q, r.V);
    } else {
        sol.status = "invalid-fixed-point";
        sol.converged = false;
    }
    return sol;
}

}  // namespace

void validate(const ErmSpec& spec, bool allow_zero_lambda) {
    if (!(spec.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(spec.eps >= 0.0 && spec.eps <= 1.0)) throw std::invalid_argument("eps must lie in [0,1]");
    if (spec.mu1 < 0.0 || spec.mu_star < 0.0) throw std::invalid_argument("mu1 and mustar must be >= 0");
    if (spec.mu1 == 0.0 && spec.mu_star == 0.0) throw std::invalid_argument("mu1 and mustar both vanish");
    if (allow_zero_lambda ? spec.lambda < 0.0 : !(spec.lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
}

double clamp_eta(double m, double q) {
    if (!(q > 0.0)) return 0.0;
    return std::clamp(m * m / q, 0.0, kEtaMax);
}

ChannelIntegrals channel_integrals(Loss loss, double alpha, double eps, double m, double q, double V,
                                   HatMethod method) {
    if (method == HatMethod::Quadrature) return quadrature_integrals(loss, alpha, eps, m, q, V);
    if (loss == Loss::Square) return square_integrals(alpha, eps, m, q, V);
    return hinge_integrals(alpha, eps, m, q, V);
}

StateSolution solve_kernel_state_eqs(const ErmSpec& spec, const SolverConfig& cfg,
                                     const OrderParams* warm_start) {
    validate(spec);
    if (spec.mu1 == 0.0) {
        // No linear component: the rule is invisible, training labels are still fit
        // through the mu_star part.
        StateSolution sol;
        sol.op.V = spec.mu_star * spec.mu_star / spec.lambda;
        sol.e_gen = 0.5;
        sol.e_mem = 0.0;
        sol.converged = true;
        sol.status = "degenerate";
        return sol;
    }
    const double ell = spec.lambda / (spec.mu1 * spec.mu1);
    const double s = (spec.mu_star * spec.mu_star) / (spec.mu1 * spec.mu1);
    std::vector<double> init = default_init(spec.eps);
    if (warm_start && warm_start->q > 0.0 && warm_start->V > 0.0)
        init = {warm_start->m, warm_start->q, warm_start->V};
    const ReducedResult r = solve_reduced(spec.loss, spec.alpha, spec.eps, ell, s, cfg, init);
    return finish(r, spec.mu1, false);
}

double state_residual(const ErmSpec& spec, const OrderParams& op, HatMethod method) {
    validate(spec);
    const ChannelIntegrals ci = channel_integrals(spec.loss, spec.alpha, spec.eps, op.m, op.q, op.V, method);
    const double mu1 = spec.mu1;
    const double lam = spec.lambda;
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(x)); };
    double r = 0.0;
    r = std::max(r, rel(op.m_hat, mu1 * ci.a_m));
    r = std::max(r, rel(op.q_hat, mu1 * mu1 * ci.a_q));
    r = std::max(r, rel(op.V_hat, mu1 * mu1 * ci.a_v));
    const double d = lam + op.V_hat;
    r = std::max(r, rel(op.m, mu1 * op.m_hat / d));
    r = std::max(r, rel(op.q, mu1 * mu1 * (op.m_hat * op.m_hat + op.q_hat) / (d * d)));
    r = std::max(r, rel(op.V, mu1 * mu1 / d + spec.mu_star * spec.mu_star / lam));
    return r;
}

HingeRidgelessIntegrals hinge_ridgeless_integrals(double eps, double q, double eta) {
    eta = std::clamp(eta, 0.0, kEtaMax);
    const double sq = std::sqrt(q);
    const double k = std::sqrt(eta / (2.0 * (1.0 - eta)));
    const double s2 = q * (1.0 - eta);
    HingeRidgelessIntegrals I;
    I.i_m = (1.0 - eps) / std::sqrt(2.0 * pi) *
            (1.0 + std::erf(1.0 / std::sqrt(2.0 * s2)) +
             std::sqrt(2.0 * s2 / pi) * std::exp(-1.0 / (2.0 * s2)));
    const double hi = 1.0 / sq;
    const double lo = -14.0;
    const double below = normal_cdf(hi);
    I.i_q = (1.0 + q) * below + sq * normal_pdf(hi) +
            (1.0 - eps) * phi_erf_integral(k, std::min(lo, hi), hi,
                                           [sq](double x) { const double r = 1.0 - sq * x; return r * r; });
    I.i_v = below + (1.0 - eps) * phi_erf_integral(k, std::min(lo, hi), hi, [](double) { return 1.0; });
    return I;
}

StateSolution solve_hinge_ridgeless(double alpha, double eps, double mu1, double mu_star,
                                    const SolverConfig& cfg) {
    validate(ErmSpec{Loss::Hinge, alpha, eps, mu1, mu_star, 1.0});
    if (mu1 == 0.0) {
        StateSolution sol;
        sol.e_gen = 0.5;
        sol.e_mem = 0.0;
        sol.converged = true;
        sol.status = "degenerate";
        return sol;
    }
    const double s = (mu_star * mu_star) / (mu1 * mu1);
    // Unknowns (m, q, W) with W = lambda V / mu1^2.
    auto map = [&](const std::vector<double>& x) {
        const double m = x[0];
        const double q = x[1];
        const double W = x[2];
        const HingeRidgelessIntegrals I = hinge_ridgeless_integrals(eps, q, clamp_eta(m, q));
        const double vh = alpha * I.i_v / W;
        const double d = 1.0 + vh;
        return std::vector<double>{alpha * I.i_m / (W * d),
                                   (alpha * alpha * I.i_m * I.i_m + alpha * I.i_q) / (W * W * d * d),
                                   1.0 / d + s};
    };
    const FixedPointResult fp = damped_fixed_point(map, default_init(eps), cfg.fp);
    StateSolution sol;
    const double m = fp.x[0];
    const double q = fp.x[1];
    const double W = fp.x[2];
    const HingeRidgelessIntegrals I = hinge_ridgeless_integrals(eps, q, clamp_eta(m, q));
    sol.op.m = m;
    sol.op.q = q;
    // lambda-rescaled values: V -> lambda V, conjugates -> conjugates / lambda
    sol.op.V = mu1 * mu1 * W;
    sol.op.m_hat = mu1 * alpha * I.i_m / sol.op.V;
    sol.op.q_hat = mu1 * mu1 * alpha * I.i_q / (sol.op.V * sol.op.V);
    sol.op.V_hat = mu1 * mu1 * alpha * I.i_v / sol.op.V;
    sol.iterations = fp.iterations;
    sol.converged = fp.converged && q > 0.0 && W > 0.0 && std::isfinite(q);
    sol.residual = fp.residual;
    sol.status = sol.converged ? "ok" : "not-converged";
    sol.e_gen = q > 0.0 && std::isfinite(q) ? gen_error(m, q) : 0.5;
    sol.e_mem = 0.0;
    return sol;
}

StateSolution solve_perceptron_lambda_zero(Loss loss, double alpha, double eps, const SolverConfig& cfg) {
    validate(ErmSpec{loss, alpha, eps, 1.0, 0.0, 1.0});
    const ReducedResult r = solve_reduced(loss, alpha, eps, 0.0, 0.0, cfg, default_init(eps));
    return finish(r, 1.0, false);
}

}  // namespace raf
