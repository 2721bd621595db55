#include "raf/random_features.hpp"

#include <cmath>
#include <stdexcept>

namespace raf {

namespace {

struct Overlaps {
    double m_s, q_s, V_s, q_w, V_w;
};

struct Hats {
    double m_s, q_s, V_s, q_w, V_w;
};

Hats hats_from(const ChannelIntegrals& ci, double mu1, double mu_star, double gamma) {
    const double s2 = mu_star * mu_star;
    return {mu1 * ci.a_m, mu1 * mu1 * ci.a_q, mu1 * mu1 * ci.a_v, gamma * s2 * ci.a_q, gamma * s2 * ci.a_v};
}

// The brackets of the overlap equations are rewritten so that none divides by gamma
// or subtracts nearly equal terms; the kernel limit gamma -> 0 stays exact.
Overlaps overlaps_from(const Hats& h, double lambda, double gamma) {
    const double lw = lambda + h.V_w;
    const double z = lw / h.V_s;
    const double A = 1.0 + gamma + z;
    const double D = std::sqrt(A * A - 4.0 * gamma);
    const double ratio = 2.0 / (A + D);  // (z + 1 + gamma - D) / (2 gamma)
    const double B = 2.0 * z * z + 3.0 * (1.0 + gamma) * z + (gamma - 1.0) * (gamma - 1.0);
    const double br_s = 2.0 * ((gamma - 1.0) * (gamma - 1.0) + 2.0 * z * (1.0 + gamma)) / (D * ((A + z) * D + B));
    const double cross = -2.0 * z / (D * (A + D));  // (z D - z^2 - (gamma+1) z) / (2 gamma D)
    const double br_w = ((1.0 - gamma) * D + (gamma + 1.0) * z + (gamma - 1.0) * (gamma - 1.0)) / (2.0 * D);
    const double c = 1.0 - gamma - z;
    const double vw_num = c >= 0.0 ? c + D : 4.0 * z / (D - c);  // 1 - gamma - z + D

    const double sig = h.m_s * h.m_s + h.q_s;
    Overlaps o;
    o.m_s = h.m_s / h.V_s * ratio;
    o.V_s = ratio / h.V_s;
    o.q_s = sig / (h.V_s * h.V_s) * br_s - h.q_w / (lw * h.V_s) * cross;
    o.q_w = h.q_w / (lw * lw) * br_w - sig / (lw * h.V_s) * gamma * cross;
    o.V_w = vw_num / (2.0 * lw);
    return o;
}

}  // namespace

double mp_stieltjes(double z, double gamma) {
    if (!(z < 0.0)) throw std::invalid_argument("mp_stieltjes: z must be negative");
    if (!(gamma > 0.0)) throw std::invalid_argument("mp_stieltjes: gamma must be positive");
    const double b = z - 1.0 - gamma;
    const double root = std::sqrt(b * b - 4.0 * gamma);
    // (1 - z - gamma - root) / (2 gamma z), rationalized
    const double num = 1.0 - z - gamma;
    if (num > 0.0) return 2.0 / (num + root);
    return (num - root) / (2.0 * gamma * z);
}

RfSolution solve_rf_state_eqs(const RfSpec& spec, const SolverConfig& cfg) {
    validate(spec.erm);
    if (!(spec.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (!(spec.erm.mu1 > 0.0)) throw std::invalid_argument("random-features solver needs mu1 > 0");
    const ErmSpec& e = spec.erm;
    const double gamma = 1.0 / spec.kappa;
    const double mu1sq = e.mu1 * e.mu1;
    const double s2 = e.mu_star * e.mu_star;

    auto composite = [&](const Overlaps& o) {
        return std::vector<double>{e.mu1 * o.m_s, mu1sq * o.q_s + s2 * o.q_w, mu1sq * o.V_s + s2 * o.V_w};
    };
    auto step = [&](const std::vector<double>& x) {
        const ChannelIntegrals ci = channel_integrals(e.loss, e.alpha, e.eps, x[0], x[1], x[2], cfg.method);
        return composite(overlaps_from(hats_from(ci, e.mu1, e.mu_star, gamma), e.lambda, gamma));
    };
    const FixedPointResult fp = damped_fixed_point(step, {0.1 * (1.0 - e.eps), 0.5, 1.0}, cfg.fp);

    RfSolution out;
    const ChannelIntegrals ci = channel_integrals(e.loss, e.alpha, e.eps, fp.x[0], fp.x[1], fp.x[2], cfg.method);
    const Hats h = hats_from(ci, e.mu1, e.mu_star, gamma);
    const Overlaps o = overlaps_from(h, e.lambda, gamma);
    out.m_s = o.m_s;
    out.q_s = o.q_s;
    out.V_s = o.V_s;
    out.q_w = o.q_w;
    out.V_w = o.V_w;
    out.m_hat_s = h.m_s;
    out.q_hat_s = h.q_s;
    out.V_hat_s = h.V_s;
    out.q_hat_w = h.q_w;
    out.V_hat_w = h.V_w;

    StateSolution& sol = out.sol;
    sol.op = {fp.x[0], fp.x[1], fp.x[2], h.m_s, h.q_s, h.V_s};
    sol.iterations = fp.iterations;
    sol.converged = fp.converged;
    sol.residual = fp.residual;
    sol.status = fp.converged ? "ok" : "not-converged";
    if (fp.x[1] > 0.0 && std::isfinite(fp.x[1])) {
        sol.e_gen = gen_error(fp.x[0], fp.x[1]);
        sol.e_mem = mem_error(fp.x[1], fp.x[2]);
    } else {
        sol.converged = false;
        sol.status = "invalid-fixed-point";
    }
    return out;
}

}  // namespace raf
