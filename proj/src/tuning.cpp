#include "raf/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace raf {

StateSolution solve_at(Loss loss, double alpha, double eps, double mu1, double mu_star, double lambda,
                       const SolverConfig& cfg) {
    if (lambda == 0.0) return ridgeless_solution(loss, alpha, eps, mu1, mu_star, cfg);
    const ErmSpec spec{loss, alpha, eps, mu1, mu_star, lambda};
    if (loss == Loss::Square && mu1 > 0.0) {
        StateSolution sol;
        sol.op = krr_closed_solution(spec);
        sol.e_gen = gen_error(sol.op.m, sol.op.q);
        sol.e_mem = mem_error(sol.op.q, sol.op.V);
        sol.converged = true;
        return sol;
    }
    return solve_kernel_state_eqs(spec, cfg);
}

CvResult cross_validate_lambda(Loss loss, double alpha, double eps, double mu1, double mu_star,
                               const SolverConfig& cfg, const LambdaSearch& search) {
    if (!(eps < 1.0)) throw std::invalid_argument("cross_validate_lambda: eps must be < 1");
    CvResult out;
    if (loss == Loss::Square) {
        const LambdaOpt lo = krr_lambda_opt(eps, mu1, mu_star);
        out.lambda = lo.lambda;
        out.zero_plus = lo.zero_plus;
        out.sol = solve_at(loss, alpha, eps, mu1, mu_star, lo.zero_plus ? 0.0 : lo.lambda, cfg);
        return out;
    }
    // Points deep in the ridgeless plateau converge slowly (V ~ 1/lambda); they are
    // capped here and covered by the dedicated ridgeless branch below.
    SolverConfig scan_cfg = cfg;
    scan_cfg.fp.max_iter = std::min(cfg.fp.max_iter, search.max_scan_iter);
    OrderParams warm;
    bool have_warm = false;
    auto objective = [&](double log_lambda) {
        const ErmSpec spec{loss, alpha, eps, mu1, mu_star, std::pow(10.0, log_lambda)};
        const StateSolution s = solve_kernel_state_eqs(spec, scan_cfg, have_warm ? &warm : nullptr);
        if (!s.converged) return 1.0;
        warm = s.op;
        have_warm = true;
        return s.e_gen;
    };
    const MinResult best = scan_then_golden(objective, search.log_lo, search.log_hi, search.scan_points, search.tol);
    out.lambda = std::pow(10.0, best.x);
    out.sol = solve_kernel_state_eqs({loss, alpha, eps, mu1, mu_star, out.lambda}, cfg);
    try {
        const StateSolution r = ridgeless_solution(loss, alpha, eps, mu1, mu_star, cfg);
        if (r.converged && r.e_gen <= out.sol.e_gen) {
            out.lambda = 0.0;
            out.zero_plus = true;
            out.sol = r;
        }
    } catch (const std::exception&) {
        // the ridgeless branch is unavailable here (e.g. a singular point); keep the scan result
    }
    if (!out.sol.converged) out.sol.status = "search-failed";
    return out;
}

AngleResult min_over_angle(Loss loss, double alpha, double eps, AngleObjective objective,
                           const SolverConfig& cfg, int scan_points, double tol) {
    auto at = [&](double gamma) {
        const KernelGeometry g = geometry_at_angle(gamma);
        AngleResult r;
        r.gamma = gamma;
        if (objective == AngleObjective::Ridgeless) {
            r.sol = ridgeless_solution(loss, alpha, eps, g.mu1, g.mu_star, cfg);
            r.zero_plus = true;
        } else {
            const CvResult cv = cross_validate_lambda(loss, alpha, eps, g.mu1, g.mu_star, cfg);
            r.sol = cv.sol;
            r.lambda = cv.lambda;
            r.zero_plus = cv.zero_plus;
        }
        return r;
    };
    auto f = [&](double gamma) {
        try {
            const AngleResult r = at(gamma);
            return r.sol.converged ? r.sol.e_gen : 1.0;
        } catch (const std::exception&) {
            return 1.0;
        }
    };
    // the ridgeless search runs over interpolating kernels only (mu_star > 0)
    const double top = std::numbers::pi / 2.0 - (objective == AngleObjective::Ridgeless ? 1e-6 : 0.0);
    const MinResult best = scan_then_golden(f, 1e-3, top, scan_points, tol);
    return at(best.x);
}

RateFit fit_rate(const std::vector<double>& alpha, const std::vector<double>& err) {
    if (alpha.size() != err.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (alpha.size() < 5) throw std::invalid_argument("fit_rate: need at least 5 points");
    const double n = static_cast<double>(alpha.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0) || !(err[i] > 0.0)) throw std::invalid_argument("fit_rate: values must be positive");
        const double x = std::log(alpha[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double cxx = sxx - sx * sx / n;
    const double cxy = sxy - sx * sy / n;
    const double cyy = syy - sy * sy / n;
    RateFit r;
    r.exponent = cxy / cxx;
    r.coefficient = std::exp((sy - r.exponent * sx) / n);
    r.r2 = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
    return r;
}

}  // namespace raf
