// Acceptance checks: one PASS/FAIL line per criterion.
#include "raf/bayes.hpp"
#include "raf/closed_forms.hpp"
#include "raf/kernels.hpp"
#include "raf/montecarlo.hpp"
#include "raf/random_features.hpp"
#include "raf/rng.hpp"
#include "raf/state_eqs.hpp"
#include "raf/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace raf;

namespace {

constexpr double pi = std::numbers::pi;
const double kAlpha = 2.0 / 0.9;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void expect(bool ok, const char* fmt, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        if (!ok) {
            pass = false;
            detail << " [miss] " << buf;
        } else {
            detail << ' ' << buf;
        }
    }
};

int failures = 0;

void report(int id, const char* name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " exception: " << e.what();
    }
    const double t = seconds_since(t0);
    failures += !o.pass;
    std::printf("%s %d %s (%.1fs):%s\n", o.pass ? "PASS" : "FAIL", id, name, t, o.detail.str().c_str());
    std::fflush(stdout);
}

KernelGeometry geo(KernelTag t) { return family_geometry({t}); }

// 1. Bayes-optimal reference values
void bo_values(Outcome& o) {
    struct Ref {
        double alpha, eps, e;
    };
    const Ref refs[] = {{kAlpha, 0.1, 0.2008}, {2, 0.2, 0.2430}, {4, 0.2, 0.1702}, {10, 0.2, 0.0853}, {20, 0.2, 0.0449}};
    for (const Ref& r : refs) {
        const auto t0 = std::chrono::steady_clock::now();
        const BoSolution s = solve_bo(r.alpha, r.eps);
        const double e = bo_gen_error(s.q_b);
        const double t = seconds_since(t0);
        o.expect(s.converged && std::abs(e - r.e) <= 5e-4 && t < 1.0, "a=%.3g e=%.2g: %.5f vs %.4f (%.3fs)", r.alpha,
                 r.eps, e, r.e, t);
    }
}

// 2. Square loss at lambda_opt
void krr_values(Outcome& o) {
    const std::pair<const char*, KernelGeometry> models[] = {
        {"linear", KernelGeometry{0, 1, 0}}, {"erf", geo(KernelTag::Erf)}, {"relu", geo(KernelTag::Relu)}};
    for (const auto& [name, g] : models) {
        const CvResult cv = cross_validate_lambda(Loss::Square, kAlpha, 0.1, g.mu1, g.mu_star);
        o.expect(std::abs(cv.sol.e_gen - 0.2084) <= 5e-4, "%s %.5f", name, cv.sol.e_gen);
    }
    const double alphas[] = {2, 4, 10, 20}, want[] = {0.2479, 0.1864, 0.1208, 0.0858};
    for (int i = 0; i < 4; ++i) {
        const AngleResult a = min_over_angle(Loss::Square, alphas[i], 0.2, AngleObjective::LambdaOpt);
        o.expect(std::abs(a.sol.e_gen - want[i]) <= 5e-4, "eps=.2 a=%g %.5f vs %.4f", alphas[i], a.sol.e_gen, want[i]);
    }
}

// 3. Hinge loss at lambda_opt and lambda -> 0+
void svm_values(Outcome& o) {
    const std::tuple<const char*, KernelGeometry, double> models[] = {
        {"linear", KernelGeometry{0, 1, 0}, 0.2094}, {"erf", geo(KernelTag::Erf), 0.2068},
        {"relu", geo(KernelTag::Relu), 0.2031}};
    for (const auto& [name, g, want] : models) {
        const auto t0 = std::chrono::steady_clock::now();
        const CvResult cv = cross_validate_lambda(Loss::Hinge, kAlpha, 0.1, g.mu1, g.mu_star);
        const double t = seconds_since(t0);
        o.expect(cv.sol.converged && std::abs(cv.sol.e_gen - want) <= 1e-3 && t < 30.0, "%s %.5f vs %.4f (%.1fs)",
                 name, cv.sol.e_gen, want, t);
    }
    const double alphas[] = {2, 4, 10, 20};
    const double opt[] = {0.2445, 0.1763, 0.1009, 0.0669}, zero[] = {0.2477, 0.1858, 0.1196, 0.0846};
    for (int i = 0; i < 4; ++i) {
        const AngleResult a = min_over_angle(Loss::Hinge, alphas[i], 0.2, AngleObjective::LambdaOpt);
        o.expect(std::abs(a.sol.e_gen - opt[i]) <= 1e-3, "opt a=%g %.5f vs %.4f", alphas[i], a.sol.e_gen, opt[i]);
        const AngleResult z = min_over_angle(Loss::Hinge, alphas[i], 0.2, AngleObjective::Ridgeless);
        o.expect(std::abs(z.sol.e_gen - zero[i]) <= 1e-3, "0+ a=%g %.5f vs %.4f", alphas[i], z.sol.e_gen, zero[i]);
    }
}

// 4. Optimal angles
void angles(Outcome& o) {
    const double g = optimal_mem_angle(0.1);
    o.expect(std::abs(g - 0.8011) <= 1e-4, "memorization angle %.6f vs 0.8011", g);
    const AngleResult h = min_over_angle(Loss::Hinge, kAlpha, 0.1, AngleObjective::LambdaOpt);
    o.expect(std::abs(h.gamma - 0.9774) <= 5e-3, "hinge angle %.5f vs 0.9774 (E=%.5f)", h.gamma, h.sol.e_gen);
}

// 5. Thresholds and the ridgeless perceptron
void thresholds(Outcome& o) {
    const double a1 = hinge_interp_threshold(1.0);
    o.expect(a1 == 2.0, "alpha_c(1)=%.17g", a1);
    const double e = 1e-4;
    const double scaled = hinge_interp_threshold(e) * std::cbrt(3 * e / (2 * pi * pi));
    o.expect(std::abs(scaled - 1.0) <= 0.02, "scaled alpha_c(1e-4)=%.5f", scaled);
    bool zero = true;
    for (double eps : {0.0, 0.1, 0.5, 1.0})
        for (double alpha : {0.05, 0.3, 0.7, 0.99, 1.0 - 1e-9}) zero = zero && ridgeless_perceptron_square(alpha, eps).e_mem == 0.0;
    o.expect(zero, "E_mem=0 for alpha<=1 (%d settings)", 20);
    double worst = 0.0;
    for (double eps : {0.0, 0.1, 0.3, 0.5, 0.9, 1.0})
        for (double alpha : {1.01, 1.5, 2.0, 2.2222, 3.0, 5.0, 10.0, 100.0, 1e4}) {
            const double c = (1 - eps) * (1 - eps);
            const double ref = 0.5 * std::erfc(std::sqrt(pi / (2 * (alpha - 1) * (pi + 2 * c * (alpha - 2)))));
            worst = std::max(worst, std::abs(ridgeless_perceptron_square(alpha, eps).e_mem - ref));
        }
    o.expect(worst <= 1e-10, "erfc form max dev %.2e", worst);
}

// 6. Large-alpha rates over alpha in [10, 1e4] at eps = 0.5
void rates(Outcome& o) {
    const double eps = 0.5;
    const std::vector<double> alphas = logspace(10.0, 1e4, 61);
    std::vector<double> bo;
    for (double a : alphas) bo.push_back(bo_gen_error(solve_bo(a, eps).q_b));
    const RateFit fb = fit_rate(alphas, bo);
    o.expect(std::abs(fb.exponent + 1.0) <= 0.03, "BO exponent %.4f", fb.exponent);

    const double a = (1 - eps) * std::sqrt(2 / pi);
    const double coeff = std::sqrt(1 - a * a) / (pi * a);
    const std::pair<double, double> settings[] = {{0.5, 0.05}, {1.3, 2.0}};  // (angle, lambda)
    for (const auto& [gam, lambda] : settings) {
        std::vector<double> e;
        for (double al : alphas) e.push_back(solve_at(Loss::Square, al, eps, std::sin(gam), std::cos(gam), lambda).e_gen);
        const RateFit f = fit_rate(alphas, e);
        const double pref = e.back() * std::sqrt(alphas.back());
        o.expect(std::abs(f.exponent + 0.5) <= 0.03, "KRR(g=%.2g,l=%.2g) exponent %.4f", gam, lambda, f.exponent);
        o.expect(std::abs(pref / coeff - 1) <= 0.02, "prefactor %.5f vs %.5f", pref, coeff);
    }
}

// 7. Rescaling invariance of the order parameters
void invariance(Outcome& o) {
    std::mt19937_64 g(20240601);
    std::uniform_real_distribution<double> ua(0.3, 6), ue(0, 0.7), ug(0.15, 1.45), ul(-2.5, 0.7);
    double worst = 0.0;
    bool conv = true;
    for (int i = 0; i < 20; ++i) {
        const double gam = ug(g);
        const ErmSpec base{i % 2 ? Loss::Hinge : Loss::Square, ua(g), ue(g), std::sin(gam), std::cos(gam),
                           std::pow(10.0, ul(g))};
        SolverConfig cfg;
        cfg.fp.tol = 1e-12;
        const StateSolution s0 = solve_kernel_state_eqs(base, cfg);
        conv = conv && s0.converged;
        for (double r : {0.5, 2.0, 5.0}) {
            ErmSpec sc = base;
            sc.mu1 *= r;
            sc.mu_star *= r;
            sc.lambda *= r * r;
            const StateSolution s = solve_kernel_state_eqs(sc, cfg);
            conv = conv && s.converged;
            worst = std::max({worst, std::abs(s.op.m - s0.op.m), std::abs(s.op.q - s0.op.q),
                              std::abs(s.op.V - s0.op.V) / std::max(1.0, s0.op.V)});
        }
    }
    o.expect(conv && worst <= 1e-8, "max deviation %.2e over 60 rescalings", worst);
}

// 8. Fixed point against closed form, memorization quadrature against erfc
void cross_checks(Outcome& o) {
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> ua(0.2, 8), ue(0, 0.9), ug(0.05, 1.5), ul(-3, 1);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double gam = ug(g);
        const ErmSpec spec{Loss::Square, ua(g), ue(g), std::sin(gam), std::cos(gam), std::pow(10.0, ul(g))};
        SolverConfig cfg;
        cfg.fp.tol = 1e-13;
        const StateSolution s = solve_kernel_state_eqs(spec, cfg);
        const OrderParams c = krr_closed_solution(spec);
        worst = std::max({worst, std::abs(s.op.m - c.m), std::abs(s.op.q - c.q),
                          std::abs(s.op.V - c.V) / std::max(1.0, c.V)});
    }
    o.expect(worst <= 1e-8, "fixed point vs closed form %.2e", worst);
    double wm = 0.0;
    for (Loss loss : {Loss::Square, Loss::Hinge})
        for (double q : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0})
            for (double V : {0.01, 0.2, 1.0, 2.5, 10.0})
                wm = std::max(wm, std::abs(mem_error_generic(loss, q, V) - 0.5 * std::erfc(V / std::sqrt(2 * q))));
    o.expect(wm <= 1e-6, "memorization quadrature %.2e", wm);
}

// 9. Random features approach the kernel limit
void finite_width(Outcome& o) {
    const std::pair<Loss, KernelTag> models[] = {{Loss::Square, KernelTag::Erf}, {Loss::Hinge, KernelTag::Relu}};
    for (const auto& [loss, tag] : models) {
        const KernelGeometry g = geo(tag);
        for (double lambda : {0.01, 0.1, 1.0}) {
            const ErmSpec e{loss, kAlpha, 0.1, g.mu1, g.mu_star, lambda};
            const StateSolution k = solve_kernel_state_eqs(e);
            double prev = 1.0;
            bool mono = k.converged;
            std::ostringstream gaps;
            for (double kappa : {1.0, 4.0, 16.0, 1e4}) {
                const RfSolution r = solve_rf_state_eqs({e, kappa});
                const double gap = std::max(std::abs(r.sol.e_gen - k.e_gen), std::abs(r.sol.e_mem - k.e_mem));
                mono = mono && r.sol.converged && gap < prev;
                prev = gap;
                gaps << (kappa == 1.0 ? "" : "/") << gap;
            }
            o.expect(mono && prev < 1e-3, "%s l=%g gaps %s", loss_name(loss).c_str(), lambda, gaps.str().c_str());
        }
    }
}

// 10. Finite-size simulations against theory
void monte_carlo(Outcome& o) {
    const int d = 2000, repeats = 20, n_test = 2000;
    const double eps = 0.1;
    const int n = static_cast<int>(std::lround(kAlpha * d));
    const KernelFamily kernel{KernelTag::Relu};
    const KernelGeometry g = family_geometry(kernel);
    const std::vector<double> grid = logspace(1e-5, 1e2, 12);
    std::vector<double> krr_lambdas = grid;
    krr_lambdas.push_back(0.0);

    const std::uint64_t seed = 1;
    std::vector<std::vector<EmpiricalPoint>> krr(krr_lambdas.size()), svm(grid.size());
    int ridgeless_zero = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) {
        const std::uint64_t rs = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(r)));
        const RafDataset data = generate_raf_dataset(n, d, eps, rs);
        const TestSet test = generate_test_set(data.teacher, n_test, splitmix64(rs));
        const Eigen::MatrixXd G = kernel_gram(kernel, data.inputs, true);
        const Eigen::MatrixXd Gt = kernel_cross(kernel, test.inputs, data.inputs, true);
        const auto pk = fit_and_score(Loss::Square, G, Gt, data, test, krr_lambdas);
        const auto ph = fit_and_score(Loss::Hinge, G, Gt, data, test, grid);
        for (std::size_t k = 0; k < krr_lambdas.size(); ++k) krr[k].push_back(pk[k]);
        for (std::size_t k = 0; k < grid.size(); ++k) svm[k].push_back(ph[k]);
        ridgeless_zero += pk.back().e_mem == 0.0;
    }
    const double elapsed = seconds_since(t0);

    auto agree = [&](Loss loss, const std::vector<std::vector<EmpiricalPoint>>& runs) {
        int good = 0, unconverged = 0, degenerate = 0;
        std::ostringstream bad;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const EmpiricalResult e = aggregate(runs[k]);
            unconverged += e.n_failed;
            const StateSolution th = solve_at(loss, kAlpha, eps, g.mu1, g.mu_star, grid[k]);
            const bool ok = th.converged && std::abs(e.e_gen_hat - th.e_gen) <= 3 * e.stderr_gen &&
                            std::abs(e.e_mem_hat - th.e_mem) <= 3 * e.stderr_mem;
            good += ok;
            // misses whose only defect is an all-zero memorization sample against a theory value below 1e-4
            degenerate += !ok && std::abs(e.e_gen_hat - th.e_gen) <= 3 * e.stderr_gen && e.stderr_mem == 0.0 &&
                          e.e_mem_hat == 0.0 && th.e_mem < 1e-4;
            if (!ok)
                bad << " l=" << grid[k] << " gen " << e.e_gen_hat << "+-" << e.stderr_gen << " vs " << th.e_gen << " mem "
                    << e.e_mem_hat << "+-" << e.stderr_mem << " vs " << th.e_mem << ";";
        }
        o.expect(10 * good >= 9 * static_cast<int>(grid.size()) && unconverged == 0,
                 "%s %d/%zu within 3 stderr, %d unconverged%s", loss_name(loss).c_str(), good, grid.size(),
                 unconverged, bad.str().c_str());
        if (degenerate > 0)
            o.detail << " (note: " << degenerate << " " << loss_name(loss)
                     << " miss(es) are zero-variance e_mem samples at 0 against theory < 1e-4; counted as misses)";
    };
    agree(Loss::Square, krr);
    agree(Loss::Hinge, svm);
    o.expect(ridgeless_zero == repeats, "ridgeless e_mem=0 on %d/%d repeats", ridgeless_zero, repeats);
    o.expect(elapsed < 600.0, "d=%d n=%d repeats=%d in %.0fs", d, n, repeats, elapsed);
}

}  // namespace

int main() {
    report(1, "bayes-optimal reference values", bo_values);
    report(2, "square loss at optimal regularization", krr_values);
    report(3, "hinge loss at optimal and vanishing regularization", svm_values);
    report(4, "optimal angles", angles);
    report(5, "interpolation thresholds and ridgeless perceptron", thresholds);
    report(6, "large-alpha rates", rates);
    report(7, "rescaling invariance", invariance);
    report(8, "solver cross-checks", cross_checks);
    report(9, "finite-width convergence", finite_width);
    report(10, "monte carlo agreement", monte_carlo);
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
