#include "doctest.h"

#include "raf/bayes.hpp"
#include "raf/closed_forms.hpp"
#include "raf/errors.hpp"
#include "raf/state_eqs.hpp"
#include "raf/tuning.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace raf;

namespace {

constexpr double pi = std::numbers::pi;

// Ridge regression on the linear model: conjugates alpha a / (1+V), alpha (1 - 2 m a + q) / (1+V)^2,
// alpha / (1+V), with a = E[y xi] = (1-eps) sqrt(2/pi); plain iteration.
OrderParams linear_ridge_oracle(double alpha, double eps, double lambda) {
    const double a = (1 - eps) * std::sqrt(2 / pi);
    double m = 0.1, q = 0.5, V = 1.0;
    for (int it = 0; it < 200000; ++it) {
        const double mh = alpha * a / (1 + V);
        const double qh = alpha * (1 - 2 * m * a + q) / ((1 + V) * (1 + V));
        const double vh = alpha / (1 + V);
        const double d = lambda + vh;
        const double nm = mh / d, nq = (mh * mh + qh) / (d * d), nV = 1 / d;
        const double diff = std::abs(nm - m) + std::abs(nq - q) + std::abs(nV - V);
        m = 0.5 * m + 0.5 * nm;
        q = 0.5 * q + 0.5 * nq;
        V = 0.5 * V + 0.5 * nV;
        if (diff < 1e-15) break;
    }
    return {m, q, V, 0, 0, 0};
}

double perceptron_mem_formula(double alpha, double eps) {
    const double c = (1 - eps) * (1 - eps);
    return 0.5 * std::erfc(std::sqrt(pi / (2 * (alpha - 1) * (pi + 2 * c * (alpha - 2)))));
}

}  // namespace

TEST_CASE("square-loss fixed point equals the closed form") {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> ua(0.2, 8), ue(0, 0.9), ug(0.05, 1.5), ul(-3, 1);
    for (int i = 0; i < 50; ++i) {
        const double gam = ug(g);
        const ErmSpec spec{Loss::Square, ua(g), ue(g), std::sin(gam), std::cos(gam), std::pow(10.0, ul(g))};
        SolverConfig cfg;
        cfg.fp.tol = 1e-13;
        const StateSolution s = solve_kernel_state_eqs(spec, cfg);
        const OrderParams c = krr_closed_solution(spec);
        CAPTURE(spec.alpha);
        CAPTURE(spec.lambda);
        REQUIRE(s.converged);
        CHECK(std::abs(s.op.m - c.m) < 1e-8);
        CHECK(std::abs(s.op.q - c.q) < 1e-8);
        CHECK(std::abs(s.op.V - c.V) < 1e-8 * std::max(1.0, c.V));
    }
}

TEST_CASE("linear kernel reduces to ridge regression on the perceptron") {
    std::mt19937_64 g(77);
    std::uniform_real_distribution<double> ua(0.2, 6), ue(0, 0.95), ul(-2, 1);
    for (int i = 0; i < 50; ++i) {
        const double alpha = ua(g), eps = ue(g), lambda = std::pow(10.0, ul(g));
        const OrderParams o = linear_ridge_oracle(alpha, eps, lambda);
        const OrderParams c = krr_closed_solution({Loss::Square, alpha, eps, 1.0, 0.0, lambda});
        CHECK(std::abs(o.m - c.m) < 1e-8);
        CHECK(std::abs(o.q - c.q) < 1e-8);
        CHECK(std::abs(o.V - c.V) < 1e-8 * std::max(1.0, c.V));
    }
}

TEST_CASE("angular rescaling leaves the order parameters unchanged") {
    std::mt19937_64 g(99);
    std::uniform_real_distribution<double> ua(0.5, 5), ue(0, 0.6), ug(0.2, 1.4), ul(-2, 0.5);
    for (int i = 0; i < 20; ++i) {
        const Loss loss = i % 2 ? Loss::Hinge : Loss::Square;
        const double gam = ug(g);
        const ErmSpec base{loss, ua(g), ue(g), std::sin(gam), std::cos(gam), std::pow(10.0, ul(g))};
        SolverConfig cfg;
        cfg.fp.tol = 1e-12;
        const StateSolution s0 = solve_kernel_state_eqs(base, cfg);
        REQUIRE(s0.converged);
        for (double r : {0.5, 2.0, 5.0}) {
            ErmSpec sc = base;
            sc.mu1 *= r;
            sc.mu_star *= r;
            sc.lambda *= r * r;
            const StateSolution s1 = solve_kernel_state_eqs(sc, cfg);
            CHECK(std::abs(s1.op.m - s0.op.m) < 1e-8);
            CHECK(std::abs(s1.op.q - s0.op.q) < 1e-8);
            CHECK(std::abs(s1.op.V - s0.op.V) < 1e-8 * std::max(1.0, s0.op.V));
        }
    }
}

TEST_CASE("returned fixed points satisfy their equations") {
    for (Loss loss : {Loss::Square, Loss::Hinge}) {
        for (double lambda : {1e-3, 0.1, 2.0}) {
            for (double gam : {0.3, 0.8, 1.3}) {
                const ErmSpec spec{loss, 2.0 / 0.9, 0.1, std::sin(gam), std::cos(gam), lambda};
                SolverConfig cfg;
                cfg.fp.tol = 1e-12;
                const StateSolution s = solve_kernel_state_eqs(spec, cfg);
                REQUIRE(s.converged);
                CHECK(state_residual(spec, s.op) < 1e-8);
            }
        }
    }
}

TEST_CASE("generic quadrature hats agree with the analytic ones") {
    for (Loss loss : {Loss::Square, Loss::Hinge}) {
        for (double V : {0.3, 2.0, 10.0}) {
            const ChannelIntegrals a = channel_integrals(loss, 2.0, 0.2, 0.4, 0.6, V, HatMethod::Analytic);
            const ChannelIntegrals b = channel_integrals(loss, 2.0, 0.2, 0.4, 0.6, V, HatMethod::Quadrature);
            CHECK(a.a_m == doctest::Approx(b.a_m).epsilon(1e-7));
            CHECK(a.a_q == doctest::Approx(b.a_q).epsilon(1e-7));
            CHECK(a.a_v == doctest::Approx(b.a_v).epsilon(1e-7));
        }
    }
}

TEST_CASE("optimal regularization for the square loss") {
    const LambdaOpt lin = krr_lambda_opt(0.0, 1.0, 0.0);
    CHECK_FALSE(lin.zero_plus);
    CHECK(lin.lambda == doctest::Approx(pi / 2 - 1).epsilon(1e-12));
    const KernelGeometry sg = family_geometry({KernelTag::Sign});
    const LambdaOpt s = krr_lambda_opt(0.0, sg.mu1, sg.mu_star);
    CHECK((s.zero_plus || s.lambda < 1e-12));
    const double gm = optimal_mem_angle(0.1);
    for (double gam : {0.2, 0.5, gm - 0.01}) CHECK(krr_lambda_opt(0.1, std::sin(gam), std::cos(gam)).zero_plus);
    // E_gen(lambda_opt) is the same for every angle above the memorization angle
    for (double gam : {gm + 0.01, 1.0, 1.3, pi / 2}) {
        const CvResult cv = cross_validate_lambda(Loss::Square, 2.0 / 0.9, 0.1, std::sin(gam), std::cos(gam));
        CHECK(std::abs(cv.sol.e_gen - 0.2084) < 5e-4);
    }
    const KernelGeometry erf = family_geometry({KernelTag::Erf});
    CHECK(std::abs(cross_validate_lambda(Loss::Square, 2.0 / 0.9, 0.1, erf.mu1, erf.mu_star).sol.e_gen - 0.2084) < 5e-4);
    // below the memorization angle the optimum is the ridgeless interpolator
    const CvResult low = cross_validate_lambda(Loss::Square, 2.0 / 0.9, 0.1, std::sin(0.5), std::cos(0.5));
    CHECK(low.zero_plus);
    CHECK(low.sol.e_mem == 0.0);
}

TEST_CASE("hinge loss at its cross-validated regularization") {
    const KernelGeometry relu = family_geometry({KernelTag::Relu});
    const CvResult cv = cross_validate_lambda(Loss::Hinge, 2.0 / 0.9, 0.1, relu.mu1, relu.mu_star);
    CHECK(cv.sol.converged);
    CHECK(std::abs(cv.sol.e_gen - 0.2031) < 1e-3);
}

TEST_CASE("ridgeless perceptron, square loss") {
    for (double eps : {0.0, 0.3, 0.9})
        for (double alpha : {0.2, 0.7, 1.0 - 1e-6}) CHECK(ridgeless_perceptron_square(alpha, eps).e_mem == 0.0);
    CHECK(ridgeless_perceptron_square(2.0, 1.0).e_mem == doctest::Approx(0.5 * std::erfc(std::sqrt(0.5))).epsilon(1e-12));
    CHECK(ridgeless_perceptron_square(2.0, 1.0).e_mem == doctest::Approx(0.1587).epsilon(1e-3));
    CHECK(ridgeless_perceptron_square(1e8, 0.2).e_mem == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_THROWS_AS(ridgeless_perceptron_square(1.0, 0.1), SingularPoint);
    for (double eps : {0.0, 0.1, 0.5})
        for (double alpha : {1.5, 2.2, 5.0, 40.0}) {
            const double e = ridgeless_perceptron_square(alpha, eps).e_mem;
            CHECK(std::abs(e - perceptron_mem_formula(alpha, eps)) < 1e-10);
            // the lambda -> 0 limit of the ridge solution
            const OrderParams op = krr_closed_solution({Loss::Square, alpha, eps, 1.0, 0.0, 1e-12});
            CHECK(std::abs(mem_error(op.q, op.V) - e) < 1e-9);
        }
}

TEST_CASE("ridgeless kernels interpolate") {
    for (Loss loss : {Loss::Square, Loss::Hinge}) {
        const StateSolution s = ridgeless_solution(loss, 2.0 / 0.9, 0.1, std::sin(0.9), std::cos(0.9));
        CHECK(s.converged);
        CHECK(s.e_mem == 0.0);
        // continuity with small lambda
        const StateSolution t = solve_at(loss, 2.0 / 0.9, 0.1, std::sin(0.9), std::cos(0.9), 1e-5);
        CHECK(std::abs(s.e_gen - t.e_gen) < 1e-4);
    }
    // at the optimal memorization angle the lambda_opt and ridgeless errors coincide
    const double gm = optimal_mem_angle(0.1);
    const CvResult cv = cross_validate_lambda(Loss::Square, 2.0 / 0.9, 0.1, std::sin(gm), std::cos(gm));
    const StateSolution r = ridgeless_solution(Loss::Square, 2.0 / 0.9, 0.1, std::sin(gm), std::cos(gm));
    CHECK(std::abs(cv.sol.e_gen - r.e_gen) < 1e-6);
    // approaching the linear model from mu_star > 0 below the hinge threshold
    const double a = 1.5;
    REQUIRE(a < hinge_interp_threshold(0.1));
    const StateSolution lin = ridgeless_solution(Loss::Hinge, a, 0.1, 1.0, 0.0);
    const StateSolution near = ridgeless_solution(Loss::Hinge, a, 0.1, 1.0, 1e-4);
    CHECK(std::abs(lin.e_gen - near.e_gen) < 1e-3);
}

TEST_CASE("hinge interpolation threshold") {
    CHECK(hinge_interp_threshold(1.0) == 2.0);
    const double e = 1e-4;
    CHECK(hinge_interp_threshold(e) * std::cbrt(3 * e / (2 * pi * pi)) == doctest::Approx(1.0).epsilon(0.02));
    // dense sign scan on [2, 10]
    auto f = [](double a) { return a * (0.5 - 0.5 / pi * std::atan(a * 0.5 / pi)) - 1.0; };
    double lo = 2.0, hi = 10.0;
    for (double a = 2.0; a <= 10.0; a += 1e-3)
        if (f(a) < 0 && f(a + 1e-3) >= 0) {
            lo = a;
            hi = a + 1e-3;
        }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
    }
    CHECK(hinge_interp_threshold(0.5) == doctest::Approx(lo).epsilon(1e-9));
    CHECK(std::isinf(hinge_interp_threshold(0.0)));
}

TEST_CASE("infinite regularization") {
    CHECK(infinite_lambda_errors(3.0, 1.0, 0.6, 0.8).e_gen == doctest::Approx(0.5));
    CHECK(infinite_lambda_errors(1e-9, 0.2, 0.6, 0.8).e_gen == doctest::Approx(0.5).epsilon(1e-3));
    // large-lambda limit of the ridge solution
    for (double gam : {0.4, 1.0, pi / 2}) {
        const double mu1 = std::sin(gam), ms = std::cos(gam);
        const ErrorPair inf = infinite_lambda_errors(2.0, 0.1, mu1, ms);
        const OrderParams op = krr_closed_solution({Loss::Square, 2.0, 0.1, mu1, ms, 1e7});
        CHECK(gen_error(op.m, op.q) == doctest::Approx(inf.e_gen).epsilon(1e-5));
        CHECK(mem_error(op.q, op.V) == doctest::Approx(inf.e_mem).epsilon(1e-5));
    }
}

TEST_CASE("large-alpha coefficient of kernel ridge regression") {
    CHECK(krr_large_alpha_coeff(0.0) == doctest::Approx(std::sqrt(1 - 2 / pi) / (pi * std::sqrt(2 / pi))).epsilon(1e-12));
    CHECK(krr_large_alpha_coeff(0.0) == doctest::Approx(0.2405).epsilon(1e-3));
    const double c = krr_large_alpha_coeff(0.5);
    for (double gam : {0.5, 1.2}) {
        for (double lambda : {0.01, 1.0}) {
            const OrderParams op = krr_closed_solution({Loss::Square, 1e6, 0.5, std::sin(gam), std::cos(gam), lambda});
            CHECK(gen_error(op.m, op.q) * 1e3 == doctest::Approx(c).epsilon(0.005));
        }
    }
    std::vector<double> alphas, e1, e2;
    for (int i = 0; i < 13; ++i) alphas.push_back(1e3 * std::pow(10.0, 3.0 * i / 12.0));
    for (double a : alphas) {
        const OrderParams p = krr_closed_solution({Loss::Square, a, 0.5, std::sin(0.4), std::cos(0.4), 0.05});
        const OrderParams q = krr_closed_solution({Loss::Square, a, 0.5, std::sin(1.3), std::cos(1.3), 3.0});
        e1.push_back(gen_error(p.m, p.q));
        e2.push_back(gen_error(q.m, q.q));
    }
    CHECK(fit_rate(alphas, e1).coefficient == doctest::Approx(fit_rate(alphas, e2).coefficient).epsilon(0.01));
}

TEST_CASE("no estimator beats bayes-optimal") {
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double alpha = 0.3 * std::pow(10.0, 1.5 * i / 9.0);
            const double eps = 0.9 * j / 9.0;
            const double bo = bo_gen_error(solve_bo(alpha, eps).q_b);
            for (double gam : {0.5, 1.0, pi / 2}) {
                const CvResult cv = cross_validate_lambda(Loss::Square, alpha, eps, std::sin(gam), std::cos(gam));
                CHECK(cv.sol.e_gen >= bo - 1e-6);
            }
            if (i % 3 == 0 && j % 3 == 0) {
                const StateSolution h = solve_at(Loss::Hinge, alpha, eps, std::sin(1.0), std::cos(1.0), 0.3);
                CHECK(h.e_gen >= bo - 1e-6);
            }
        }
    }
}

TEST_CASE("linear model along the regularization path") {
    const std::vector<double> grid = logspace(1e-4, 1e3, 40);
    for (Loss loss : {Loss::Square, Loss::Hinge}) {
        std::vector<double> gen, mem;
        for (double l : grid) {
            const StateSolution s = solve_at(loss, 2.0 / 0.9, 0.1, 1.0, 0.0, l);
            REQUIRE(s.converged);
            gen.push_back(s.e_gen);
            mem.push_back(s.e_mem);
        }
        for (std::size_t k = 1; k < grid.size(); ++k) CHECK(mem[k] >= mem[k - 1] - 1e-10);
        // unimodal: decreasing then increasing
        std::size_t turns = 0;
        for (std::size_t k = 2; k < grid.size(); ++k) {
            const bool down = gen[k - 1] < gen[k - 2] - 1e-8;
            const bool up = gen[k] > gen[k - 1] + 1e-8;
            turns += down && up;
            if (k > 2 && gen[k - 1] > gen[k - 2] + 1e-8) CHECK(gen[k] >= gen[k - 1] - 1e-8);
        }
        CHECK(turns <= 1);
    }
}

TEST_CASE("bad specs are rejected") {
    CHECK_THROWS_AS(solve_kernel_state_eqs({Loss::Square, -1.0, 0.1, 1.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_kernel_state_eqs({Loss::Square, 1.0, 0.1, 1.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_kernel_state_eqs({Loss::Square, 1.0, 0.1, 0.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(cross_validate_lambda(Loss::Square, 1.0, 1.0, 1.0, 0.0), std::invalid_argument);
    const StateSolution deg = solve_kernel_state_eqs({Loss::Hinge, 1.0, 0.1, 0.0, 1.0, 1.0});
    CHECK(deg.e_gen == 0.5);
}
