#include "doctest.h"

#include "raf/random_features.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

using namespace raf;

TEST_CASE("marchenko-pastur stieltjes transform") {
    for (double gamma : {0.1, 0.5, 1.0, 2.0, 8.0}) {
        for (double z : {-1e-3, -0.1, -1.0, -7.0, -100.0}) {
            const double g = mp_stieltjes(z, gamma);
            CHECK(g > 0.0);
            CHECK(g < -1.0 / z);
            CHECK(std::abs(gamma * z * g * g + (z + gamma - 1) * g + 1) < 1e-12 * std::max(1.0, std::abs(z) * g));
        }
    }
    CHECK(mp_stieltjes(-1.0, 1e-9) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("stieltjes transform matches a sampled spectrum") {
    const int d = 300, p = 600;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd F(d, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < d; ++i) F(i, j) = nd(rng);
    const Eigen::MatrixXd W = F * F.transpose() / p;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues();
    for (double z : {-0.2, -1.0, -4.0}) {
        const double emp = (1.0 / (ev.array() - z)).mean();
        CHECK(mp_stieltjes(z, double(d) / p) == doctest::Approx(emp).epsilon(1e-2));
    }
}

TEST_CASE("finite width approaches the kernel limit") {
    struct Case {
        Loss loss;
        KernelTag tag;
    };
    for (const Case c : {Case{Loss::Square, KernelTag::Erf}, Case{Loss::Hinge, KernelTag::Relu}}) {
        const KernelGeometry g = family_geometry({c.tag});
        for (double lambda : {0.01, 0.1, 1.0}) {
            const ErmSpec e{c.loss, 2.0 / 0.9, 0.1, g.mu1, g.mu_star, lambda};
            const StateSolution k = solve_kernel_state_eqs(e);
            REQUIRE(k.converged);
            double prev = 1.0;
            for (double kappa : {1.0, 4.0, 16.0, 1e4}) {
                const RfSolution r = solve_rf_state_eqs({e, kappa});
                REQUIRE(r.sol.converged);
                const double gap = std::max(std::abs(r.sol.e_gen - k.e_gen), std::abs(r.sol.e_mem - k.e_mem));
                CHECK(gap < prev);
                prev = gap;
            }
            CHECK(prev < 1e-3);
        }
    }
}

TEST_CASE("narrow random features cannot memorize") {
    const KernelGeometry g = family_geometry({KernelTag::Erf});
    const ErmSpec e{Loss::Square, 2.0 / 0.9, 0.1, g.mu1, g.mu_star, 1e-4};
    CHECK(solve_rf_state_eqs({e, 1.0}).sol.e_mem > 0.05);
    CHECK(solve_rf_state_eqs({e, 1e3}).sol.e_mem < 1e-6);
}

TEST_CASE("random features reject bad widths") {
    const ErmSpec e{Loss::Square, 2.0, 0.1, 0.5, 0.5, 0.1};
    CHECK_THROWS_AS(solve_rf_state_eqs({e, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_rf_state_eqs({e, -1.0}), std::invalid_argument);
}
