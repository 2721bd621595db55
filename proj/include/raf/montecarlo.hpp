#pragma once

#include "raf/channel.hpp"
#include "raf/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace raf {

struct RafDataset {
    Eigen::MatrixXd inputs;  // n x d, iid N(0,1)
    Eigen::VectorXd labels;  // +-1
    std::vector<int> fact_index;
    std::vector<int> rule_index;
    Eigen::VectorXd teacher;  // d
    std::uint64_t seed = 0;
};

RafDataset generate_raf_dataset(int n, int d, double eps, std::uint64_t seed);

struct TestSet {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd labels;  // teacher rule, no facts
};

TestSet generate_test_set(const Eigen::VectorXd& teacher, int n_test, std::uint64_t seed);

// sign with sign(0) = +1
inline double sign_pm(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Kernel matrices on the cosine rho = x.x' / (|x| |x'|). With drop_constant the
// kernel is K(rho) - K(0), which has the same (mu1, mu_star).
Eigen::MatrixXd kernel_gram(const KernelFamily& k, const Eigen::MatrixXd& x, bool drop_constant = false);
Eigen::MatrixXd kernel_cross(const KernelFamily& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             bool drop_constant = false);

enum class Activation { Identity, Sign, Erf, Relu };
Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);
double apply_activation(Activation a, double x);

// sigma(x F / sqrt(d)) / sqrt(p) for the rows x of `inputs`; F is d x p.
Eigen::MatrixXd rf_features(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& F, Activation act);

// One training run at one lambda.
struct EmpiricalPoint {
    double e_gen = 0.5;
    double e_mem = 0.0;
    bool converged = true;
    std::string status = "ok";
};

struct EmpiricalResult {
    double e_gen_hat = 0.0;
    double e_mem_hat = 0.0;
    double stderr_gen = 0.0;
    double stderr_mem = 0.0;
    int n_repeats = 0;
    int n_failed = 0;
};

EmpiricalResult aggregate(const std::vector<EmpiricalPoint>& runs);

struct SvmConfig {
    double tol = 1e-6;  // relative duality gap
    long max_sweeps = 20000;
};

struct SvmStats {
    long sweeps = 0;
    double rel_gap = 0.0;
    bool converged = false;
};

// Dual coordinate ascent (no bias) for min sum hinge(y_i f_i) + lambda/2 c^T G c with
// f = G c. `a` holds the box-constrained dual in [0, 1/lambda] and is used as a warm
// start; on exit c = a .* y.
SvmStats svm_dual_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& y, double lambda, Eigen::VectorXd& a,
                        const SvmConfig& cfg = {});

// Solutions of (G + lambda_k I) c_k = y, one column per lambda. Conjugate gradients
// share one Gram product per iteration across all shifts; columns that fail to reach
// the tolerance are solved directly (Cholesky, else minimum norm).
struct KrrSolveStats {
    int cg_iterations = 0;
    std::vector<std::string> status;  // "ok", "direct" or "pinv"
};
Eigen::MatrixXd krr_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& y, const std::vector<double>& lambdas,
                          KrrSolveStats* stats = nullptr, double tol = 1e-11, int max_iter = 400);

// Fitted coefficients c (f = G c) for each lambda; lambda = 0 means interpolation.
std::vector<EmpiricalPoint> fit_and_score(Loss loss, const Eigen::MatrixXd& G, const Eigen::MatrixXd& G_test,
                                          const RafDataset& data, const TestSet& test,
                                          const std::vector<double>& lambdas, const SvmConfig& svm = {});

std::vector<EmpiricalPoint> empirical_krr(const RafDataset& data, const TestSet& test, const KernelFamily& k,
                                          const std::vector<double>& lambdas, bool drop_constant = false);
std::vector<EmpiricalPoint> empirical_svm(const RafDataset& data, const TestSet& test, const KernelFamily& k,
                                          const std::vector<double>& lambdas, const SvmConfig& svm = {},
                                          bool drop_constant = false);
std::vector<EmpiricalPoint> empirical_rf(const RafDataset& data, const TestSet& test, int width_p, Activation act,
                                         Loss loss, const std::vector<double>& lambdas, std::uint64_t seed_features,
                                         const SvmConfig& svm = {});

enum class Model { Kernel, RandomFeatures };

struct McConfig {
    Loss loss = Loss::Square;
    Model model = Model::Kernel;
    KernelFamily kernel{KernelTag::Relu};
    bool drop_constant = true;  // train on K - K(0)
    Activation activation = Activation::Relu;
    double kappa = 1.0;
    double alpha = 2.0;
    double eps = 0.1;
    int d = 200;
    std::vector<double> lambdas{1.0};
    int repeats = 5;
    std::uint64_t seed = 1;
    std::uint64_t seed_features = 2;
    int n_test = 2000;
    int workers = 1;
    SvmConfig svm{};
};

void validate(const McConfig& cfg);

struct McOutput {
    std::vector<EmpiricalResult> results;          // per lambda
    std::vector<std::vector<EmpiricalPoint>> runs;  // [lambda][repeat]
};

// Repeats run on `workers` threads; each repeat owns its data, features and solver state.
McOutput run_mc(const McConfig& cfg);

// Worker count from RAF_WORKERS, else the hardware concurrency (at least 1).
int default_workers();

}  // namespace raf
