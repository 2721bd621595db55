#pragma once

#include "raf/state_eqs.hpp"

namespace raf {

struct RfSpec {
    ErmSpec erm;
    double kappa = 1.0;  // p / d
};

struct RfSolution {
    StateSolution sol;  // composite m = mu1 m_s, q = mu1^2 q_s + mu_star^2 q_w, V = mu1^2 V_s + mu_star^2 V_w
    double m_s = 0.0;
    double q_s = 0.0;
    double V_s = 0.0;
    double q_w = 0.0;
    double V_w = 0.0;
    double m_hat_s = 0.0;
    double q_hat_s = 0.0;
    double V_hat_s = 0.0;
    double q_hat_w = 0.0;
    double V_hat_w = 0.0;
};

// Stieltjes transform of the Marchenko-Pastur law of F F^T / p with aspect ratio
// gamma = d / p, for z < 0.
double mp_stieltjes(double z, double gamma);

RfSolution solve_rf_state_eqs(const RfSpec& spec, const SolverConfig& cfg = {});

}  // namespace raf
