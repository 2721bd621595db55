#pragma once

#include <string>
#include <vector>

namespace raf {

enum class Loss { Square, Hinge };

std::string loss_name(Loss loss);
Loss parse_loss(const std::string& name);

// Teacher channel of the rules-and-facts model, averaged over a Gaussian field
// with mean omega and variance tau.
double z_out_star(int y, double omega, double tau, double eps);
double f_out_star(int y, double omega, double tau, double eps);

double prox(Loss loss, int y, double omega, double V);
double f_out(Loss loss, int y, double omega, double V);
double d_f_out_d_omega(Loss loss, int y, double omega, double V);

// Values of omega at which f_out(y, ., V) has kinks, for y = +1 and y = -1 together.
std::vector<double> kink_points(Loss loss, double V);

double gen_error(double m, double q);

// 1/2 erfc(V / sqrt(2q)); valid for both shipped losses.
double mem_error(double q, double V);

// E[ theta(prox(-1, sqrt(q) xi)) + theta(-prox(1, sqrt(q) xi)) ] / 2 by quadrature, with
// sign(0) = +1.
double mem_error_generic(Loss loss, double q, double V);

}  // namespace raf
