#include "raf/commands.hpp"

#include "raf/bayes.hpp"
#include "raf/closed_forms.hpp"
#include "raf/errors.hpp"
#include "raf/montecarlo.hpp"
#include "raf/random_features.hpp"
#include "raf/tuning.hpp"

#include "json.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace raf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs f(i) for i < n on a bounded pool; results are stored by index by the caller.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(default_workers()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

CsvRow failed_row(double sweep_value, Loss loss, double alpha, double eps, double mu1, double mustar, double lambda,
                  const std::string& why) {
    CsvRow r;
    r.sweep_value = sweep_value;
    r.alpha = alpha;
    r.eps = eps;
    r.mu1 = mu1;
    r.mustar = mustar;
    r.lambda = lambda;
    r.loss = loss_name(loss);
    r.m = r.q = r.V = r.e_gen = r.e_mem = kNaN;
    r.status = "error: " + why;
    r.failed = true;
    return r;
}

// invalid_argument is a configuration problem and propagates; anything else is a
// failed point.
template <class F>
CsvRow guarded(F&& make, double sweep_value, Loss loss, double alpha, double eps, double mu1, double mustar,
               double lambda) {
    try {
        return make();
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception& e) {
        return failed_row(sweep_value, loss, alpha, eps, mu1, mustar, lambda, e.what());
    }
}

CsvRow bo_row(double sweep_value, double alpha, double eps) {
    const BoSolution s = solve_bo(alpha, eps);
    CsvRow r;
    r.sweep_value = sweep_value;
    r.alpha = alpha;
    r.eps = eps;
    r.mu1 = r.mustar = r.lambda = kNaN;
    r.loss = "bayes";
    r.m = s.q_b;
    r.q = s.q_b;
    r.V = kNaN;
    r.e_gen = bo_gen_error(s.q_b);
    r.e_mem = kNaN;
    r.failed = !s.converged;
    r.status = s.converged ? "ok" : "not-converged";
    return r;
}

std::vector<CsvRow> sweep_rows(const RunConfig& c) {
    const std::string& cmd = c.command;
    if (cmd == "cross-validate") {
        return {guarded(
            [&] {
                const CvResult cv = cross_validate_lambda(c.loss, c.alpha, c.eps, c.mu1, c.mustar);
                CsvRow r = theory_row(cv.lambda, c.loss, c.alpha, c.eps, c.mu1, c.mustar, cv.lambda, cv.sol);
                if (cv.zero_plus && !r.failed) r.status = "zero-plus";
                return r;
            },
            kNaN, c.loss, c.alpha, c.eps, c.mu1, c.mustar, kNaN)};
    }
    std::vector<double> grid = c.sweep.empty() ? std::vector<double>{kNaN} : grid_values(c);
    std::vector<CsvRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double v = grid[i];
        double alpha = c.alpha, eps = c.eps, mu1 = c.mu1, mustar = c.mustar, lambda = c.lambda, kappa = c.kappa;
        if (c.sweep == "alpha") alpha = v;
        if (c.sweep == "eps") eps = v;
        if (c.sweep == "lambda") lambda = v;
        if (c.sweep == "kappa") kappa = v;
        if (c.sweep == "angle") {
            mu1 = std::sin(v);
            mustar = std::cos(v);
        }
        const double sv = c.sweep.empty() ? lambda : v;
        if (cmd == "bo") {
            rows[i] = guarded([&] { return bo_row(c.sweep.empty() ? alpha : v, alpha, eps); }, sv, c.loss, alpha,
                              eps, kNaN, kNaN, kNaN);
            rows[i].loss = "bayes";
            return;
        }
        if (cmd == "sweep-angle" && c.objective != "fixed") {
            rows[i] = guarded(
                [&] {
                    if (c.objective == "ridgeless") {
                        const StateSolution s = ridgeless_solution(c.loss, alpha, eps, mu1, mustar);
                        return theory_row(v, c.loss, alpha, eps, mu1, mustar, 0.0, s);
                    }
                    const CvResult cv = cross_validate_lambda(c.loss, alpha, eps, mu1, mustar);
                    CsvRow r = theory_row(v, c.loss, alpha, eps, mu1, mustar, cv.lambda, cv.sol);
                    if (cv.zero_plus && !r.failed) r.status = "zero-plus";
                    return r;
                },
                v, c.loss, alpha, eps, mu1, mustar, kNaN);
            return;
        }
        rows[i] = guarded(
            [&] {
                const StateSolution s = theory_point(c.loss, alpha, eps, mu1, mustar, lambda, kappa);
                return theory_row(sv, c.loss, alpha, eps, mu1, mustar, lambda, s);
            },
            sv, c.loss, alpha, eps, mu1, mustar, lambda);
    });
    if (cmd == "sweep-lambda" && c.endpoints && c.kappa == 0.0) {
        CsvRow zero = guarded(
            [&] {
                const StateSolution s = ridgeless_solution(c.loss, c.alpha, c.eps, c.mu1, c.mustar);
                CsvRow r = theory_row(0.0, c.loss, c.alpha, c.eps, c.mu1, c.mustar, 0.0, s);
                if (!r.failed) r.status = "ridgeless";
                return r;
            },
            0.0, c.loss, c.alpha, c.eps, c.mu1, c.mustar, 0.0);
        CsvRow inf = guarded(
            [&] {
                const ErrorPair e = infinite_lambda_errors(c.alpha, c.eps, c.mu1, c.mustar);
                CsvRow r = failed_row(INFINITY, c.loss, c.alpha, c.eps, c.mu1, c.mustar, INFINITY, "");
                r.e_gen = e.e_gen;
                r.e_mem = e.e_mem;
                r.failed = false;
                r.status = "infinite-lambda";
                return r;
            },
            INFINITY, c.loss, c.alpha, c.eps, c.mu1, c.mustar, INFINITY);
        rows.insert(rows.begin(), zero);
        rows.push_back(inf);
    }
    return rows;
}

std::vector<CsvRow> mc_rows(const RunConfig& c) {
    McConfig mc;
    mc.loss = c.loss;
    mc.model = c.model == "rf" ? Model::RandomFeatures : Model::Kernel;
    if (c.kernel) mc.kernel = *c.kernel;
    mc.drop_constant = c.drop_constant;
    mc.activation = parse_activation(c.activation);
    mc.kappa = c.kappa;
    mc.alpha = c.alpha;
    mc.eps = c.eps;
    mc.d = c.d;
    mc.lambdas = c.lambda_grid;
    mc.repeats = c.repeats;
    mc.seed = c.seed;
    mc.seed_features = c.seed_features;
    mc.n_test = c.n_test;
    mc.workers = default_workers();
    validate(mc);

    double mu1 = c.mu1, mustar = c.mustar;
    if (mc.model == Model::RandomFeatures) {
        const Activation act = mc.activation;
        const KernelGeometry g = mu_from_activation([act](double x) { return apply_activation(act, x); });
        mu1 = g.mu1;
        mustar = g.mu_star;
    }
    const double kappa = mc.model == Model::RandomFeatures ? c.kappa : 0.0;

    std::vector<CsvRow> theory(c.theory ? mc.lambdas.size() : 0);
    parallel_for(theory.size(), [&](std::size_t k) {
        const double l = mc.lambdas[k];
        theory[k] = guarded(
            [&] {
                const StateSolution s = theory_point(c.loss, c.alpha, c.eps, mu1, mustar, l, kappa);
                return theory_row(l, c.loss, c.alpha, c.eps, mu1, mustar, l, s);
            },
            l, c.loss, c.alpha, c.eps, mu1, mustar, l);
    });

    const McOutput out = run_mc(mc);
    std::vector<CsvRow> rows;
    for (std::size_t k = 0; k < mc.lambdas.size(); ++k) {
        if (c.theory) rows.push_back(theory[k]);
        const EmpiricalResult& e = out.results[k];
        CsvRow r;
        r.sweep_value = mc.lambdas[k];
        r.alpha = c.alpha;
        r.eps = c.eps;
        r.mu1 = mu1;
        r.mustar = mustar;
        r.lambda = mc.lambdas[k];
        r.loss = loss_name(c.loss);
        r.m = r.q = r.V = kNaN;
        r.e_gen = e.e_gen_hat;
        r.e_mem = e.e_mem_hat;
        r.source = "mc";
        r.stderr_gen = e.stderr_gen;
        r.stderr_mem = e.stderr_mem;
        r.failed = e.n_failed > 0;
        r.status = e.n_failed > 0 ? "failed-repeats=" + std::to_string(e.n_failed) : "ok";
        rows.push_back(r);
    }
    return rows;
}

nlohmann::json rate_json(const RunConfig& c) {
    const std::vector<double> alphas = grid_values(c);
    std::vector<double> errs(alphas.size());
    std::vector<int> ok(alphas.size(), 1);
    const bool bo = c.command == "bo-rate" || c.estimator == "bo";
    parallel_for(alphas.size(), [&](std::size_t i) {
        if (bo) {
            const BoSolution s = solve_bo(alphas[i], c.eps);
            errs[i] = bo_gen_error(s.q_b);
            ok[i] = s.converged;
        } else {
            const StateSolution s = theory_point(c.loss, alphas[i], c.eps, c.mu1, c.mustar, c.lambda);
            errs[i] = s.e_gen;
            ok[i] = s.converged;
        }
    });
    nlohmann::json j;
    j["eps"] = c.eps;
    j["estimator"] = bo ? "bo" : "erm";
    if (!bo) {
        j["loss"] = loss_name(c.loss);
        j["mu1"] = c.mu1;
        j["mustar"] = c.mustar;
        j["lambda"] = c.lambda;
    }
    nlohmann::json pts = nlohmann::json::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        pts.push_back({{"alpha", alphas[i]}, {"e_gen", errs[i]}, {"converged", ok[i] != 0}});
        all_ok = all_ok && ok[i];
    }
    j["points"] = pts;
    const RateFit fit = fit_rate(alphas, errs);
    j["exponent"] = fit.exponent;
    j["coefficient"] = fit.coefficient;
    j["r2"] = fit.r2;
    // leading prefactor E alpha^{-p} read at the top of the window
    auto prefactor = [&](double p) { return errs.back() * std::pow(alphas.back(), -p); };
    if (bo) {
        j["predicted_exponent"] = -1.0;
        j["predicted_coefficient"] = bo_rate_constant(c.eps);
        j["prefactor_at_max"] = prefactor(-1.0);
    } else if (c.loss == Loss::Square) {
        j["predicted_exponent"] = -0.5;
        j["predicted_coefficient"] = krr_large_alpha_coeff(c.eps);
        j["prefactor_at_max"] = prefactor(-0.5);
    }
    j["converged"] = all_ok;
    return j;
}

nlohmann::json threshold_json(const RunConfig& c) {
    const std::vector<double> eps = c.sweep.empty() ? std::vector<double>{c.eps} : grid_values(c);
    nlohmann::json arr = nlohmann::json::array();
    for (double e : eps) {
        const double a = hinge_interp_threshold(e);
        nlohmann::json row{{"eps", e}};
        row["alpha_c"] = std::isfinite(a) ? nlohmann::json(a) : nlohmann::json("inf");
        if (e > 0.0 && std::isfinite(a))
            row["scaled"] = a * std::cbrt(3.0 * e / (2.0 * std::numbers::pi * std::numbers::pi));
        arr.push_back(row);
    }
    return arr;
}

std::string kernels_table(const RunConfig& c) {
    std::vector<KernelFamily> fams{{KernelTag::Linear},
                                   {KernelTag::Sign},
                                   {KernelTag::Erf},
                                   {KernelTag::Relu},
                                   {KernelTag::Polynomial, 1.0, 2.0},
                                   {KernelTag::Exponential, 1.0},
                                   {KernelTag::SphericalGaussian, 1.0},
                                   {KernelTag::Geometric, 0.5}};
    std::ostringstream os;
    os << "kernel,p1,p2,mu0,mu1,mustar,gamma,note\n";
    auto line = [&](const KernelFamily& k, const std::string& note) {
        const KernelGeometry g = family_geometry(k);
        os << kernel_name(k.tag) << ',' << format_number(k.p1) << ',' << format_number(k.p2) << ','
           << format_number(g.mu0) << ',' << format_number(g.mu1) << ',' << format_number(g.mu_star) << ','
           << format_number(angle(g)) << ',' << note << '\n';
    };
    for (const auto& k : fams) line(k, "table");
    if (c.eps > 0.0 && c.eps < 1.0) {
        for (KernelTag t : {KernelTag::Polynomial, KernelTag::Exponential, KernelTag::SphericalGaussian,
                            KernelTag::Geometric}) {
            try {
                const double p = match_family_to_angle(t, c.eps);
                KernelFamily k{t, p, t == KernelTag::Polynomial ? 2.0 : 0.0};
                line(k, "matched-mem-angle");
            } catch (const std::exception&) {
                os << kernel_name(t) << ",nan,nan,nan,nan,nan,nan,unreachable\n";
            }
        }
    }
    return os.str();
}

int emit(const RunConfig& c, const std::string& body, std::ostream& out, std::ostream& err) {
    if (c.output == "-") {
        out << body;
        return kExitOk;
    }
    // written in one piece so a failed run leaves no partial file
    std::ofstream f(c.output, std::ios::binary | std::ios::trunc);
    if (!f) {
        err << "io-error: cannot write '" << c.output << "'\n";
        return kExitConfig;
    }
    f << body;
    f.close();
    if (!f) {
        err << "io-error: write to '" << c.output << "' failed\n";
        return kExitConfig;
    }
    if (!c.gnuplot.empty()) {
        std::ofstream g(c.gnuplot, std::ios::trunc);
        if (!g) {
            err << "io-error: cannot write '" << c.gnuplot << "'\n";
            return kExitConfig;
        }
        g << gnuplot_stub(c.output, c.command);
    }
    return kExitOk;
}

}  // namespace

StateSolution theory_point(Loss loss, double alpha, double eps, double mu1, double mustar, double lambda,
                           double kappa) {
    if (kappa > 0.0) {
        if (!(lambda > 0.0)) throw std::invalid_argument("random features need lambda > 0");
        return solve_rf_state_eqs({{loss, alpha, eps, mu1, mustar, lambda}, kappa}).sol;
    }
    return solve_at(loss, alpha, eps, mu1, mustar, lambda);
}

CsvRow theory_row(double sweep_value, Loss loss, double alpha, double eps, double mu1, double mustar, double lambda,
                  const StateSolution& sol) {
    CsvRow r;
    r.sweep_value = sweep_value;
    r.alpha = alpha;
    r.eps = eps;
    r.mu1 = mu1;
    r.mustar = mustar;
    r.lambda = lambda;
    r.loss = loss_name(loss);
    r.m = sol.op.m;
    r.q = sol.op.q;
    r.V = sol.op.V;
    r.e_gen = sol.e_gen;
    r.e_mem = sol.e_mem;
    r.failed = !sol.converged;
    r.status = sol.converged ? sol.status : (sol.status == "ok" ? "not-converged" : sol.status);
    return r;
}

std::vector<CsvRow> run_sweep(const RunConfig& cfg) { return sweep_rows(cfg); }

std::string gnuplot_stub(const std::string& csv_path, const std::string& title) {
    std::ostringstream os;
    os << "# columns: 1 sweep_value, 11 e_gen, 12 e_mem, 13 source\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set title '" << title << "'\n"
       << "set xlabel 'E_mem'\nset ylabel 'E_gen'\n"
       << "plot '" << csv_path << "' using 12:(strcol(13) eq 'theory' ? $11 : 1/0) with lines title 'theory', \\\n"
       << "     '' using 12:(strcol(13) eq 'mc' ? $11 : 1/0):15:14 with xyerrorbars title 'mc'\n";
    return os.str();
}

int run_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        std::string body;
        bool failed = false;
        if (c.command == "kernels") {
            body = kernels_table(c);
        } else if (c.command == "threshold") {
            body = threshold_json(c).dump(2) + "\n";
        } else if (c.command == "rate" || c.command == "bo-rate") {
            const nlohmann::json j = rate_json(c);
            failed = !j["converged"].get<bool>();
            body = j.dump(2) + "\n";
        } else {
            const std::vector<CsvRow> rows = c.command == "mc" ? mc_rows(c) : sweep_rows(c);
            std::ostringstream os;
            write_csv(os, rows);
            body = os.str();
            for (const auto& r : rows) failed = failed || r.failed;
        }
        const int rc = emit(c, body, out, err);
        if (rc != kExitOk) return rc;
        if (failed) {
            err << "warning: some points did not converge (see the status column)\n";
            return kExitNoConvergence;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config-error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "config-error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "solver-error: " << e.what() << '\n';
        return kExitNoConvergence;
    }
}

int run_cli(const std::string& command, const std::string& config_path, const ConfigMap& flags, std::ostream& out,
            std::ostream& err) {
    RunConfig cfg;
    try {
        ConfigMap m = config_path.empty() ? ConfigMap{} : read_config_file(config_path);
        for (const auto& [k, v] : flags) m[k] = v;
        cfg = build_run_config(command, m);
    } catch (const ConfigError& e) {
        err << "config-error: " << e.what() << '\n';
        return kExitConfig;
    }
    return run_command(cfg, out, err);
}

}  // namespace raf
