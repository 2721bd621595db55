#include "raf/montecarlo.hpp"

#include "raf/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace raf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RafDataset generate_raf_dataset(int n, int d, double eps, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("generate_raf_dataset: n and d must be >= 1");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("generate_raf_dataset: eps must lie in [0,1]");
    const Rng base(seed, 0);
    RafDataset data;
    data.seed = seed;
    data.teacher.resize(d);
    Rng rt = base.split(1);
    for (int i = 0; i < d; ++i) data.teacher(i) = rt.normal();
    data.inputs.resize(n, d);
    Rng rx = base.split(2);
    for (int mu = 0; mu < n; ++mu)
        for (int i = 0; i < d; ++i) data.inputs(mu, i) = rx.normal();
    data.labels.resize(n);
    Rng ry = base.split(3);
    const VectorXd field = data.inputs * data.teacher / std::sqrt(static_cast<double>(d));
    for (int mu = 0; mu < n; ++mu) {
        if (ry.bernoulli(eps)) {
            data.fact_index.push_back(mu);
            data.labels(mu) = ry.rademacher();
        } else {
            data.rule_index.push_back(mu);
            data.labels(mu) = sign_pm(field(mu));
        }
    }
    return data;
}

TestSet generate_test_set(const VectorXd& teacher, int n_test, std::uint64_t seed) {
    if (n_test < 1) throw std::invalid_argument("generate_test_set: n_test must be >= 1");
    const auto d = static_cast<int>(teacher.size());
    Rng r(seed, 7);
    TestSet t;
    t.inputs.resize(n_test, d);
    for (int mu = 0; mu < n_test; ++mu)
        for (int i = 0; i < d; ++i) t.inputs(mu, i) = r.normal();
    const VectorXd field = t.inputs * teacher;
    t.labels = field.unaryExpr([](double v) { return sign_pm(v); });
    return t;
}

namespace {

MatrixXd unit_rows(const MatrixXd& x) {
    MatrixXd out = x;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double nrm = out.row(i).norm();
        if (nrm > 0.0) out.row(i) /= nrm;
    }
    return out;
}

double error_rate(const VectorXd& f, const VectorXd& y, const std::vector<int>* subset) {
    if (subset) {
        if (subset->empty()) return 0.0;
        long wrong = 0;
        for (int i : *subset) wrong += sign_pm(f(i)) != y(i);
        return static_cast<double>(wrong) / static_cast<double>(subset->size());
    }
    long wrong = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) wrong += sign_pm(f(i)) != y(i);
    return static_cast<double>(wrong) / static_cast<double>(f.size());
}

EmpiricalPoint score(const MatrixXd& G, const MatrixXd& G_test, const VectorXd& c, const RafDataset& data,
                     const TestSet& test) {
    EmpiricalPoint p;
    const VectorXd f_train = G * c;
    const VectorXd f_test = G_test * c;
    p.e_mem = error_rate(f_train, data.labels, &data.fact_index);
    p.e_gen = error_rate(f_test, test.labels, nullptr);
    return p;
}

}  // namespace

MatrixXd kernel_gram(const KernelFamily& k, const MatrixXd& x, bool drop_constant) {
    const MatrixXd u = unit_rows(x);
    const Eigen::Index n = u.rows();
    MatrixXd g = MatrixXd::Zero(n, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(u);
    const double k0 = kernel_value(k, 0.0);
    const double shift = drop_constant ? k0 : 0.0;
    const double diag = kernel_value(k, 1.0) - shift;
    for (Eigen::Index j = 0; j < n; ++j) {
        g(j, j) = x.row(j).squaredNorm() > 0.0 ? diag : k0 - shift;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = kernel_value(k, g(i, j)) - shift;
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

MatrixXd kernel_cross(const KernelFamily& k, const MatrixXd& a, const MatrixXd& b, bool drop_constant) {
    MatrixXd g = unit_rows(a) * unit_rows(b).transpose();
    const double shift = drop_constant ? kernel_value(k, 0.0) : 0.0;
    return g.unaryExpr([&k, shift](double r) { return kernel_value(k, r) - shift; });
}

Activation parse_activation(const std::string& name) {
    if (name == "identity" || name == "linear") return Activation::Identity;
    if (name == "sign") return Activation::Sign;
    if (name == "erf") return Activation::Erf;
    if (name == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Sign: return "sign";
        case Activation::Erf: return "erf";
        case Activation::Relu: return "relu";
    }
    return "unknown";
}

double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Sign: return sign_pm(x);
        case Activation::Erf: return std::erf(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

MatrixXd rf_features(const MatrixXd& inputs, const MatrixXd& F, Activation act) {
    if (inputs.cols() != F.rows()) throw std::invalid_argument("rf_features: dimension mismatch");
    const double d = static_cast<double>(F.rows());
    const double p = static_cast<double>(F.cols());
    MatrixXd z = inputs * F / std::sqrt(d);
    const double scale = 1.0 / std::sqrt(p);
    return z.unaryExpr([act, scale](double v) { return scale * apply_activation(act, v); });
}

EmpiricalResult aggregate(const std::vector<EmpiricalPoint>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    EmpiricalResult r;
    r.n_repeats = static_cast<int>(runs.size());
    double sg = 0.0, sm = 0.0;
    for (const auto& p : runs) {
        sg += p.e_gen;
        sm += p.e_mem;
        r.n_failed += !p.converged;
    }
    const double n = static_cast<double>(runs.size());
    r.e_gen_hat = sg / n;
    r.e_mem_hat = sm / n;
    if (runs.size() >= 2) {
        double vg = 0.0, vm = 0.0;
        for (const auto& p : runs) {
            vg += (p.e_gen - r.e_gen_hat) * (p.e_gen - r.e_gen_hat);
            vm += (p.e_mem - r.e_mem_hat) * (p.e_mem - r.e_mem_hat);
        }
        r.stderr_gen = std::sqrt(vg / (n - 1.0) / n);
        r.stderr_mem = std::sqrt(vm / (n - 1.0) / n);
    }
    return r;
}

SvmStats svm_dual_solve(const MatrixXd& G, const VectorXd& y, double lambda, VectorXd& a, const SvmConfig& cfg) {
    if (!(lambda > 0.0)) throw std::invalid_argument("svm: lambda must be positive");
    const Eigen::Index n = G.rows();
    const double C = 1.0 / lambda;
    if (a.size() != n) a = VectorXd::Zero(n);
    a = a.cwiseMax(0.0).cwiseMin(C);
    // f = G (a .* y): decision values on the training points
    VectorXd f = G * a.cwiseProduct(y);
    SvmStats st;
    for (st.sweeps = 1; st.sweeps <= cfg.max_sweeps; ++st.sweeps) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double gi = 1.0 - y(i) * f(i);
            if ((a(i) <= 0.0 && gi <= 0.0) || (a(i) >= C && gi >= 0.0)) continue;
            const double qii = G(i, i);
            if (!(qii > 0.0)) continue;
            const double next = std::clamp(a(i) + gi / qii, 0.0, C);
            const double delta = next - a(i);
            if (delta == 0.0) continue;
            a(i) = next;
            f.noalias() += (delta * y(i)) * G.col(i);
        }
        if (st.sweeps % 64 == 0) f.noalias() = G * a.cwiseProduct(y);
        double quad = 0.0, hinge = 0.0, lin = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = y(i) * f(i);
            quad += a(i) * m;
            hinge += std::max(0.0, 1.0 - m);
            lin += a(i);
        }
        const double primal = 0.5 * quad + C * hinge;
        const double dual = lin - 0.5 * quad;
        st.rel_gap = primal > 0.0 ? (primal - dual) / primal : 0.0;
        if (st.rel_gap <= cfg.tol) {
            st.converged = true;
            return st;
        }
    }
    st.sweeps = cfg.max_sweeps;
    return st;
}

MatrixXd krr_solve(const MatrixXd& G, const VectorXd& y, const std::vector<double>& lambdas, KrrSolveStats* stats,
                   double tol, int max_iter) {
    const Eigen::Index n = G.rows();
    const auto L = static_cast<Eigen::Index>(lambdas.size());
    for (double l : lambdas)
        if (!(l >= 0.0)) throw std::invalid_argument("krr: lambda must be >= 0");
    MatrixXd c = MatrixXd::Zero(n, L);
    MatrixXd r = y.replicate(1, L);
    MatrixXd p = r;
    MatrixXd gp(n, L);
    VectorXd rr = r.colwise().squaredNorm().transpose();
    const double stop = tol * tol * y.squaredNorm();
    std::vector<bool> done(static_cast<std::size_t>(L), false);
    int it = 0;
    for (; it < max_iter; ++it) {
        bool all = true;
        for (Eigen::Index k = 0; k < L; ++k) {
            done[static_cast<std::size_t>(k)] = rr(k) <= stop;
            all = all && done[static_cast<std::size_t>(k)];
        }
        if (all) break;
        gp.noalias() = G * p;
        for (Eigen::Index k = 0; k < L; ++k) {
            if (done[static_cast<std::size_t>(k)]) continue;
            gp.col(k) += lambdas[static_cast<std::size_t>(k)] * p.col(k);
            const double pap = p.col(k).dot(gp.col(k));
            if (!(pap > 0.0)) {
                rr(k) = std::numeric_limits<double>::infinity();
                done[static_cast<std::size_t>(k)] = true;
                p.col(k).setZero();
                continue;
            }
            const double step = rr(k) / pap;
            c.col(k) += step * p.col(k);
            r.col(k) -= step * gp.col(k);
            const double next = r.col(k).squaredNorm();
            p.col(k) = r.col(k) + (next / rr(k)) * p.col(k);
            rr(k) = next;
        }
    }
    std::vector<std::string> status(static_cast<std::size_t>(L), "ok");
    for (Eigen::Index k = 0; k < L; ++k) {
        // recheck against the true residual
        const double lam = lambdas[static_cast<std::size_t>(k)];
        const VectorXd res = y - G * c.col(k) - lam * c.col(k);
        if (std::isfinite(rr(k)) && res.squaredNorm() <= 4.0 * stop) continue;
        MatrixXd h = G;
        h.diagonal().array() += lam;
        Eigen::LLT<Eigen::Ref<MatrixXd>> llt(h);
        if (llt.info() == Eigen::Success) {
            c.col(k) = llt.solve(y);
            status[static_cast<std::size_t>(k)] = "direct";
        } else {
            h = G;
            h.diagonal().array() += lam;
            c.col(k) = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(h).solve(y);
            status[static_cast<std::size_t>(k)] = "pinv";
        }
    }
    if (stats) {
        stats->cg_iterations = it;
        stats->status = std::move(status);
    }
    return c;
}

std::vector<EmpiricalPoint> fit_and_score(Loss loss, const MatrixXd& G, const MatrixXd& G_test,
                                          const RafDataset& data, const TestSet& test,
                                          const std::vector<double>& lambdas, const SvmConfig& svm) {
    std::vector<EmpiricalPoint> out(lambdas.size());
    const VectorXd& y = data.labels;
    if (loss == Loss::Square) {
        KrrSolveStats st;
        const MatrixXd c = krr_solve(G, y, lambdas, &st);
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            out[k] = score(G, G_test, c.col(static_cast<Eigen::Index>(k)), data, test);
            out[k].status = st.status[k];
        }
        return out;
    }
    // hinge: increasing C = 1/lambda so each solve warm-starts from the previous dual
    std::vector<std::size_t> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return lambdas[i] > lambdas[j]; });
    VectorXd a = VectorXd::Zero(G.rows());
    for (std::size_t k : order) {
        const SvmStats st = svm_dual_solve(G, y, lambdas[k], a, svm);
        const VectorXd c = a.cwiseProduct(y);
        out[k] = score(G, G_test, c, data, test);
        out[k].converged = st.converged;
        out[k].status = st.converged ? "ok" : "svm-stalled";
    }
    return out;
}

std::vector<EmpiricalPoint> empirical_krr(const RafDataset& data, const TestSet& test, const KernelFamily& k,
                                          const std::vector<double>& lambdas, bool drop_constant) {
    validate(k);
    const MatrixXd G = kernel_gram(k, data.inputs, drop_constant);
    const MatrixXd Gt = kernel_cross(k, test.inputs, data.inputs, drop_constant);
    return fit_and_score(Loss::Square, G, Gt, data, test, lambdas);
}

std::vector<EmpiricalPoint> empirical_svm(const RafDataset& data, const TestSet& test, const KernelFamily& k,
                                          const std::vector<double>& lambdas, const SvmConfig& svm,
                                          bool drop_constant) {
    validate(k);
    const MatrixXd G = kernel_gram(k, data.inputs, drop_constant);
    const MatrixXd Gt = kernel_cross(k, test.inputs, data.inputs, drop_constant);
    return fit_and_score(Loss::Hinge, G, Gt, data, test, lambdas, svm);
}

std::vector<EmpiricalPoint> empirical_rf(const RafDataset& data, const TestSet& test, int width_p, Activation act,
                                         Loss loss, const std::vector<double>& lambdas, std::uint64_t seed_features,
                                         const SvmConfig& svm) {
    if (width_p < 1) throw std::invalid_argument("empirical_rf: width must be >= 1");
    const auto d = data.inputs.cols();
    Rng r(seed_features, 11);
    MatrixXd F(d, width_p);
    for (Eigen::Index i = 0; i < d; ++i)
        for (int j = 0; j < width_p; ++j) F(i, j) = r.normal();
    const MatrixXd phi = rf_features(data.inputs, F, act);
    const MatrixXd phi_t = rf_features(test.inputs, F, act);
    MatrixXd G = MatrixXd::Zero(phi.rows(), phi.rows());
    G.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    const MatrixXd Gt = phi_t * phi.transpose();
    return fit_and_score(loss, G, Gt, data, test, lambdas, svm);
}

void validate(const McConfig& cfg) {
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("mc: alpha must be positive");
    if (!(cfg.eps >= 0.0 && cfg.eps <= 1.0)) throw std::invalid_argument("mc: eps must lie in [0,1]");
    if (cfg.d < 1) throw std::invalid_argument("mc: d must be >= 1");
    if (cfg.repeats < 1) throw std::invalid_argument("mc: repeats must be >= 1");
    if (cfg.n_test < 1) throw std::invalid_argument("mc: n_test must be >= 1");
    if (cfg.lambdas.empty()) throw std::invalid_argument("mc: empty lambda grid");
    for (double l : cfg.lambdas) {
        if (cfg.loss == Loss::Hinge && !(l > 0.0)) throw std::invalid_argument("mc: hinge needs lambda > 0");
        if (!(l >= 0.0)) throw std::invalid_argument("mc: lambda must be >= 0");
    }
    if (cfg.model == Model::RandomFeatures && !(cfg.kappa > 0.0))
        throw std::invalid_argument("mc: kappa must be positive");
    if (cfg.model == Model::Kernel) validate(cfg.kernel);
}

McOutput run_mc(const McConfig& cfg) {
    validate(cfg);
    const int n = std::max(1, static_cast<int>(std::lround(cfg.alpha * cfg.d)));
    const std::size_t L = cfg.lambdas.size();
    std::vector<std::vector<EmpiricalPoint>> by_repeat(static_cast<std::size_t>(cfg.repeats));

    auto one = [&](int r) {
        const std::uint64_t rs = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(r)));
        try {
            const RafDataset data = generate_raf_dataset(n, cfg.d, cfg.eps, rs);
            const TestSet test = generate_test_set(data.teacher, cfg.n_test, splitmix64(rs));
            if (cfg.model == Model::Kernel) {
                const MatrixXd G = kernel_gram(cfg.kernel, data.inputs, cfg.drop_constant);
                const MatrixXd Gt = kernel_cross(cfg.kernel, test.inputs, data.inputs, cfg.drop_constant);
                return fit_and_score(cfg.loss, G, Gt, data, test, cfg.lambdas, cfg.svm);
            }
            const int p = std::max(1, static_cast<int>(std::lround(cfg.kappa * cfg.d)));
            const std::uint64_t fs = splitmix64(cfg.seed_features ^ splitmix64(static_cast<std::uint64_t>(r)));
            return empirical_rf(data, test, p, cfg.activation, cfg.loss, cfg.lambdas, fs, cfg.svm);
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            std::vector<EmpiricalPoint> failed(L);
            for (auto& p : failed) {
                p.converged = false;
                p.status = std::string("error: ") + e.what();
            }
            return failed;
        }
    };

    const int workers = std::max(1, std::min(cfg.workers, cfg.repeats));
    if (workers == 1) {
        for (int r = 0; r < cfg.repeats; ++r) by_repeat[static_cast<std::size_t>(r)] = one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int r = next++; r < cfg.repeats; r = next++) by_repeat[static_cast<std::size_t>(r)] = one(r);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    McOutput out;
    out.runs.assign(L, {});
    for (std::size_t k = 0; k < L; ++k) {
        for (const auto& rep : by_repeat) out.runs[k].push_back(rep[k]);
        out.results.push_back(aggregate(out.runs[k]));
    }
    return out;
}

int default_workers() {
    if (const char* env = std::getenv("RAF_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 4u));
}

}  // namespace raf
