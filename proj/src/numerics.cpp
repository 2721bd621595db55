#include "raf/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace raf {

namespace {

struct HermiteEval {
    double pn = 0.0;
    double pn1 = 0.0;
    double log_sum = 0.0;  // log sum_{k<n} p_k(x)^2
};

// Orthonormal probabilists' Hermite recurrence with rescaling so that large
// arguments at high order do not overflow.
HermiteEval hermite_eval(int n, double x) {
    double prev = 0.0;
    double cur = 1.0;
    double sum = 0.0;
    double log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
        sum += cur * cur;
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
        if (std::abs(cur) > 1e100) {
            cur *= 1e-100;
            prev *= 1e-100;
            sum *= 1e-200;
            log_scale += 100.0 * std::log(10.0);
        }
    }
    return {cur, prev, std::log(sum) + 2.0 * log_scale};
}

void legendre_eval(int n, double x, double& p, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

Quadrature gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    Quadrature rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();

    const int half = order / 2;
    for (int i = 0; i < half; ++i) {
        // polish the positive roots, mirror the rest
        double x = ev[order - 1 - i];
        for (int it = 0; it < 20; ++it) {
            const HermiteEval h = hermite_eval(order, x);
            const double dx = h.pn / (std::sqrt(static_cast<double>(order)) * h.pn1);
            x -= dx;
            if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        const double w = std::exp(-hermite_eval(order, x).log_sum);
        rule.nodes[order - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[order - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (order % 2 == 1) {
        rule.nodes[half] = 0.0;
        rule.weights[half] = std::exp(-hermite_eval(order, 0.0).log_sum);
    }
    return rule;
}

Quadrature gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    Quadrature rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double p = 0.0;
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre_eval(order, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre_eval(order, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[order - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[order - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

namespace {

template <Quadrature (*Build)(int)>
const Quadrature& cached(int order) {
    static std::mutex mu;
    static std::map<int, Quadrature> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, Build(order)).first;
    return it->second;
}

}  // namespace

const Quadrature& gauss_hermite_cached(int order) { return cached<&gauss_hermite>(order); }
const Quadrature& gauss_legendre_cached(int order) { return cached<&gauss_legendre>(order); }

double gaussian_expectation(const std::function<double(double)>& f, const Quadrature& rule) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        if (rule.weights[i] == 0.0) continue;
        s += rule.weights[i] * f(rule.nodes[i]);
    }
    return s;
}

namespace {

double gl_panel(const std::function<double(double)>& f, double a, double b, const Quadrature& gl) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * f(c + h * gl.nodes[i]);
    return s * h;
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    double tol, int depth, const Quadrature& gl) {
    const double m = 0.5 * (a + b);
    const double left = gl_panel(f, a, m, gl);
    const double right = gl_panel(f, m, b, gl);
    const double both = left + right;
    // rounding floor: the requested absolute tol may be out of reach for large integrands
    const double floor = 1e-14 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(both - whole) <= std::max(tol, floor)) return both;
    return adaptive_rec(f, a, m, left, 0.5 * tol, depth - 1, gl) +
           adaptive_rec(f, m, b, right, 0.5 * tol, depth - 1, gl);
}

}  // namespace

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int order) {
    if (panels < 1) throw std::invalid_argument("integrate_panels: panels must be >= 1");
    const Quadrature& gl = gauss_legendre_cached(order);
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) s += gl_panel(f, a + p * h, a + (p + 1) * h, gl);
    return s;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
    if (a == b) return 0.0;
    if (a > b) return -integrate_adaptive(f, b, a, tol, max_depth);
    const Quadrature& gl = gauss_legendre_cached(16);
    return adaptive_rec(f, a, b, gl_panel(f, a, b, gl), tol, max_depth, gl);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double erfcx(double x) {
    if (x < 25.0) return std::exp(x * x) * std::erfc(x);
    double k = x;
    for (int n = 60; n >= 1; --n) k = x + 0.5 * n / k;
    return 1.0 / (std::sqrt(std::numbers::pi) * k);
}

double normal_expectation_piecewise(const std::function<double(double)>& f,
                                    std::vector<double> breakpoints, double tol, double cutoff) {
    std::vector<double> pts{-cutoff, cutoff};
    for (double b : breakpoints)
        if (std::isfinite(b) && b > -cutoff && b < cutoff) pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto g = [&](double x) { return f(x) * normal_pdf(x); };
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += integrate_adaptive(g, pts[i], pts[i + 1], tol);
    return s;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                   int max_iter) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_root: need lo < hi");
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw BracketError("bisect_root: no sign change on bracket");
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void validate(const FixedPointConfig& cfg) {
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw std::invalid_argument("FixedPointConfig: damping must lie in (0,1]");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("FixedPointConfig: tol must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("FixedPointConfig: max_iter must be >= 1");
}

FixedPointResult damped_fixed_point(
    const std::function<std::vector<double>(const std::vector<double>&)>& map,
    std::vector<double> init, const FixedPointConfig& cfg) {
    validate(cfg);
    FixedPointResult res;
    res.x = std::move(init);
    for (long it = 1; it <= cfg.max_iter; ++it) {
        const std::vector<double> fx = map(res.x);
        if (fx.size() != res.x.size())
            throw std::invalid_argument("damped_fixed_point: map changed the dimension");
        double r = 0.0;
        for (std::size_t i = 0; i < fx.size(); ++i) {
            if (!std::isfinite(fx[i])) {
                res.iterations = it;
                res.residual = INFINITY;
                return res;
            }
            r = std::max(r, std::abs(fx[i] - res.x[i]) / std::max(1.0, std::abs(res.x[i])));
        }
        res.iterations = it;
        res.residual = r;
        if (r <= cfg.tol) {
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < fx.size(); ++i)
            res.x[i] = (1.0 - cfg.damping) * res.x[i] + cfg.damping * fx[i];
    }
    return res;
}

MinResult golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                             double tol, int max_iter) {
    if (!(lo < hi)) throw std::invalid_argument("golden_section_min: need lo < hi");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    int evals = 2;
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    MinResult r;
    if (fc <= fd) {
        r.x = c;
        r.fx = fc;
    } else {
        r.x = d;
        r.fx = fd;
    }
    r.evaluations = evals;
    return r;
}

MinResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                           int scan_points, double tol) {
    if (scan_points < 3) throw std::invalid_argument("scan_then_golden: need >= 3 scan points");
    const std::vector<double> xs = linspace(lo, hi, static_cast<std::size_t>(scan_points));
    std::size_t best = 0;
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fs[i] = f(xs[i]);
        if (fs[i] < fs[best]) best = i;
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[std::min(best + 1, xs.size() - 1)];
    MinResult g = golden_section_min(f, a, b, tol);
    g.evaluations += scan_points;
    if (fs[best] < g.fx) {
        g.x = xs[best];
        g.fx = fs[best];
    }
    return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) throw std::invalid_argument("linspace: count must be >= 2");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.back() = hi;
    return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("logspace: bounds must be positive");
    std::vector<double> v = linspace(std::log(lo), std::log(hi), count);
    for (double& x : v) x = std::exp(x);
    v.front() = lo;
    v.back() = hi;
    return v;
}

}  // namespace raf
