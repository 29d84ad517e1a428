#include "rmt/saddlepoint.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmt/error.hpp"
#include "rmt/special_functions.hpp"

namespace rmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

LogComplex log_exp(cplx e) { return {e.real(), e.imag()}; }

void require_re_positive(const Eigen::MatrixXcd& M, const char* what) {
    if (M.rows() == 0) return;
    Eigen::MatrixXd re = M.real();
    re = 0.5 * (re + re.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw DomainError(std::string(what) + ": real part of the Hessian is not positive definite");
}

double derivative_scale(const SaddleDerivatives& d) {
    return 1.0 + d.hess_p.cwiseAbs().maxCoeff();
}

LogComplex interior_term(const SaddleProblem& pr, double lambda, int eps) {
    const SaddleDerivatives d = saddle_derivatives(pr, lambda);
    const int m = pr.m;
    const double scale = derivative_scale(d);
    for (int k = 0; k < m; ++k)
        if (std::abs(d.grad_p(k)) > 1e-6 * scale) throw DomainError("interior saddle: p has nonzero slope in a regular coordinate");
    if (std::abs(d.grad_p(m)) < 1e-8 * scale) throw DomainError("interior saddle: p has zero slope in the pole coordinate");
    const Eigen::MatrixXcd A = d.hess_p.topLeftCorner(m, m);
    require_re_positive(A, "interior saddle");
    const Eigen::VectorXcd eta = d.grad_f.head(m);
    cplx quad = 0.0;
    if (m > 0) quad = 0.5 * (eta.transpose() * A.partialPivLu().solve(eta))(0, 0);
    LogComplex r = LogComplex(std::log(kPi), kPi / 2);
    r = r * LogComplex(0.5 * m * std::log(2 * kPi / lambda), 0.0);
    r = r * LogComplex::from_complex(d.q0);
    r = r * log_exp(-lambda * d.p0 - std::sqrt(lambda) * d.f0 + quad);
    if (m > 0) r = r / LogComplex::from_complex(sqrt_det(A));
    if (eps < 0) r = r * LogComplex(0.0, kPi);
    return r;
}

LogComplex edge_term(const SaddleProblem& pr, double lambda, int eps) {
    const SaddleDerivatives d = saddle_derivatives(pr, lambda);
    const double scale = derivative_scale(d);
    for (int k = 0; k <= pr.m; ++k)
        if (std::abs(d.grad_p(k)) > 1e-6 * scale) throw DomainError("edge saddle: gradient of p must vanish");
    require_re_positive(d.hess_p, "edge saddle");
    const HessianBlocks hb = HessianBlocks::from_full(d.hess_p, d.grad_f);
    LogComplex r = LogComplex::from_complex(gaussian_pv_closed_form(hb));
    r = r * LogComplex(-0.5 * pr.m * std::log(lambda), 0.0);
    r = r * LogComplex::from_complex(d.q0);
    r = r * log_exp(-lambda * d.p0 - std::sqrt(lambda) * d.f0);
    if (eps < 0) r = r * LogComplex(0.0, kPi);
    return r;
}

}  // namespace

Contour Contour::line(cplx direction) {
    Contour c;
    c.point = [direction](double s) { return direction * s; };
    c.tangent = [direction](double) { return direction; };
    c.half_width = 1.0;
    c.auto_width = true;
    return c;
}

Contour Contour::loop(double radius) {
    if (!(radius > 0.0)) throw DomainError("loop contour: radius must be positive");
    Contour c;
    // 1 - e^{is} written without cancellation near s = 0
    c.point = [radius](double s) {
        const double h = std::sin(0.5 * s);
        return radius * cplx(2.0 * h * h, -std::sin(s));
    };
    c.tangent = [radius](double s) { return radius * cplx(std::sin(s), -std::cos(s)); };
    c.half_width = kPi;
    c.auto_width = false;
    return c;
}

Eigen::MatrixXcd HessianBlocks::full() const {
    const int n = m();
    Eigen::MatrixXcd B(n + 1, n + 1);
    B.topLeftCorner(n, n) = A;
    B.topRightCorner(n, 1) = beta;
    B.bottomLeftCorner(1, n) = beta.transpose();
    B(n, n) = alpha;
    return B;
}

HessianBlocks HessianBlocks::from_full(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& eta) {
    if (B.rows() != B.cols() || B.rows() < 1 || eta.size() != B.rows())
        throw DomainError("HessianBlocks: shape mismatch");
    const int n = int(B.rows()) - 1;
    HessianBlocks h;
    h.A = B.topLeftCorner(n, n);
    h.beta = B.topRightCorner(n, 1);
    h.alpha = B(n, n);
    h.eta_tilde = eta.head(n);
    h.eta_last = eta(n);
    return h;
}

void SaddleProblem::validate() const {
    if (m < 0) throw ConfigError("saddle problem: m must be non-negative");
    if (!p || !f || !q) throw ConfigError("saddle problem: p, f and q are required");
    if (int(saddle.size()) != m + 1) throw ConfigError("saddle problem: saddle must have m+1 coordinates");
    if (!contours.empty() && int(contours.size()) != m + 1) throw ConfigError("saddle problem: need one contour per coordinate");
    if (grad_p && grad_p->size() != m + 1) throw ConfigError("saddle problem: gradient shape");
    if (hess_p && (hess_p->rows() != m + 1 || hess_p->cols() != m + 1)) throw ConfigError("saddle problem: Hessian shape");
}

Eigen::VectorXcd fd_gradient(const std::function<cplx(std::span<const cplx>)>& F, std::span<const cplx> x) {
    const int n = int(x.size());
    std::vector<cplx> y(x.begin(), x.end());
    Eigen::VectorXcd g(n);
    for (int k = 0; k < n; ++k) {
        const double h = std::cbrt(kEps) * (1.0 + std::abs(x[k]));
        y[k] = x[k] + h;
        const cplx fp = F(y);
        y[k] = x[k] - h;
        const cplx fm = F(y);
        y[k] = x[k];
        g(k) = (fp - fm) / (2 * h);
    }
    return g;
}

Eigen::MatrixXcd fd_hessian(const std::function<cplx(std::span<const cplx>)>& F, std::span<const cplx> x) {
    const int n = int(x.size());
    std::vector<cplx> y(x.begin(), x.end());
    Eigen::MatrixXcd H(n, n);
    const cplx f0 = F(y);
    std::vector<double> h(n);
    for (int k = 0; k < n; ++k) h[k] = std::pow(kEps, 0.25) * (1.0 + std::abs(x[k]));
    for (int k = 0; k < n; ++k) {
        y[k] = x[k] + h[k];
        const cplx fp = F(y);
        y[k] = x[k] - h[k];
        const cplx fm = F(y);
        y[k] = x[k];
        H(k, k) = (fp - 2.0 * f0 + fm) / (h[k] * h[k]);
        for (int j = 0; j < k; ++j) {
            cplx acc = 0.0;
            for (int sk : {1, -1})
                for (int sj : {1, -1}) {
                    y[k] = x[k] + double(sk) * h[k];
                    y[j] = x[j] + double(sj) * h[j];
                    acc += double(sk * sj) * F(y);
                }
            y[k] = x[k];
            y[j] = x[j];
            H(k, j) = H(j, k) = acc / (4 * h[k] * h[j]);
        }
    }
    return H;
}

SaddleDerivatives saddle_derivatives(const SaddleProblem& pr, double lambda) {
    pr.validate();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("saddle: lambda must be positive");
    SaddleDerivatives d;
    std::span<const cplx> x0(pr.saddle);
    d.p0 = pr.p(x0);
    d.f0 = pr.f(x0, lambda);
    d.q0 = pr.q(x0);
    d.grad_p = pr.grad_p ? *pr.grad_p : fd_gradient(pr.p, x0);
    d.hess_p = pr.hess_p ? *pr.hess_p : fd_hessian(pr.p, x0);
    if (pr.grad_f) {
        d.grad_f = pr.grad_f(lambda);
        if (d.grad_f.size() != pr.m + 1) throw ConfigError("saddle problem: gradient of f has wrong shape");
    } else {
        auto fl = [&](std::span<const cplx> x) { return pr.f(x, lambda); };
        d.grad_f = fd_gradient(fl, x0);
    }
    return d;
}

cplx sqrt_det(const Eigen::MatrixXcd& A) {
    if (A.rows() == 0) return 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
    if (es.info() != Eigen::Success) throw NumericError("sqrt_det: eigenvalue solver failed");
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    cplx r = 1.0;
    for (cplx e : ev) r *= std::sqrt(e);
    return r;
}

cplx gaussian_pv_closed_form(const HessianBlocks& b) {
    const int m = b.m();
    if (b.beta.size() != m || b.eta_tilde.size() != m) throw DomainError("gaussian_pv_closed_form: block shapes disagree");
    require_re_positive(b.full(), "gaussian_pv_closed_form");
    cplx quad = 0.0, cross = 0.0, schur = b.alpha;
    if (m > 0) {
        const auto lu = b.A.partialPivLu();
        const Eigen::VectorXcd ainv_eta = lu.solve(b.eta_tilde);
        const Eigen::VectorXcd ainv_beta = lu.solve(b.beta);
        quad = 0.5 * (b.eta_tilde.transpose() * ainv_eta)(0, 0);
        cross = (b.beta.transpose() * ainv_eta)(0, 0);
        schur -= (b.beta.transpose() * ainv_beta)(0, 0);
    }
    const cplx I(0.0, 1.0);
    const cplx arg = (I * b.eta_last - I * cross) / std::sqrt(2.0 * schur);
    const cplx pref = std::pow(2 * kPi, 0.5 * m) * std::exp(quad) * I * kPi / sqrt_det(b.A);
    return pref * erf_complex(arg);
}

namespace {

struct OracleSetup {
    const SaddleProblem& pr;
    double lambda;
    cplx p0, f0;
    std::vector<double> width;

    cplx exponent(std::span<const cplx> x) const {
        return -lambda * (pr.p(x) - p0) - std::sqrt(lambda) * (pr.f(x, lambda) - f0);
    }
    cplx integrand(std::span<const cplx> x) const { return std::exp(exponent(x)) * pr.q(x); }
};

double choose_width(const OracleSetup& o, int k) {
    const Contour& c = o.pr.contours[k];
    if (!c.auto_width) return c.half_width;
    std::vector<cplx> x(o.pr.saddle);
    double w = c.half_width;
    for (int it = 0; it < 64; ++it) {
        bool small = true;
        for (double s : {w, -w}) {
            x[k] = o.pr.saddle[k] + c.point(s);
            const cplx e = o.exponent(x);
            if (!(e.real() < -36.0)) small = false;
        }
        if (small) return w;
        w *= 1.5;
        if (w > 1e4) break;
    }
    throw NumericError("pv_oracle: integrand does not decay along coordinate " + std::to_string(k));
}

}  // namespace

cplx pv_oracle(const SaddleProblem& pr, double lambda, const QuadratureRule& rule) {
    pr.validate();
    rule.validate();
    if (pr.contours.empty()) throw ConfigError("pv_oracle: problem has no contours");
    if (pr.dims() > 2) throw UnsupportedParameters("pv_oracle: at most two coordinates are supported");
    if (!(lambda > 0.0)) throw DomainError("pv_oracle: lambda must be positive");
    std::span<const cplx> x0(pr.saddle);
    OracleSetup o{pr, lambda, pr.p(x0), pr.f(x0, lambda), {}};
    for (int k = 0; k < pr.dims(); ++k) o.width.push_back(choose_width(o, k));

    const int pole = pr.m;
    const Contour& cp = pr.contours[pole];
    QuadratureRule inner_rule = rule;
    inner_rule.rel_tol = std::max(rule.rel_tol * 0.25, 1e-14);

    auto inner = [&](std::vector<cplx> x) -> QuadResult<cplx> {
        auto g = [&](double s) -> cplx {
            const cplx t = cp.point(s);
            x[pole] = pr.saddle[pole] + t;
            const cplx jac = (s == 0.0) ? cplx(1.0) : cp.tangent(s) * s / t;
            return o.integrand(x) * jac;
        };
        return pv_quad_1d<cplx>(g, o.width[pole], inner_rule);
    };

    QuadResult<cplx> res;
    if (pr.m == 0) {
        res = inner(pr.saddle);
    } else {
        const Contour& c0 = pr.contours[0];
        auto outer = [&](double s) -> QuadResult<cplx> {
            std::vector<cplx> x(pr.saddle);
            x[0] = pr.saddle[0] + c0.point(s);
            QuadResult<cplx> r = inner(x);
            const cplx tg = c0.tangent(s);
            return {r.value * tg, r.error * std::abs(tg)};
        };
        res = adaptive_quad_1d<cplx>(outer, Interval{-o.width[0], o.width[0]}, rule);
    }
    return res.value * std::exp(-lambda * o.p0 - std::sqrt(lambda) * o.f0);
}

std::vector<std::string> tail_probe(const SaddleProblem& pr, double lambda) {
    pr.validate();
    std::vector<std::string> warnings;
    if (pr.contours.empty()) return warnings;
    std::span<const cplx> x0(pr.saddle);
    const cplx p0 = pr.p(x0);
    OracleSetup o{pr, lambda, p0, pr.f(x0, lambda), {}};
    for (int k = 0; k < pr.dims(); ++k) {
        double w;
        try {
            w = choose_width(o, k);
        } catch (const NumericError&) {
            warnings.push_back("coordinate " + std::to_string(k) + ": integrand does not decay");
            continue;
        }
        std::vector<cplx> x(pr.saddle);
        for (double frac : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
            x[k] = pr.saddle[k] + pr.contours[k].point(frac * w);
            const double dp = (pr.p(x) - p0).real();
            if (!(dp > 0.0))
                warnings.push_back("coordinate " + std::to_string(k) + ": Re(p - p0) = " + std::to_string(dp) +
                                   " at s = " + std::to_string(frac * w));
        }
    }
    return warnings;
}

int calibrated_epsilon(const SaddleProblem& pr, bool edge) {
    auto cal = pr.calibration;
    if (!cal || !(pr.calibration_lambda > 0.0)) return 1;
    std::call_once(cal->once, [&] {
        const double lam = pr.calibration_lambda;
        const cplx oracle = pv_oracle(pr, lam);
        const cplx lead = (edge ? edge_term(pr, lam, 1) : interior_term(pr, lam, 1)).to_complex();
        cal->epsilon = std::abs(oracle - lead) <= std::abs(oracle + lead) ? 1 : -1;
        cal->done = true;
    });
    return cal->epsilon;
}

LogComplex leading_term_interior(const SaddleProblem& pr, double lambda) {
    return interior_term(pr, lambda, calibrated_epsilon(pr, false));
}

LogComplex leading_term_edge(const SaddleProblem& pr, double lambda) {
    return edge_term(pr, lambda, calibrated_epsilon(pr, true));
}

cplx rank_structured_det(std::span<const cplx> a) {
    const std::size_t n = a.size();
    cplx prod = 1.0, sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        prod *= a[k];
        cplx others = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != k) others *= a[j];
        sum += others;
    }
    return prod + sum;
}

Eigen::MatrixXcd rank_structured_matrix(std::span<const cplx> a) {
    const int n = int(a.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Ones(n, n);
    for (int k = 0; k < n; ++k) M(k, k) += a[k];
    return M;
}

Eigen::MatrixXcd rank_structured_inverse(std::span<const cplx> a) {
    const int n = int(a.size());
    cplx s = 0.0;
    for (cplx v : a) {
        if (v == 0.0) throw DomainError("rank_structured_inverse: diagonal entries must be nonzero");
        s += 1.0 / v;
    }
    if (std::abs(1.0 + s) == 0.0) throw DomainError("rank_structured_inverse: matrix is singular");
    Eigen::MatrixXcd M(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            M(k, j) = (k == j) ? (1.0 + s - 1.0 / a[k]) / (a[k] * (1.0 + s)) : -1.0 / (a[k] * a[j] * (1.0 + s));
    return M;
}

SaddleProblem gaussian_problem(const HessianBlocks& b) {
    const Eigen::MatrixXcd B = b.full();
    const int n = int(B.rows());
    Eigen::VectorXcd eta(n);
    eta.head(n - 1) = b.eta_tilde;
    eta(n - 1) = b.eta_last;
    SaddleProblem pr;
    pr.name = "gaussian";
    pr.m = n - 1;
    pr.p = [B](std::span<const cplx> x) {
        Eigen::Map<const Eigen::VectorXcd> v(x.data(), Eigen::Index(x.size()));
        return cplx(0.5 * (v.transpose() * B * v)(0, 0));
    };
    pr.f = [eta](std::span<const cplx> x, double) {
        Eigen::Map<const Eigen::VectorXcd> v(x.data(), Eigen::Index(x.size()));
        return cplx((eta.transpose() * v)(0, 0));
    };
    pr.q = [](std::span<const cplx>) { return cplx(1.0); };
    pr.saddle.assign(n, 0.0);
    pr.grad_p = Eigen::VectorXcd::Zero(n);
    pr.hess_p = B;
    pr.grad_f = [eta](double) { return eta; };
    pr.contours.assign(n, Contour::line());
    return pr;
}

namespace {
constexpr double eta = 0.5, kappa = 0.5, loop_radius = 0.5;
}  // namespace

std::vector<std::string> builtin_problem_names() { return {"interior-basic", "interior", "interior-lambda", "edge"}; }

bool builtin_is_edge(const std::string& name) { return name == "edge"; }

SaddleProblem builtin_problem(const std::string& name) {
    SaddleProblem pr;
    pr.name = name;
    pr.m = 1;
    pr.saddle = {0.0, 0.0};
    pr.calibration_lambda = 25.0;
    Eigen::VectorXcd gp(2), gf(2);
    Eigen::MatrixXcd H(2, 2);
    if (name == "interior-basic") {
        pr.p = [](std::span<const cplx> x) { return 0.5 * x[0] * x[0] + x[1]; };
        pr.f = [](std::span<const cplx>, double) { return cplx(0.0); };
        pr.q = [](std::span<const cplx>) { return cplx(1.0); };
        gp << 0.0, 1.0;
        H << 1.0, 0.0, 0.0, 0.0;
        gf << 0.0, 0.0;
        pr.contours = {Contour::line(), Contour::loop(loop_radius)};
    } else if (name == "interior" || name == "interior-lambda") {
        pr.p = [](std::span<const cplx> x) { return 0.5 * x[0] * x[0] + x[1] + 0.5 * x[0] * x[1]; };
        if (name == "interior") {
            pr.f = [](std::span<const cplx> x, double) { return eta * x[0] + kappa * x[0] * x[0]; };
        } else {
            pr.f = [](std::span<const cplx> x, double lam) {
                const double r = std::sqrt(lam);
                return r * std::log(1.0 + eta * x[0] / r) + kappa * x[0] * x[0];
            };
        }
        pr.q = [](std::span<const cplx> x) { return 1.0 + 0.5 * x[0] + x[1]; };
        gp << 0.0, 1.0;
        H << 1.0, 0.5, 0.5, 0.0;
        gf << eta, 0.0;
        pr.contours = {Contour::line(), Contour::loop(loop_radius)};
    } else if (name == "edge") {
        pr.p = [](std::span<const cplx> x) {
            const cplx a = x[0], t = x[1];
            return 0.5 * (a * a + a * t + 1.5 * t * t) + 0.05 * (a * a * a * a + t * t * t * t);
        };
        pr.f = [](std::span<const cplx> x, double) { return 0.3 * x[0] + 0.8 * x[1] + kappa * x[0] * x[0]; };
        pr.q = [](std::span<const cplx> x) { return 1.0 + 0.5 * x[0]; };
        gp << 0.0, 0.0;
        H << 1.0, 0.5, 0.5, 1.5;
        gf << 0.3, 0.8;
        pr.contours = {Contour::line(), Contour::line()};
    } else {
        throw ConfigError("unknown saddle problem '" + name + "'");
    }
    pr.grad_p = gp;
    pr.hess_p = H;
    pr.grad_f = [gf](double) { return gf; };
    return pr;
}

}  // namespace rmt
