#include "rmt/exact_kernel.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "rmt/error.hpp"
#include "rmt/special_functions.hpp"

namespace rmt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln(1 - e^t) for t < 0
double log1m_exp(double t) { return t > -0.693 ? std::log(-std::expm1(t)) : std::log1p(-std::exp(t)); }

// e^t - 1 - t
double expm1_minus_x(double t) {
    if (std::fabs(t) > 1e-2) return std::expm1(t) - t;
    const double t2 = t * t;
    return t2 * (0.5 + t * (1.0 / 6 + t * (1.0 / 24 + t * (1.0 / 120 + t * (1.0 / 720 + t / 5040)))));
}

// Log-integrand of the (m-1)-fold weight integral in coordinates y_k = ln r_k^2.
// Ginibre:   sum_k [d_k y_k - e^{y_k}] - e^{lnX - S}
// truncated: sum_k [d_k y_k + c_k ln(1 - e^{y_k})] + c_m ln(1 - e^{lnX - S})
// with d_k = a_k - a_m and S = sum_k y_k.
struct WeightExponent {
    bool truncated = false;
    int d = 0;
    Eigen::VectorXd da, c;
    double cm = 0.0;
    double lnX = 0.0;

    bool feasible(const Eigen::VectorXd& y) const {
        if (!y.allFinite()) return false;
        if (!truncated) return true;
        for (int k = 0; k < d; ++k)
            if (!(y[k] < 0.0)) return false;
        return lnX - y.sum() < 0.0;
    }

    double value(const Eigen::VectorXd& y) const {
        if (!feasible(y)) return kNegInf;
        const double S = y.sum();
        double v = da.dot(y);
        if (!truncated) {
            for (int k = 0; k < d; ++k) v -= std::exp(y[k]);
            return v - std::exp(lnX - S);
        }
        for (int k = 0; k < d; ++k) v += c[k] * log1m_exp(y[k]);
        return v + cm * log1m_exp(lnX - S);
    }

    // psi(y0 + dy) - psi(y0) without the cancellation of two large values.
    double delta(const Eigen::VectorXd& y0, const Eigen::VectorXd& dy) const {
        const Eigen::VectorXd y = y0 + dy;
        if (!feasible(y)) return kNegInf;
        const double S0 = y0.sum(), dS = dy.sum();
        if (!truncated) {
            // linear part with the gradient formed once, so the large terms cancel only in g
            const double E0 = std::exp(lnX - S0);
            double v = 0.0;
            for (int k = 0; k < d; ++k) v += (da[k] - std::exp(y0[k]) + E0) * dy[k] - std::exp(y0[k]) * expm1_minus_x(dy[k]);
            return v - E0 * expm1_minus_x(-dS);
        }
        double v = da.dot(dy);
        for (int k = 0; k < d; ++k) v += c[k] * std::log1p(-std::expm1(dy[k]) / std::expm1(-y0[k]));
        return v + cm * std::log1p(-std::expm1(-dS) / std::expm1(S0 - lnX));
    }

    void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
        const double S = y.sum();
        g.resize(d);
        H.resize(d, d);
        if (!truncated) {
            const double e = std::exp(lnX - S);
            for (int k = 0; k < d; ++k) g[k] = da[k] - std::exp(y[k]) + e;
            H.setConstant(-e);
            for (int k = 0; k < d; ++k) H(k, k) -= std::exp(y[k]);
            return;
        }
        const double p = 1.0 / std::expm1(S - lnX);  // E/(1-E)
        H.setConstant(-cm * p * (1.0 + p));
        for (int k = 0; k < d; ++k) {
            const double q = 1.0 / std::expm1(-y[k]);  // e^y/(1-e^y)
            g[k] = da[k] - c[k] * q + cm * p;
            H(k, k) -= c[k] * q * (1.0 + q);
        }
    }
};

// ln of int_{R^d} exp(psi(y)) dy for concave psi.
double log_concave_integral(const WeightExponent& psi, Eigen::VectorXd y, const QuadratureRule& rule) {
    const int d = psi.d;
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    double val = psi.value(y);
    if (!std::isfinite(val)) throw NumericError("weight integral: infeasible starting point");
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        psi.derivatives(y, g, H);
        Eigen::LLT<Eigen::MatrixXd> llt(-H);
        if (llt.info() != Eigen::Success) throw NumericError("weight integral: Hessian lost concavity");
        Eigen::VectorXd step = llt.solve(g);
        const double dec = g.dot(step);
        if (dec < 1e-20 || step.lpNorm<Eigen::Infinity>() < 1e-15 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
            converged = true;
            break;
        }
        double t = 1.0;
        for (;;) {
            const double gain = psi.delta(y, t * step);
            if (std::isfinite(gain) && gain >= 1e-4 * t * dec) {
                y += t * step;
                val = psi.value(y);
                break;
            }
            t *= 0.5;
            if (t < 1e-14) {
                converged = true;  // no further ascent possible at double precision
                break;
            }
        }
        if (converged) break;
    }
    if (!converged) throw NumericError("weight integral: mode search did not converge");
    psi.derivatives(y, g, H);
    Eigen::LLT<Eigen::MatrixXd> neg(-H);
    if (neg.info() != Eigen::Success) throw NumericError("weight integral: Hessian lost concavity");
    // Whitening map y = y* + L x with L L^T = (-H)^{-1}.
    Eigen::MatrixXd cov = neg.solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
    double log_det_L = 0.0;
    for (int k = 0; k < d; ++k) log_det_L += std::log(L(k, k));

    auto phi = [&](std::span<const double> x) {
        Eigen::VectorXd dy = Eigen::VectorXd::Zero(d);
        for (int k = 0; k < d; ++k)
            for (int j = 0; j <= k; ++j) dy[k] += L(k, j) * x[j];
        const double v = psi.delta(y, dy);
        return std::isfinite(v) ? std::exp(v) : 0.0;
    };
    // Per-axis extent: walk out from the mode until the integrand is negligible. The Hessian scale alone
    // overestimates the width badly when the mode is flat (very small or very large |z|).
    std::vector<Interval> box(d);
    std::array<double, 3> x{};
    for (int k = 0; k < d; ++k)
        for (int s = -1; s <= 1; s += 2) {
            auto at = [&](double w) {
                x.fill(0.0);
                x[k] = s * w;
                return phi(std::span<const double>(x.data(), d));
            };
            double w = 1.0;
            for (int it = 0; it < 1100 && at(w) < std::exp(-1.0); ++it) w *= 0.5;
            for (;;) {
                x.fill(0.0);
                x[k] = s * w;
                if (phi(std::span<const double>(x.data(), d)) < 1e-18) break;
                w *= 1.25;
                if (w > 1e4) throw NumericError("weight integral: integrand does not decay");
            }
            (s < 0 ? box[k].lo : box[k].hi) = 1.25 * s * w;
        }
    QuadratureRule r = rule;
    r.dimension = d;
    auto res = adaptive_quad<double>(phi, std::span<const Interval>(box), r);
    if (!(res.value > 0)) throw NumericError("weight integral: non-positive quadrature result");
    return val + log_det_L + std::log(res.value);
}

double lgam(double x) { return log_gamma(x); }

}  // namespace

KernelContext KernelContext::make(const EnsembleSpec& spec_in, bool rescaled, QuadratureRule rule) {
    spec_in.validate();
    KernelContext ctx;
    ctx.spec = spec_in;
    ctx.spec.normalise();
    const auto& s = ctx.spec;
    if (s.m > 4) throw ConfigError("exact kernel supports m <= 4 (weight quadrature dimension <= 3)");
    rule.dimension = std::max(1, s.m - 1);
    rule.validate();
    ctx.quadrature = rule;
    ctx.rescale_exponent = (rescaled && s.family == Family::ginibre) ? 0.5 * s.m : 0.0;
    const auto a = s.induced();
    ctx.log_gamma_table.assign(s.m, std::vector<double>(s.N + 1));
    for (int k = 0; k < s.m; ++k)
        for (int l = 0; l <= s.N; ++l) ctx.log_gamma_table[k][l] = lgam(a[k] + l + 1);
    ctx.log_norms.assign(s.N + 1, 0.0);
    if (s.family == Family::ginibre) {
        for (int l = 0; l <= s.N; ++l)
            for (int k = 0; k < s.m; ++k) ctx.log_norms[l] += ctx.log_gamma_table[k][l] - ctx.log_gamma_table[k][0];
    } else {
        const auto c = s.truncation_exponents();
        if (s.m >= 2)
            for (double ck : c)
                if (!(ck > 0)) throw ConfigError("exact truncated kernel with m >= 2 needs tau_k N > 1");
        for (int l = 0; l <= s.N; ++l)
            for (int k = 0; k < s.m; ++k)
                ctx.log_norms[l] += ctx.log_gamma_table[k][l] - ctx.log_gamma_table[k][0] + lgam(a[k] + c[k] + 2) -
                                    lgam(a[k] + c[k] + l + 2);
    }
    return ctx;
}

double KernelContext::log_scale() const { return rescale_exponent * std::log(double(spec.N)); }

double log_weight_at(const KernelContext& ctx, double lnX) {
    const auto& s = ctx.spec;
    const auto a = s.induced();
    const int m = s.m;
    if (std::isnan(lnX)) throw DomainError("log_weight: NaN argument");
    const double am = a[m - 1];
    if (s.family == Family::truncated && lnX >= 0.0) return kNegInf;
    if (lnX == kNegInf) {
        if (m >= 2) throw DomainError("log_weight: z != 0 required for m >= 2");
        if (am == 0.0) {
            double base = -std::log(std::numbers::pi) - lgam(am + 1);
            if (s.family == Family::truncated) {
                const double c = s.truncation_exponents()[0];
                base += lgam(am + c + 2) - lgam(c + 1);
            }
            return base;
        }
        return am > 0 ? kNegInf : std::numeric_limits<double>::infinity();
    }
    double out = am * lnX - std::log(std::numbers::pi);
    if (s.family == Family::ginibre) {
        for (int k = 0; k < m; ++k) out -= ctx.log_gamma_table[k][0];
        if (m == 1) return out - std::exp(lnX);
    } else {
        const auto c = s.truncation_exponents();
        for (int k = 0; k < m; ++k) out += lgam(a[k] + c[k] + 2) - ctx.log_gamma_table[k][0] - lgam(c[k] + 1);
        if (m == 1) return out + c[0] * log1m_exp(lnX);
    }
    // beyond this the Ginibre weight is below exp(-m e^700) and the exponent overflows
    if (s.family == Family::ginibre && lnX / m > 700.0) return kNegInf;
    WeightExponent psi;
    psi.truncated = s.family == Family::truncated;
    psi.d = m - 1;
    psi.lnX = lnX;
    psi.da.resize(m - 1);
    psi.c.resize(m - 1);
    for (int k = 0; k < m - 1; ++k) psi.da[k] = a[k] - am;
    Eigen::VectorXd y0(m - 1);
    if (psi.truncated) {
        const auto c = s.truncation_exponents();
        for (int k = 0; k < m - 1; ++k) psi.c[k] = c[k];
        psi.cm = c[m - 1];
        y0.setConstant(lnX / m);
    } else {
        const double base = std::exp(lnX / m);
        for (int k = 0; k < m - 1; ++k) y0[k] = std::log(std::max(psi.da[k], 0.0) + base);
    }
    return out + log_concave_integral(psi, y0, ctx.quadrature);
}

LogComplex log_weight(const KernelContext& ctx, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("log_weight: non-finite argument");
    const double az = std::abs(z);
    const double lnX = az == 0.0 ? kNegInf : 2.0 * (std::log(az) + ctx.log_scale());
    const double lw = log_weight_at(ctx, lnX);
    if (lw == kNegInf) return LogComplex::zero();
    return {lw, 0.0};
}

LogComplex log_tn(const KernelContext& ctx, cplx z, cplx zp) {
    const int N = ctx.spec.N;
    const cplx prod = z * std::conj(zp);
    if (!std::isfinite(prod.real()) || !std::isfinite(prod.imag())) throw DomainError("log_tn: non-finite argument");
    if (prod == cplx(0.0, 0.0) || N == 1) return {-ctx.log_norms[0], 0.0};
    LogComplex base = LogComplex::from_complex(z) * LogComplex::from_complex(std::conj(zp));
    base.log_mag += 2.0 * ctx.log_scale();
    std::vector<LogComplex> terms(N);
    for (int l = 0; l < N; ++l) terms[l] = LogComplex(l * base.log_mag - ctx.log_norms[l], l * base.phase);
    return log_sum_exp_complex(terms);
}

LogComplex log_kernel(const KernelContext& ctx, cplx z, cplx w) {
    const LogComplex wz = log_weight(ctx, z);
    const LogComplex ww = (z == w) ? wz : log_weight(ctx, w);
    if (wz.is_zero() || ww.is_zero()) return LogComplex::zero();
    return (wz * ww).sqrt() * log_tn(ctx, z, w);
}

CorrelationResult correlation(const KernelContext& ctx, const CorrelationRequest& req) {
    const int n = int(req.points.size());
    if (n < 1 || n > 8) throw DomainError("correlation: 1 <= n <= 8 points required");
    if (!req.gauge.empty() && int(req.gauge.size()) != n) throw DomainError("correlation: gauge length must equal n");
    CorrelationResult out;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            if (req.points[j] == req.points[k]) {
                if (!req.allow_degenerate) throw DomainError("correlation: coincident points");
                out.log_value = LogComplex::zero();
                out.value = 0.0;
                return out;
            }
    std::vector<LogComplex> lw(n);
    for (int j = 0; j < n; ++j) lw[j] = log_weight(ctx, req.points[j]);
    for (int j = 0; j < n; ++j)
        if (lw[j].is_zero()) {
            out.log_value = LogComplex::zero();
            out.value = 0.0;
            return out;
        }
    std::vector<std::vector<LogComplex>> K(n, std::vector<LogComplex>(n));
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            K[j][k] = (lw[j] * lw[k]).sqrt() * log_tn(ctx, req.points[j], req.points[k]);
            K[k][j] = K[j][k].conj();
        }
    if (!req.gauge.empty())
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) K[j][k].log_mag += req.gauge[j] - req.gauge[k];
    // Symmetric equilibration to a unit diagonal, compensated in log form.
    std::vector<double> g(n);
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
        g[j] = 0.5 * K[j][j].log_mag;
        shift += 2.0 * g[j];
    }
    Eigen::MatrixXcd B(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) B(j, k) = LogComplex(K[j][k].log_mag - g[j] - g[k], K[j][k].phase).to_complex();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
    const auto& sv = svd.singularValues();
    out.condition_number = sv[n - 1] > 0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
    out.ill_conditioned = !(out.condition_number < 1e12);
    const cplx det = Eigen::PartialPivLU<Eigen::MatrixXcd>(B).determinant();
    LogComplex ld = LogComplex::from_complex(det);
    ld.log_mag += shift;
    out.log_value = ld;
    if (ld.is_zero()) {
        out.value = 0.0;
    } else if (ld.log_mag < 700.0 && ld.log_mag > -700.0) {
        out.value = ld.to_complex().real();
    } else {
        out.representable = false;
        out.value = ld.log_mag > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return out;
}

double log_integral_concave_1d(const std::function<double(double)>& h, double guess, double hi,
                               const QuadratureRule& rule) {
    // Bracket the maximiser by walking uphill with growing steps.
    auto H = [&](double s) { return s >= hi ? kNegInf : h(s); };
    double x0 = std::min(guess, hi - 1e-3);
    double step = 0.5;
    double f0 = H(x0);
    if (!std::isfinite(f0)) throw NumericError("concave integral: starting point outside the domain");
    double xr = std::min(x0 + step, 0.5 * (x0 + hi)), fr = H(xr);
    double xl = x0 - step, fl = H(xl);
    int guard = 0;
    while ((fr > f0 || fl > f0) && guard++ < 200) {
        if (fr > f0) {
            xl = x0;
            fl = f0;
            x0 = xr;
            f0 = fr;
            step *= 2;
            xr = std::isfinite(hi) ? std::min(x0 + step, 0.5 * (x0 + hi)) : x0 + step;
            fr = H(xr);
        } else {
            xr = x0;
            fr = f0;
            x0 = xl;
            f0 = fl;
            step *= 2;
            xl = x0 - step;
            fl = H(xl);
        }
    }
    auto neg = [&](double s) {
        const double v = H(s);
        return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
    };
    auto best = boost::math::tools::brent_find_minima(neg, xl, xr, 30);
    const double sx = best.first;
    const double hx = -best.second;
    // Width from a finite-difference curvature.
    double width = 1.0;
    {
        const double dlt = 1e-2 * std::max(1.0, std::fabs(sx));
        const double hp = H(sx + dlt), hm = H(sx - dlt);
        const double curv = (hp - 2 * hx + hm) / (dlt * dlt);
        if (std::isfinite(curv) && curv < 0) width = 1.0 / std::sqrt(-curv);
    }
    double lo = sx - 12 * width, up = sx + 12 * width;
    for (int i = 0; i < 60 && H(lo) - hx > -42.0; ++i) lo = sx - (sx - lo) * 1.5;
    for (int i = 0; i < 60 && std::isfinite(H(up)) && H(up) - hx > -42.0; ++i) up = sx + (up - sx) * 1.5;
    if (up > hi) up = hi;
    auto f = [&](double s) {
        const double v = H(s);
        return std::isfinite(v) ? std::exp(v - hx) : 0.0;
    };
    auto res = adaptive_quad_1d<double>(f, Interval{lo, up}, rule);
    return hx + std::log(res.value);
}

double log_moment_by_quadrature(const KernelContext& ctx, int l) {
    const auto& s = ctx.spec;
    const auto a = s.induced();
    double guess = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    if (s.family == Family::ginibre) {
        for (double ak : a) guess += std::log(ak + l + 1.5);
    } else {
        const auto c = s.truncation_exponents();
        for (int k = 0; k < s.m; ++k) guess += std::log((a[k] + l + 1.5) / (a[k] + c[k] + l + 2.5));
        hi = 0.0;
    }
    auto h = [&](double lnX) { return (l + 1) * lnX + log_weight_at(ctx, lnX); };
    QuadratureRule rule = ctx.quadrature;
    rule.dimension = 1;
    return std::log(std::numbers::pi) + log_integral_concave_1d(h, guess, hi, rule);
}

double orthogonality_residual(const KernelContext& ctx, int j, int l) {
    if (j < 0 || l < 0 || j > ctx.spec.N || l > ctx.spec.N) throw DomainError("orthogonality_residual: 0 <= j, l <= N");
    if (j != l) return 0.0;  // the angular integral of e^{i(j-l)theta} vanishes
    return std::fabs(std::expm1(log_moment_by_quadrature(ctx, l) - ctx.log_norms[l]));
}

double log_joint_density(const KernelContext& ctx, std::span<const cplx> points) {
    const int N = ctx.spec.N;
    if (int(points.size()) != N) throw DomainError("log_joint_density: expected N points");
    double out = -lgam(N + 1.0);
    for (int l = 0; l < N; ++l) out -= ctx.log_norms[l];
    const double scale = std::exp(ctx.log_scale());
    for (int j = 0; j < N; ++j) {
        out += log_weight(ctx, points[j]).log_mag;
        for (int k = j + 1; k < N; ++k) {
            const double d = std::abs(points[k] - points[j]) * scale;
            if (d == 0.0) return kNegInf;
            out += 2.0 * std::log(d);
        }
    }
    return out;
}

}  // namespace rmt
