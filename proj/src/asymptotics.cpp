#include "rmt/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rmt/error.hpp"
#include "rmt/roots.hpp"
#include "rmt/special_functions.hpp"

namespace rmt {

namespace {

constexpr double kPi = std::numbers::pi;
const double kRootTol = std::numeric_limits<double>::min();

template <class... Vs>
void move_min_last(std::vector<double>& key, Vs&... others) {
    if (key.empty()) return;
    const std::size_t m = key.size();
    std::size_t best = m - 1;
    for (std::size_t k = 0; k < m; ++k)
        if (key[k] < key[best]) best = k;
    std::swap(key[best], key[m - 1]);
    (
        [&] {
            if (others.size() == m) std::swap(others[best], others[m - 1]);
        }(),
        ...);
}

void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive and finite");
}

double lgam(double x) { return log_gamma(x); }

}  // namespace

const char* limit_family_name(LimitFamily f) {
    switch (f) {
        case LimitFamily::ginibre_fixed: return "ginibre_fixed";
        case LimitFamily::ginibre_varying: return "ginibre_varying";
        case LimitFamily::truncated: return "truncated";
    }
    return "?";
}

LimitParams LimitParams::fixed(std::vector<double> a) {
    LimitParams p;
    p.family = LimitFamily::ginibre_fixed;
    p.a = std::move(a);
    move_min_last(p.a);
    p.validate();
    return p;
}

LimitParams LimitParams::varying(std::vector<double> delta) {
    LimitParams p;
    p.family = LimitFamily::ginibre_varying;
    p.delta = std::move(delta);
    move_min_last(p.delta);
    p.validate();
    return p;
}

LimitParams LimitParams::truncated(std::vector<double> sigma, std::vector<double> tau, std::vector<double> b) {
    LimitParams p;
    p.family = LimitFamily::truncated;
    p.sigma = std::move(sigma);
    p.tau = std::move(tau);
    p.b = b.empty() ? std::vector<double>(p.sigma.size(), 0.0) : std::move(b);
    move_min_last(p.sigma, p.tau, p.b);
    p.validate();
    return p;
}

int LimitParams::m() const {
    switch (family) {
        case LimitFamily::ginibre_fixed: return int(a.size());
        case LimitFamily::ginibre_varying: return int(delta.size());
        case LimitFamily::truncated: return int(sigma.size());
    }
    return 0;
}

void LimitParams::validate() const {
    const int mm = m();
    if (mm < 1) throw DomainError("limit parameters: at least one factor required");
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    switch (family) {
        case LimitFamily::ginibre_fixed:
            if (!finite(a)) throw DomainError("a_k must be finite");
            for (double x : a)
                if (!(x > -1)) throw DomainError("a_k > -1 violated");
            break;
        case LimitFamily::ginibre_varying:
            if (!finite(delta)) throw DomainError("delta_k must be finite");
            for (double x : delta)
                if (!(x >= 0)) throw DomainError("delta_k >= 0 violated");
            if (*std::min_element(delta.begin(), delta.end()) != delta.back())
                throw DomainError("delta_m must be the smallest parameter");
            break;
        case LimitFamily::truncated:
            if (int(tau.size()) != mm || int(b.size()) != mm) throw DomainError("sigma, tau, b must have equal length");
            if (!finite(sigma) || !finite(tau) || !finite(b)) throw DomainError("truncation parameters must be finite");
            for (int k = 0; k < mm; ++k) {
                if (!(sigma[k] >= 0)) throw DomainError("sigma_k >= 0 violated");
                if (!(tau[k] > 0)) throw DomainError("tau_k > 0 violated");
            }
            if (*std::min_element(sigma.begin(), sigma.end()) != sigma.back())
                throw DomainError("sigma_m must be the smallest parameter");
            break;
    }
}

// The left side prod_k (delta_k - delta_m + r^2 x) is 0 at x = 0 and strictly increasing with
// limit +inf on (0, inf) because every factor is non-negative and increasing, so the root is unique.
double xi_root(std::span<const double> delta, double r) {
    check_radius(r);
    const int m = int(delta.size());
    if (m < 1) throw DomainError("xi_root: empty parameter list");
    const double dm = delta[m - 1];
    for (double d : delta)
        if (d < dm) throw DomainError("xi_root: delta_m must be the minimum");
    if (m == 1) return 1.0;
    const double r2 = r * r;
    auto f = [&](double x) {
        double p = 1.0;
        for (int k = 0; k < m; ++k) p *= delta[k] - dm + r2 * x;
        return p - r2;
    };
    return find_root_bracketed(f, grow_bracket(f, 0.0), kRootTol);
}

double xi_root_anchored(std::span<const double> delta, int j, double r) {
    check_radius(r);
    const int m = int(delta.size());
    if (j < 0 || j >= m) throw DomainError("xi_root_anchored: anchor out of range");
    const double r2 = r * r;
    // Beyond x0 all factors are positive and increasing; the largest root lies there.
    double x0 = 0.0;
    for (int k = 0; k < m; ++k) x0 = std::max(x0, (delta[j] - delta[k]) / r2);
    auto f = [&](double x) {
        double p = 1.0;
        for (int k = 0; k < m; ++k) p *= delta[k] - delta[j] + r2 * x;
        return p - r2;
    };
    return find_root_bracketed(f, grow_bracket(f, x0), kRootTol);
}

// Each ratio (c_k + x r^2)/(c_k + tau_k + x r^2) increases from c_k/(c_k+tau_k) to 1, and the
// k = m ratio starts at 0, so the product minus r^2 < 1 has exactly one positive zero.
double zeta_root(std::span<const double> sigma, std::span<const double> tau, double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("zeta_root: r must lie in (0, 1)");
    const int m = int(sigma.size());
    if (m < 1 || int(tau.size()) != m) throw DomainError("zeta_root: parameter size mismatch");
    const double sm = sigma[m - 1];
    const double r2 = r * r;
    auto f = [&](double x) {
        double p = 1.0;
        for (int k = 0; k < m; ++k) p *= (sigma[k] - sm + x * r2) / (sigma[k] - sm + tau[k] + x * r2);
        return p - r2;
    };
    return find_root_bracketed(f, grow_bracket(f, 0.0), kRootTol);
}

double xi_inner_root_truncated(std::span<const double> sigma, std::span<const double> tau, double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("xi_inner_root_truncated: r must lie in (0, 1)");
    const int m = int(sigma.size());
    if (m < 1 || int(tau.size()) != m) throw DomainError("xi_inner_root_truncated: parameter size mismatch");
    if (m == 1) return 1.0;
    const double sm = sigma[m - 1], tm = tau[m - 1];
    const double r2 = r * r;
    auto f = [&](double x) {
        double p1 = x, p2 = 1.0;
        for (int k = 0; k < m - 1; ++k) {
            p1 *= (tau[k] + sigma[k] - sm) * (x - r2) + tm * r2;
            p2 *= (sigma[k] - sm) * (x - r2) + tm * r2;
        }
        return p1 - p2;
    };
    Bracket b;
    try {
        b = Bracket::make(f, r2, 1.0);
    } catch (const BracketError&) {
        throw NumericError("xi_inner_root_truncated: no sign change on (r^2, 1); parameters violate the assumptions");
    }
    return find_root_bracketed(f, b, kRootTol);
}

RingGeometry ring_geometry(const LimitParams& p) {
    p.validate();
    RingGeometry g;
    g.params = p;
    const int m = p.m();
    switch (p.family) {
        case LimitFamily::ginibre_fixed:
            g.r_in = 0.0;
            g.r_out = 1.0;
            break;
        case LimitFamily::ginibre_varying: {
            double pin = 1.0, pout = 1.0;
            for (double d : p.delta) {
                pin *= d;
                pout *= 1.0 + d;
            }
            g.r_in = std::sqrt(pin);
            g.r_out = std::sqrt(pout);
            break;
        }
        case LimitFamily::truncated: {
            double pin = 1.0, pout = 1.0;
            for (int k = 0; k < m; ++k) {
                pin *= p.sigma[k] / (p.sigma[k] + p.tau[k]);
                pout *= (1.0 + p.sigma[k]) / (1.0 + p.sigma[k] + p.tau[k]);
            }
            g.r_in = std::sqrt(pin);
            g.r_out = std::sqrt(pout);
            break;
        }
    }
    return g;
}

double SupportIndicator::operator()(double r) const {
    const double ri = geometry.r_in, ro = geometry.r_out;
    if (r == ri || r == ro) return 0.5;
    return (r > ri && r < ro) ? 1.0 : 0.0;
}

namespace {

// sum_k 1/(delta_k - delta_m + r^2 xi) for varying Ginibre, or the truncated analogue.
double density_sum(const LimitParams& p, double r) {
    const int m = p.m();
    const double r2 = r * r;
    if (p.family == LimitFamily::ginibre_varying) {
        const double xi = xi_root(p.delta, r);
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += 1.0 / (p.delta[k] - p.delta[m - 1] + r2 * xi);
        return s;
    }
    const double zeta = zeta_root(p.sigma, p.tau, r);
    const double sm = p.sigma[m - 1];
    double s = 0.0;
    for (int k = 0; k < m; ++k)
        s += 1.0 / (p.sigma[k] - sm + r2 * zeta) - 1.0 / (p.sigma[k] - sm + p.tau[k] + r2 * zeta);
    return s;
}

}  // namespace

double limit_density(const LimitParams& p, cplx z) {
    const double r = std::abs(z);
    if (r == 0.0) throw DomainError("limit_density: z = 0 is excluded");
    const RingGeometry g = ring_geometry(p);
    const double chi = SupportIndicator{g}(r);
    if (chi == 0.0) return 0.0;
    if (p.family == LimitFamily::ginibre_fixed) {
        const int m = p.m();
        return chi / (m * kPi) * std::pow(r, 2.0 / m - 2.0);
    }
    return chi / (kPi * r * r * density_sum(p, r));
}

double rho_scale(const LimitParams& p, cplx u) {
    const double r = std::abs(u);
    if (r == 0.0) throw DomainError("rho_scale: u = 0 is excluded");
    p.validate();
    if (p.family == LimitFamily::ginibre_fixed) {
        const int m = p.m();
        return std::pow(r, -double(m - 1) / m) / std::sqrt(double(m));
    }
    return 1.0 / (r * std::sqrt(density_sum(p, r)));
}

cplx ScaledPoint::z(double rho, int N) const { return u + v / (rho * std::sqrt(double(N))); }

LimitKernel limit_kernel_matrix(std::span<const ScaledPoint> pts, KernelRegime regime, const RingGeometry* geometry) {
    const int n = int(pts.size());
    if (n < 1) throw DomainError("limit_kernel_matrix: no points");
    if (geometry) {
        const double r = std::abs(pts[0].u);
        const double tol = 1e-12 * std::max(1.0, geometry->r_out);
        const bool on_in = geometry->r_in > 0 && std::fabs(r - geometry->r_in) <= tol;
        const bool on_out = std::fabs(r - geometry->r_out) <= tol;
        if (regime == KernelRegime::inner_edge && !on_in)
            throw DomainError("limit_kernel_matrix: inner-edge regime requested away from the inner circle");
        if (regime == KernelRegime::outer_edge && !on_out)
            throw DomainError("limit_kernel_matrix: outer-edge regime requested away from the outer circle");
        if (regime == KernelRegime::bulk && (on_in || on_out || !(r > geometry->r_in && r < geometry->r_out)))
            throw DomainError("limit_kernel_matrix: bulk regime requires an interior point");
    }
    const double phi = pts[0].phi;
    const cplx rot = std::polar(1.0, phi);
    LimitKernel out;
    out.matrix.resize(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            const cplx vk = pts[k].v, vj = pts[j].v;
            const cplx e = std::exp(-0.5 * (std::norm(vk) + std::norm(vj) - 2.0 * vk * std::conj(vj)));
            cplx entry = e / kPi;
            if (regime != KernelRegime::bulk) {
                const cplx arg = (rot * std::conj(vj) + std::conj(rot) * vk) / std::sqrt(2.0);
                const double sgn = regime == KernelRegime::outer_edge ? 1.0 : -1.0;
                entry = 0.5 * entry * erfc_complex(sgn * arg);
            }
            out.matrix(k, j) = entry;
        }
    out.det = out.matrix.determinant();
    return out;
}

Eigen::MatrixXd varying_hessian_matrix(std::span<const double> delta, double r) {
    const int m = int(delta.size());
    const double xi = xi_root(delta, r);
    const double c = r * r * xi;
    Eigen::VectorXd s(m - 1);
    for (int k = 0; k < m - 1; ++k) s[k] = std::sqrt(delta[k] - delta[m - 1] + c);
    Eigen::MatrixXd A(m - 1, m - 1);
    for (int k = 0; k < m - 1; ++k)
        for (int j = 0; j < m - 1; ++j) A(k, j) = 4.0 * c / (s[k] * s[j]) + (k == j ? 4.0 : 0.0);
    return A;
}

double varying_hessian_det(std::span<const double> delta, double r) {
    const int m = int(delta.size());
    const double xi = xi_root(delta, r);
    const double c = r * r * xi;
    double sum = 0.0;
    for (int k = 0; k < m - 1; ++k) sum += 1.0 / (delta[k] - delta[m - 1] + c);
    return std::pow(4.0, m - 1) * (1.0 + c * sum);
}

double log_weight_asymptotic(const LimitParams& p, int N, cplx u, cplx v) {
    p.validate();
    if (N < 1) throw DomainError("log_weight_asymptotic: N >= 1 required");
    const double r = std::abs(u);
    if (r == 0.0) throw DomainError("log_weight_asymptotic: u = 0 is excluded");
    const int m = p.m();
    const double Nd = N, lnN = std::log(Nd), sqN = std::sqrt(Nd);
    const double rho = rho_scale(p, u);
    const double re = 2.0 * (u * std::conj(v)).real();  // u conj(v) + v conj(u)
    const double v2 = std::norm(v);
    const double gauss = 0.5 * (m - 1) * std::log(2.0 * kPi / Nd);

    if (p.family == LimitFamily::ginibre_fixed) {
        double sa = 0.0, lg = 0.0;
        for (double ak : p.a) {
            sa += ak;
            lg += lgam(ak + 1);
        }
        const double t = std::pow(r, -2.0 * (m - 1) / m);
        return -std::log(kPi * std::sqrt(double(m))) + sa * lnN + gauss - lg - Nd * m * std::pow(r, 2.0 / m) -
               sqN * (re / rho) * t - (v2 / (rho * rho)) * t +
               (m - 1.0) / (2.0 * m) * (re / rho) * (re / rho) * t * t * std::pow(r, -2.0 / m) +
               (-(m - 1.0) / m + 2.0 / m * sa) * std::log(r);
    }

    if (p.family == LimitFamily::ginibre_varying) {
        const auto& d = p.delta;
        const double xi = xi_root(d, r);
        const double c = r * r * xi;
        double sum_inv = 0.0, energy = 0.0;
        for (int k = 0; k < m - 1; ++k) {
            const double s2 = d[k] - d[m - 1] + c;
            sum_inv += 1.0 / s2;
            energy += (d[k] - d[m - 1]) * (1.0 - std::log(s2));
        }
        const double D = 1.0 + c * sum_inv;
        double gam = 0.0;
        for (double dk : d) gam += dk * Nd * lnN - lgam(dk * Nd + 1);
        const double az = std::abs(u + v / (rho * sqN));
        const double am = d[m - 1] * Nd;
        const double zpow = am == 0.0 ? 0.0 : 2.0 * am * std::log(az);
        return 0.5 * std::log(xi) - std::log(kPi) - 0.5 * std::log(D) + gauss + gam - Nd * m * c - Nd * energy +
               0.5 * xi * xi * re * re / (rho * rho) * sum_inv / D + zpow - v2 * xi / (rho * rho) - sqN * (re / rho) * xi;
    }

    // truncated
    if (!(r < 1.0)) throw DomainError("log_weight_asymptotic: truncated family needs |u| < 1");
    const auto &sg = p.sigma, &ta = p.tau, &bb = p.b;
    const double r2 = r * r;
    const double xi = xi_inner_root_truncated(sg, ta, r);
    const double sm = sg[m - 1], tm = ta[m - 1], bm = bb[m - 1];
    const double gap = xi - r2;
    const double T = tm * r2 * xi / (gap * gap);
    double sig = 0.0, logdet_rest = 0.0, logq = 0.0, energy = 0.0;
    for (int k = 0; k < m - 1; ++k) {
        const double num = (sg[k] - sm) * gap + tm * r2;
        const double den = (ta[k] + sg[k] - sm) * gap + tm * r2;
        const double s2 = num / den;
        sig += (1.0 - s2) * (1.0 - s2) / (ta[k] * s2);
        logdet_rest += std::log(ta[k]) - 2.0 * std::log1p(-s2);
        logq += (2.0 * (bb[k] - bm) - 1.0) * 0.5 * std::log(s2);
        energy += (sg[k] - sm) * std::log(s2) + ta[k] * std::log1p(-s2);
    }
    double gam = 0.0;
    for (int k = 0; k < m; ++k)
        gam += lgam((sg[k] + ta[k]) * Nd + bb[k] + 2) - lgam(sg[k] * Nd + bb[k] + 1) - lgam(ta[k] * Nd + 1);
    const double az = std::abs(u + v / (rho * sqN));
    const double am = sm * Nd + bm;
    const double zpow = am == 0.0 ? 0.0 : 2.0 * am * std::log(az);
    const double shift = 1.0 - (re / (rho * sqN) + v2 / (rho * rho * Nd)) / gap;
    if (!(shift > 0.0)) return -std::numeric_limits<double>::infinity();
    return gauss + gam + zpow - std::log(kPi) - 0.5 * (std::log1p(T * sig) + logdet_rest) + logq +
           Nd * tm * std::log(shift) + Nd * tm * std::log1p(-r2 / xi) + Nd * energy +
           0.5 * tm * tm * xi * xi / (gap * gap * gap * gap) * re * re / (rho * rho) * sig / (1.0 + T * sig);
}

double parameter_symmetry_check(std::span<const double> delta, double r) {
    const int m = int(delta.size());
    const double xi_m = xi_root(delta, r);
    const double r2 = r * r;
    auto sum_for = [&](int j, double xij) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += 1.0 / (delta[k] - delta[j] + r2 * xij);
        return s;
    };
    const double ref = sum_for(m - 1, xi_m);
    double worst = 0.0;
    for (int j = 0; j < m - 1; ++j) {
        const double xij = (delta[j] - delta[m - 1]) / r2 + xi_m;
        worst = std::max(worst, std::fabs(sum_for(j, xij) - ref) / std::fabs(ref));
    }
    return worst;
}

}  // namespace rmt
