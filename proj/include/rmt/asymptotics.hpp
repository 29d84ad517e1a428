#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace rmt {

using cplx = std::complex<double>;

enum class LimitFamily { ginibre_fixed, ginibre_varying, truncated };

const char* limit_family_name(LimitFamily f);

// Parameters of a large-N regime. The factor with the smallest parameter is kept last.
//   ginibre_fixed:   a (fixed exponents, only used by the weight asymptotics)
//   ginibre_varying: delta, with a_k = delta_k N
//   truncated:       sigma, tau, b, with a_k = sigma_k N + b_k and truncation tau_k N
struct LimitParams {
    LimitFamily family = LimitFamily::ginibre_fixed;
    std::vector<double> a, delta, sigma, tau, b;

    static LimitParams fixed(std::vector<double> a);
    static LimitParams varying(std::vector<double> delta);
    static LimitParams truncated(std::vector<double> sigma, std::vector<double> tau, std::vector<double> b = {});

    int m() const;
    void validate() const;
};

// Unique x > 0 with prod_k (delta_k - delta_m + r^2 x) = r^2.
double xi_root(std::span<const double> delta, double r);
// Largest real root of prod_k (delta_k - delta_j + r^2 x) = r^2, anchored at factor j.
double xi_root_anchored(std::span<const double> delta, int j, double r);
// Unique x > 0 with prod_k (sigma_k - sigma_m + x r^2)/(sigma_k - sigma_m + tau_k + x r^2) = r^2.
double zeta_root(std::span<const double> sigma, std::span<const double> tau, double r);
// Root of x prod_{k<m}((tau_k + sigma_k - sigma_m)(x - r^2) + tau_m r^2)
//         - prod_{k<m}((sigma_k - sigma_m)(x - r^2) + tau_m r^2) on (r^2, 1].
double xi_inner_root_truncated(std::span<const double> sigma, std::span<const double> tau, double r);

struct RingGeometry {
    double r_in = 0.0;
    double r_out = 1.0;
    LimitParams params;
};

RingGeometry ring_geometry(const LimitParams& params);

// 1 inside the ring, exactly 1/2 on either boundary circle, 0 outside.
struct SupportIndicator {
    RingGeometry geometry;
    double operator()(double r) const;
};

double limit_density(const LimitParams& params, cplx z);
double rho_scale(const LimitParams& params, cplx u);

struct ScaledPoint {
    cplx u;
    cplx v;
    double phi = 0.0;  // edge angle arg(u)
    cplx z(double rho, int N) const;
};

enum class KernelRegime { bulk, inner_edge, outer_edge };

struct LimitKernel {
    Eigen::MatrixXcd matrix;
    cplx det;
};

// Limiting kernel matrix (K(v_k, v_j))_{k,j}. When `geometry` is given, the regime is checked
// against |u| (edge regimes require |u| on the matching circle).
LimitKernel limit_kernel_matrix(std::span<const ScaledPoint> points, KernelRegime regime,
                                const RingGeometry* geometry = nullptr);

// Leading-order ln w_m at the point N^{m/2}(u + v/(rho sqrt N)) (Ginibre) or u + v/(rho sqrt N) (truncated),
// rho = rho_scale(params, u). For the truncated family `params.tau` is the exponent of (1 - r^2) divided by N.
double log_weight_asymptotic(const LimitParams& params, int N, cplx u, cplx v);

// Hessian (in the radial variables r_k) of the varying-parameter weight exponent at its saddle,
// and its determinant 4^{m-1}(1 + r^2 xi sum_{k<m} s_k^{-2}).
Eigen::MatrixXd varying_hessian_matrix(std::span<const double> delta, double r);
double varying_hessian_det(std::span<const double> delta, double r);

// max_j |S_j - S_m| / |S_m| with S_j = sum_k 1/(delta_k - delta_j + r^2 xi_j), xi_j from the anchor shift.
double parameter_symmetry_check(std::span<const double> delta, double r);

}  // namespace rmt
