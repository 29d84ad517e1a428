#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "rmt/ensembles.hpp"
#include "rmt/log_complex.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

// Immutable precomputation for finite-N kernel evaluation. Safe to share between threads.
struct KernelContext {
    EnsembleSpec spec;
    QuadratureRule quadrature;
    // ln Gamma(a_k + l + 1), l = 0..N, one row per factor.
    std::vector<std::vector<double>> log_gamma_table;
    // ln of the squared norms h_l = int |z|^{2l} w dmu, l = 0..N.
    std::vector<double> log_norms;
    // Ginibre arguments are evaluated at N^{rescale_exponent} z; 0 disables the map.
    double rescale_exponent = 0.0;

    // Ginibre contexts rescale by N^{m/2} unless rescaled=false; truncated contexts never rescale.
    static KernelContext make(const EnsembleSpec& spec, bool rescaled = true, QuadratureRule rule = {});

    double log_scale() const;  // ln of the argument scale factor
};

// ln w_m(z) (phase 0). Zero weight outside the unit disk for the truncated family.
LogComplex log_weight(const KernelContext& ctx, cplx z);

// Same weight as a function of ln|z|^2 in unscaled coordinates.
double log_weight_at(const KernelContext& ctx, double log_abs2);

// Truncated series T_N(z, z') = sum_{l<N} (z conj(z'))^l / h_l.
LogComplex log_tn(const KernelContext& ctx, cplx z, cplx z_prime);

LogComplex log_kernel(const KernelContext& ctx, cplx z, cplx w);

struct CorrelationRequest {
    std::vector<cplx> points;
    // Optional caller cocycle: K_jk -> e^{g_j} K_jk e^{-g_k}.
    std::vector<double> gauge;
    bool allow_degenerate = false;
};

struct CorrelationResult {
    LogComplex log_value;  // ln R_{N,n}
    double value = 0.0;    // R_{N,n} when representable
    bool representable = true;
    bool ill_conditioned = false;
    double condition_number = 1.0;  // of the balanced matrix
};

CorrelationResult correlation(const KernelContext& ctx, const CorrelationRequest& req);

// Relative residual of the j-th/l-th orthogonality moment against the Gamma product.
double orthogonality_residual(const KernelContext& ctx, int j, int l);

// ln of the l-th radial moment computed by quadrature of the weight.
double log_moment_by_quadrature(const KernelContext& ctx, int l);

double log_joint_density(const KernelContext& ctx, std::span<const cplx> points);

// ln int_R e^{h(s)} ds for concave h, using a window centred at the maximiser.
// h may return -inf outside its domain; `hi` bounds the domain from above.
double log_integral_concave_1d(const std::function<double(double)>& h, double guess, double hi,
                               const QuadratureRule& rule);

}  // namespace rmt
