#include "rmt/special_functions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "rmt/error.hpp"

namespace rmt {

namespace {

constexpr double kSeriesRealLimit = 2.0;  // series used for |Re z| below this
constexpr double kMaxModulus = 30.0;
const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::numbers::pi);

cplx erf_series(cplx z) {
    // erf z = 2/sqrt(pi) sum_n (-1)^n z^{2n+1} / (n! (2n+1))
    const cplx mz2 = -z * z;
    cplx term = z;
    cplx sum = z;
    const double nmin = std::norm(z);
    for (int n = 1; n < 5000; ++n) {
        term *= mz2 / double(n);
        cplx add = term / double(2 * n + 1);
        sum += add;
        if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
            throw DomainError("erf_complex: overflow for argument modulus " + std::to_string(std::abs(z)));
        if (n > nmin && std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return kTwoOverSqrtPi * sum;
}

// erfc for Re z > 0 via the Laplace continued fraction
// erfc z = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
cplx erfc_cf(cplx z) {
    constexpr double tiny = 1e-300;
    cplx f = z;
    cplx c = z;
    cplx d = 0.0;
    for (int n = 1; n < 20000; ++n) {
        const double an = 0.5 * n;
        d = z + an * d;
        if (std::abs(d) < tiny) d = tiny;
        c = z + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        cplx delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    cplx pref = std::exp(-z * z);
    if (!std::isfinite(pref.real()) || !std::isfinite(pref.imag()))
        throw DomainError("erf_complex: overflow for argument modulus " + std::to_string(std::abs(z)));
    return pref / (std::sqrt(std::numbers::pi) * f);
}

void check_range(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) >= kMaxModulus)
        throw DomainError("erf_complex: |z| must be below 30");
}

}  // namespace

double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) throw DomainError("log_gamma: argument must be finite and positive");
    return boost::math::lgamma(x);
}

cplx erf_complex(cplx z) {
    check_range(z);
    if (std::fabs(z.real()) < kSeriesRealLimit) return erf_series(z);
    if (z.real() > 0) return 1.0 - erfc_cf(z);
    return erfc_cf(-z) - 1.0;
}

cplx erfc_complex(cplx z) {
    check_range(z);
    if (z.real() >= kSeriesRealLimit) return erfc_cf(z);
    if (z.real() <= -kSeriesRealLimit) return 2.0 - erfc_cf(-z);
    return 1.0 - erf_series(z);
}

double erfc_real(double x) {
    if (std::isnan(x)) return x;
    return boost::math::erfc(x);
}

}  // namespace rmt
