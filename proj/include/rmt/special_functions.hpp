#pragma once

#include <complex>

namespace rmt {

using cplx = std::complex<double>;

// ln Gamma(x) for finite x > 0.
double log_gamma(double x);

// Entire error function on |z| < 30. Throws DomainError when the result overflows.
cplx erf_complex(cplx z);

// 1 - erf(z), accurate where erf(z) is close to 1.
cplx erfc_complex(cplx z);

double erfc_real(double x);

}  // namespace rmt
