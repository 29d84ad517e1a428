#pragma once

#include <complex>
#include <limits>
#include <span>

namespace rmt {

using cplx = std::complex<double>;

// Complex number stored as (ln|z|, arg z). log_mag = -inf is an exact zero.
struct LogComplex {
    double log_mag = -std::numeric_limits<double>::infinity();
    double phase = 0.0;

    LogComplex() = default;
    LogComplex(double lm, double ph);

    static LogComplex zero() { return {}; }
    static LogComplex one() { return {0.0, 0.0}; }
    static LogComplex from_complex(cplx z);
    // Principal log of a real number; negative values get phase pi.
    static LogComplex from_real(double x);

    bool is_zero() const { return log_mag == -std::numeric_limits<double>::infinity(); }
    cplx to_complex() const;
    // Principal-branch logarithm as an ordinary complex number.
    cplx log() const { return {log_mag, phase}; }

    LogComplex conj() const { return {log_mag, -phase}; }
    LogComplex pow(double e) const { return {e * log_mag, e * phase}; }
    LogComplex sqrt() const { return pow(0.5); }

    friend LogComplex operator*(const LogComplex& a, const LogComplex& b) {
        return {a.log_mag + b.log_mag, a.phase + b.phase};
    }
    friend LogComplex operator/(const LogComplex& a, const LogComplex& b) {
        return {a.log_mag - b.log_mag, a.phase - b.phase};
    }
};

// Wraps an angle into (-pi, pi].
double wrap_phase(double ph);

LogComplex operator+(const LogComplex& a, const LogComplex& b);
LogComplex operator-(const LogComplex& a, const LogComplex& b);

LogComplex log_sum_exp_complex(std::span<const LogComplex> terms);

}  // namespace rmt
