#include "rmt/log_complex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmt/error.hpp"

namespace rmt {

double wrap_phase(double ph) {
    if (!std::isfinite(ph)) return ph;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(ph, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

LogComplex::LogComplex(double lm, double ph) : log_mag(lm), phase(wrap_phase(ph)) {
    if (lm == -std::numeric_limits<double>::infinity()) phase = 0.0;
}

LogComplex LogComplex::from_complex(cplx z) {
    if (z == cplx(0.0, 0.0)) return {};
    // hypot-based modulus avoids overflow in |z|^2
    return {std::log(std::abs(z)), std::arg(z)};
}

LogComplex LogComplex::from_real(double x) {
    if (x == 0.0) return {};
    return {std::log(std::fabs(x)), x < 0 ? std::numbers::pi : 0.0};
}

cplx LogComplex::to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(log_mag), phase);
}

LogComplex operator+(const LogComplex& a, const LogComplex& b) {
    const LogComplex t[2] = {a, b};
    return log_sum_exp_complex(t);
}

LogComplex operator-(const LogComplex& a, const LogComplex& b) {
    const LogComplex t[2] = {a, LogComplex(b.log_mag, b.phase + std::numbers::pi)};
    return log_sum_exp_complex(t);
}

namespace {
// cos/sin that are exact on the axis directions, so that e.g. 1 + e^{i pi} cancels to zero.
cplx unit_phase(double ph) {
    constexpr double pi = std::numbers::pi;
    if (ph == 0.0) return {1.0, 0.0};
    if (ph == pi || ph == -pi) return {-1.0, 0.0};
    if (ph == pi / 2) return {0.0, 1.0};
    if (ph == -pi / 2) return {0.0, -1.0};
    return {std::cos(ph), std::sin(ph)};
}
}  // namespace

LogComplex log_sum_exp_complex(std::span<const LogComplex> terms) {
    if (terms.empty()) throw DomainError("log_sum_exp_complex: empty term list");
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) top = std::max(top, t.log_mag);
    if (top == -std::numeric_limits<double>::infinity()) return {};
    if (!std::isfinite(top)) throw DomainError("log_sum_exp_complex: non-finite term");

    // Neumaier-compensated summation of the scaled terms.
    double sr = 0, si = 0, cr = 0, ci = 0;
    auto acc = [](double& s, double& c, double x) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    };
    for (const auto& t : terms) {
        if (t.is_zero()) continue;
        double r = std::exp(t.log_mag - top);
        cplx u = unit_phase(t.phase);
        acc(sr, cr, r * u.real());
        acc(si, ci, r * u.imag());
    }
    cplx s(sr + cr, si + ci);
    if (s == cplx(0.0, 0.0)) return {};
    return {top + std::log(std::abs(s)), std::arg(s)};
}

}  // namespace rmt
