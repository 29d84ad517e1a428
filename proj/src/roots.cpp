#include "rmt/roots.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "rmt/error.hpp"

namespace rmt {

Bracket Bracket::make(const std::function<double(double)>& f, double lo, double hi) {
    if (!(lo < hi)) throw BracketError("bracket requires lo < hi");
    Bracket b{lo, hi, f(lo), f(hi)};
    if (!std::isfinite(b.f_lo) || !std::isfinite(b.f_hi)) throw BracketError("bracket end value is not finite");
    if (b.f_lo * b.f_hi > 0)
        throw BracketError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return b;
}

double find_root_bracketed(const std::function<double(double)>& f, const Bracket& b, double tol) {
    if (!(b.lo < b.hi) || b.f_lo * b.f_hi > 0) throw BracketError("invalid bracket");
    if (!(tol > 0)) throw DomainError("find_root_bracketed: tolerance must be positive");
    if (b.f_lo == 0) return b.lo;
    if (b.f_hi == 0) return b.hi;
    const double floor = 4 * std::numeric_limits<double>::epsilon();
    auto done = [tol, floor](double x, double y) {
        return std::fabs(y - x) < tol || std::fabs(y - x) <= floor * std::max(std::fabs(x), std::fabs(y));
    };
    std::uintmax_t iters = 400;
    auto r = boost::math::tools::toms748_solve(f, b.lo, b.hi, b.f_lo, b.f_hi, done, iters);
    if (iters >= 400) throw BracketError("root refinement did not converge");
    // Pick the end with the smaller residual; both lie within tol of the root.
    const double fa = std::fabs(f(r.first)), fb = std::fabs(f(r.second));
    return fa <= fb ? r.first : r.second;
}

Bracket grow_bracket(const std::function<double(double)>& f, double lo) {
    const double flo = f(lo);
    double width = 1.0;
    for (int k = 0; k <= 60; ++k, width *= 2) {
        const double hi = lo + width;
        const double fhi = f(hi);
        if (flo * fhi <= 0) return Bracket{lo, hi, flo, fhi};
    }
    throw BracketError("no sign change found below 2^60");
}

}  // namespace rmt
