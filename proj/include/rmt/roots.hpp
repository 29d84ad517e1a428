#pragma once

#include <functional>

namespace rmt {

struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;

    // Evaluates f at both ends; throws BracketError without a sign change.
    static Bracket make(const std::function<double(double)>& f, double lo, double hi);
};

// Root inside a valid bracket, returned once the enclosing interval is narrower than tol.
double find_root_bracketed(const std::function<double(double)>& f, const Bracket& bracket, double tol);

// Starting from [lo, lo + 1], doubles the upper end until f changes sign (cap 2^60 above lo).
// Intended for functions negative at lo and increasing.
Bracket grow_bracket(const std::function<double(double)>& f, double lo);

}  // namespace rmt
