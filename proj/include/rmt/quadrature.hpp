#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include "rmt/error.hpp"

namespace rmt {

// Adaptive Gauss-Kronrod (7/15) settings. Nested integrals share one rule.
struct QuadratureRule {
    int dimension = 1;
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 4000;

    void validate() const {
        if (dimension < 1 || dimension > 3) throw DomainError("QuadratureRule: dimension must be 1..3");
        if (!(rule_ok(rel_tol)) || !(abs_tol >= 0.0) || max_subdivisions < 1)
            throw DomainError("QuadratureRule: tolerance must lie in (0, 1)");
    }

private:
    static bool rule_ok(double t) { return t > 0.0 && t < 1.0; }
};

template <class V>
struct QuadResult {
    V value{};
    double error = 0.0;
};

struct Interval {
    double lo;
    double hi;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct is_quad_result : std::false_type {};
template <class V>
struct is_quad_result<QuadResult<V>> : std::true_type {};

template <class V, class F>
QuadResult<V> call_point(F& f, double x) {
    using R = std::invoke_result_t<F&, double>;
    if constexpr (is_quad_result<R>::value) {
        return f(x);
    } else {
        return {V(f(x)), 0.0};
    }
}

template <class V>
struct Segment {
    double a, b;
    V value;
    double error;
    double resabs;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class V, class F>
Segment<V> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    V lo[7], hi[7];
    QuadResult<V> fc = call_point<V>(f, c);
    V k = fc.value * kWgk[7];
    V g = fc.value * kWg[3];
    double abs_sum = std::abs(fc.value) * kWgk[7];
    double err_sum = fc.error * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        QuadResult<V> f1 = call_point<V>(f, c - dx);
        QuadResult<V> f2 = call_point<V>(f, c + dx);
        lo[j] = f1.value;
        hi[j] = f2.value;
        k += (f1.value + f2.value) * kWgk[j];
        abs_sum += (std::abs(f1.value) + std::abs(f2.value)) * kWgk[j];
        err_sum += (f1.error + f2.error) * kWgk[j];
        if (j % 2 == 1) g += (f1.value + f2.value) * kWg[j / 2];
    }
    // spread about the mean inflates |K - G| the way QUADPACK does; a bare
    // |K - G| is too optimistic next to strong endpoint singularities
    const V mean = k * 0.5;
    double asc = std::abs(fc.value - mean) * kWgk[7];
    for (int j = 0; j < 7; ++j) asc += (std::abs(lo[j] - mean) + std::abs(hi[j] - mean)) * kWgk[j];
    asc *= std::fabs(h);
    double diff = std::abs((k - g) * h);
    if (asc > 0.0 && diff > 0.0) diff = std::max(diff, asc * std::min(1.0, std::pow(200.0 * diff / asc, 1.5)));
    Segment<V> s;
    s.a = a;
    s.b = b;
    s.value = k * h;
    s.resabs = abs_sum * std::fabs(h);
    s.error = diff + err_sum * std::fabs(h);
    return s;
}

template <class V>
void raise_quadrature_failure(const V& best, double err, const char* what) {
    if constexpr (std::is_same_v<V, std::complex<double>>) {
        throw QuadratureError(what, best.real(), best.imag(), err);
    } else {
        throw QuadratureError(what, double(best), 0.0, err);
    }
}

// Finite-interval global adaptive integration.
template <class V, class F>
QuadResult<V> adaptive_finite(F& f, double a, double b, const QuadratureRule& rule) {
    if (a == b) return {V{}, 0.0};
    std::priority_queue<Segment<V>> heap;
    std::vector<Segment<V>> frozen;
    heap.push(gk15<V>(f, a, b));
    int nseg = 1;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    V total = heap.top().value;
    double err = heap.top().error, resabs = heap.top().resabs;
    auto recompute = [&] {
        total = V{};
        err = 0.0;
        resabs = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            total += copy.top().value;
            err += copy.top().error;
            resabs += copy.top().resabs;
            copy.pop();
        }
        for (const auto& s : frozen) {
            total += s.value;
            err += s.error;
            resabs += s.resabs;
        }
    };
    auto converged = [&] {
        const double target = std::max(rule.abs_tol, rule.rel_tol * std::abs(total));
        return err <= target || err <= 50.0 * eps * resabs || heap.empty();
    };
    for (;;) {
        if (converged()) {
            recompute();
            if (converged()) return {total, err};
        }
        if (nseg >= rule.max_subdivisions) {
            recompute();
            raise_quadrature_failure(total, err, "adaptive quadrature: subdivision budget exhausted");
        }
        Segment<V> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(std::fabs(worst.b - worst.a) > 1e-13 * (std::fabs(worst.a) + std::fabs(worst.b))) || mid == worst.a ||
            mid == worst.b) {
            frozen.push_back(worst);
            continue;
        }
        Segment<V> left = gk15<V>(f, worst.a, mid);
        Segment<V> right = gk15<V>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
        ++nseg;
    }
}

}  // namespace detail

// One-dimensional adaptive integral over [lo, hi]; either end may be infinite.
// The integrand returns V (real or complex) or QuadResult<V> for nested use.
template <class V, class F>
QuadResult<V> adaptive_quad_1d(F&& f, Interval iv, const QuadratureRule& rule) {
    rule.validate();
    const double a = iv.lo, b = iv.hi;
    if (std::isnan(a) || std::isnan(b) || !(a <= b)) throw DomainError("adaptive_quad: invalid interval");
    const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
    auto safe = [](QuadResult<V> r, double jac) {
        if (r.value == V{} && r.error == 0.0) return r;
        r.value *= jac;
        r.error *= std::fabs(jac);
        return r;
    };
    if (!lo_inf && !hi_inf) {
        return detail::adaptive_finite<V>(f, a, b, rule);
    }
    if (!lo_inf && hi_inf) {
        auto g = [&](double t) {
            const double s = 1.0 - t;
            return safe(detail::call_point<V>(f, a + t / s), 1.0 / (s * s));
        };
        return detail::adaptive_finite<V>(g, 0.0, 1.0, rule);
    }
    if (lo_inf && !hi_inf) {
        auto g = [&](double t) {
            const double s = 1.0 - t;
            return safe(detail::call_point<V>(f, b - t / s), 1.0 / (s * s));
        };
        return detail::adaptive_finite<V>(g, 0.0, 1.0, rule);
    }
    auto g = [&](double t) {
        const double s = 1.0 - t * t;
        return safe(detail::call_point<V>(f, t / s), (1.0 + t * t) / (s * s));
    };
    return detail::adaptive_finite<V>(g, -1.0, 1.0, rule);
}

// Tensor adaptive integral over a box of dimension 1..3 (nested one-dimensional rules).
template <class V, class F>
QuadResult<V> adaptive_quad(F&& f, std::span<const Interval> box, const QuadratureRule& rule) {
    const int d = int(box.size());
    if (d < 1 || d > 3) throw DomainError("adaptive_quad: dimension must be 1, 2 or 3");
    std::array<double, 3> x{};
    std::function<QuadResult<V>(int)> level = [&](int k) -> QuadResult<V> {
        auto inner = [&](double xk) -> QuadResult<V> {
            x[k] = xk;
            if (k + 1 == d) return {V(f(std::span<const double>(x.data(), d))), 0.0};
            return level(k + 1);
        };
        QuadratureRule r = rule;
        if (k > 0) r.rel_tol = rule.rel_tol * 0.25;
        return adaptive_quad_1d<V>(inner, box[k], r);
    };
    return level(0);
}

// Principal value PV int_{-h}^{h} g(t)/t dt via int_0^h (g(t) - g(-t))/t dt.
template <class V, class G>
QuadResult<V> pv_quad_1d(G&& g, double halfwidth, const QuadratureRule& rule) {
    if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) throw DomainError("pv_quad_1d: halfwidth must be positive");
    auto h = [&](double t) -> QuadResult<V> {
        QuadResult<V> p = detail::call_point<V>(g, t);
        QuadResult<V> m = detail::call_point<V>(g, -t);
        return {(p.value - m.value) / t, (p.error + m.error) / t};
    };
    return adaptive_quad_1d<V>(h, Interval{0.0, halfwidth}, rule);
}

}  // namespace rmt
