#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rmt/error.hpp"
#include "rmt/log_complex.hpp"
#include "rmt/quadrature.hpp"
#include "rmt/roots.hpp"
#include "rmt/special_functions.hpp"

using namespace rmt;
using big = boost::multiprecision::cpp_dec_float_50;
constexpr double kPi = std::numbers::pi;

namespace {

// Maclaurin series of erf in 50-digit arithmetic; z = x + iy.
cplx erf_oracle(double x, double y) {
    big zr = x, zi = y;
    big z2r = zr * zr - zi * zi, z2i = 2 * zr * zi;
    big tr = zr, ti = zi;  // z^{2n+1} (-1)^n / n!
    big sr = 0, si = 0;
    for (int n = 0; n < 400; ++n) {
        sr += tr / (2 * n + 1);
        si += ti / (2 * n + 1);
        const big nr = -(tr * z2r - ti * z2i) / (n + 1), ni = -(tr * z2i + ti * z2r) / (n + 1);
        tr = nr;
        ti = ni;
    }
    const big c = 2 / boost::multiprecision::sqrt(boost::math::constants::pi<big>());
    return {static_cast<double>(sr * c), static_cast<double>(si * c)};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("log_gamma small values and the half-integer oracle") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::fabs(log_gamma(5.0) - std::log(24.0)) < 1e-14);
    // Gamma(10.5) = sqrt(pi) prod_{k=0}^{9} (k + 1/2), exact shift to 1/2
    big prod = boost::multiprecision::sqrt(boost::math::constants::pi<big>());
    for (int k = 0; k < 10; ++k) prod *= big(k) + big(0.5);
    const double ref = static_cast<double>(boost::multiprecision::log(prod));
    CHECK(std::fabs(log_gamma(10.5) - ref) / ref < 1e-13);
    CHECK_THROWS_AS(log_gamma(0.0), DomainError);
    CHECK_THROWS_AS(log_gamma(-2.5), DomainError);
    CHECK_THROWS_AS(log_gamma(std::nan("")), DomainError);
}

TEST_CASE("erf_complex against the multiprecision series") {
    CHECK(std::abs(erf_complex(0.0)) == 0.0);
    const cplx i1 = erf_complex(cplx(0.0, 1.0));
    CHECK(std::fabs(i1.real()) < 1e-15);
    CHECK(i1.imag() == doctest::Approx(1.6504257587975428).epsilon(1e-13));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> X(-4.0, 4.0), Y(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
        const double x = X(rng), y = Y(rng);
        const cplx ref = erf_oracle(x, y);
        if (std::abs(ref) < 1e-3) continue;
        worst = std::max(worst, rel(erf_complex(cplx(x, y)), ref));
        CHECK(std::abs(erf_complex(cplx(-x, -y)) + erf_complex(cplx(x, y))) <= 1e-14 * std::abs(ref));
    }
    CHECK(worst < 1e-10);
    CHECK_THROWS_AS(erf_complex(cplx(0.0, 31.0)), DomainError);
}

TEST_CASE("erfc_real") {
    CHECK(erfc_real(0.0) == 1.0);
    CHECK(std::fabs(erfc_real(2.0) - (1.0 - erf_oracle(2.0, 0.0).real())) < 1e-16);
    for (double x : {0.1, 0.7, 1.3, 3.0, 5.5})
        CHECK(std::fabs(erfc_real(x) + erfc_real(-x) - 2.0) < 1e-15);
    // no cancellation far in the tail
    CHECK(erfc_real(10.0) == doctest::Approx(2.088487583762545e-45).epsilon(1e-13));
    CHECK(std::abs(erfc_complex(cplx(10.0, 0.0)) - 2.088487583762545e-45) < 1e-57);
}

TEST_CASE("LogComplex arithmetic and round trips") {
    const LogComplex a = LogComplex::from_complex(cplx(-2.0, 0.0));
    CHECK(a.phase == doctest::Approx(kPi));
    const LogComplex p = a * a;
    CHECK(std::fabs(p.phase) < 1e-15);  // pi + pi wraps to 0
    CHECK(LogComplex(0.0, -kPi).phase == doctest::Approx(kPi));
    CHECK(LogComplex::zero().is_zero());
    CHECK(LogComplex::zero().to_complex() == cplx(0.0, 0.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    for (int k = 0; k < 200; ++k) {
        const cplx z(U(rng), U(rng)), w(U(rng), U(rng));
        const LogComplex lz = LogComplex::from_complex(z), lw = LogComplex::from_complex(w);
        CHECK(rel(lz.to_complex(), z) < 1e-12);
        CHECK(rel((lz * lw).to_complex(), z * w) < 1e-12);
        CHECK(rel((lz / lw).to_complex(), z / w) < 1e-12);
        CHECK(rel((lz + lw).to_complex(), z + w) < 1e-10);
    }
}

TEST_CASE("log_sum_exp_complex") {
    const LogComplex one = LogComplex::one();
    std::vector<LogComplex> single{one};
    const LogComplex s = log_sum_exp_complex(single);
    CHECK(s.log_mag == 0.0);
    CHECK(s.phase == 0.0);
    std::vector<LogComplex> cancel{LogComplex(0.0, 0.0), LogComplex(0.0, kPi)};
    CHECK(log_sum_exp_complex(cancel).is_zero());
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> M(-29.0, 29.0), P(-kPi, kPi);
    std::vector<LogComplex> terms;
    cplx naive = 0.0;
    for (int k = 0; k < 50; ++k) {
        terms.emplace_back(M(rng), P(rng));
        naive += terms.back().to_complex();
    }
    CHECK(rel(log_sum_exp_complex(terms).to_complex(), naive) < 1e-12);
    // huge magnitudes stay representable in log form
    std::vector<LogComplex> big_terms{LogComplex(1e5, 0.3), LogComplex(1e5 + std::log(2.0), 0.3)};
    const LogComplex b = log_sum_exp_complex(big_terms);
    CHECK(b.log_mag == doctest::Approx(1e5 + std::log(3.0)).epsilon(1e-15));
    CHECK(b.phase == doctest::Approx(0.3));
    CHECK_THROWS_AS(log_sum_exp_complex(std::vector<LogComplex>{}), DomainError);
}

TEST_CASE("adaptive quadrature basics") {
    QuadratureRule rule;
    auto one = [](double) { return 1.0; };
    CHECK(adaptive_quad_1d<double>(one, Interval{0.0, 1.0}, rule).value == doctest::Approx(1.0).epsilon(1e-15));
    auto gauss = [](double r) { return std::exp(-r * r); };
    CHECK(adaptive_quad_1d<double>(gauss, Interval{0.0, INFINITY}, rule).value ==
          doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-12));
    CHECK(adaptive_quad_1d<double>(gauss, Interval{-INFINITY, INFINITY}, rule).value ==
          doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
    CHECK(adaptive_quad_1d<double>(gauss, Interval{-INFINITY, 0.0}, rule).value ==
          doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-12));
    auto osc = [](double x) { return cplx(std::cos(x), std::sin(x)); };
    const cplx v = adaptive_quad_1d<cplx>(osc, Interval{0.0, kPi}, rule).value;
    CHECK(std::abs(v - cplx(0.0, 2.0)) < 1e-12);
}

TEST_CASE("two-dimensional quadrature against a dense trapezoid oracle") {
    auto f = [](double r1, double r2) {
        if (r1 == 0.0 || r2 == 0.0) return 0.0;
        return std::exp(-r1 * r1 - r2 * r2 - 1.0 / (r1 * r1 * r2 * r2));
    };
    // oracle: 2000^2 trapezoid on [0, 6]^2 (integrand vanishes to all orders at both edges)
    const int n = 2000;
    const double h = 6.0 / n;
    double oracle = 0.0;
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) oracle += f(i * h, j * h);
    oracle *= h * h;
    QuadratureRule rule{2, 1e-9, 0.0, 4000};
    std::vector<Interval> box{{0.0, INFINITY}, {0.0, INFINITY}};
    auto g = [&](std::span<const double> x) { return f(x[0], x[1]); };
    const auto r = adaptive_quad<double>(g, std::span<const Interval>(box), rule);
    CHECK(std::fabs(r.value - oracle) / oracle < 1e-7);
}

TEST_CASE("three-dimensional nested quadrature") {
    QuadratureRule rule{3, 1e-9, 0.0, 4000};
    std::vector<Interval> box{{0.0, 1.0}, {0.0, 2.0}, {-1.0, 1.0}};
    auto g = [](std::span<const double> x) { return x[0] * x[1] * x[1] * std::exp(x[2]); };
    const double exact = 0.5 * (8.0 / 3.0) * (std::exp(1.0) - std::exp(-1.0));
    CHECK(adaptive_quad<double>(g, std::span<const Interval>(box), rule).value == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("quadrature error estimates are conservative") {
    struct Case {
        std::function<double(double)> f;
        double a, b, exact;
    };
    const std::vector<Case> cases = {
        {[](double x) { return x * x; }, 0, 1, 1.0 / 3},
        {[](double x) { return std::exp(x); }, 0, 1, std::exp(1.0) - 1},
        {[](double x) { return std::sqrt(x); }, 0, 1, 2.0 / 3},
        {[](double x) { return 1 / std::sqrt(x); }, 0, 1, 2.0},
        {[](double x) { return std::log(x); }, 0, 1, -1.0},
        {[](double x) { return std::sin(x); }, 0, kPi, 2.0},
        {[](double x) { return std::cos(50 * x); }, 0, kPi, 0.0},
        {[](double x) { return 1 / (1 + x * x); }, -1, 1, kPi / 2},
        {[](double x) { return 1 / (1 + 25 * x * x); }, -1, 1, 0.4 * std::atan(5.0)},
        {[](double x) { return std::fabs(x - 0.3); }, 0, 1, 0.5 * (0.09 + 0.49)},
        {[](double x) { return std::exp(-x); }, 0, INFINITY, 1.0},
        {[](double x) { return 1 / (1 + x * x); }, 0, INFINITY, kPi / 2},
        {[](double x) { return std::exp(-x * x / 2); }, -INFINITY, INFINITY, std::sqrt(2 * kPi)},
        {[](double x) { return x * std::exp(-x); }, 0, INFINITY, 1.0},
        {[](double x) { return std::pow(x, -0.9); }, 0, 1, 10.0},
        {[](double x) { return std::pow(x, 5); }, -2, 3, (729.0 - 64.0) / 6},
        {[](double x) { return x < 0.5 ? 1.0 : 0.0; }, 0, 1, 0.5},
        {[](double x) { return std::exp(-100 * (x - 0.5) * (x - 0.5)); }, 0, 1, std::sqrt(kPi) / 10 * std::erf(5.0)},
        {[](double x) { return std::log(1 + x) / x; }, 1e-300, 1, kPi * kPi / 12},
        {[](double x) { return std::sin(x) / x; }, 1e-300, 1, 0.94608307036718301494},
    };
    QuadratureRule rule{1, 1e-8, 0.0, 4000};
    for (const Case& c : cases) {
        const auto r = adaptive_quad_1d<double>(c.f, Interval{c.a, c.b}, rule);
        const double err = std::fabs(r.value - c.exact);
        INFO("case exact=" << c.exact << " a=" << c.a << " value=" << r.value);
        CHECK(err <= 3.0 * r.error);
    }
}

TEST_CASE("quadrature budget exhaustion carries the best estimate") {
    QuadratureRule rule{1, 1e-14, 0.0, 3};
    auto f = [](double x) { return std::sin(1.0 / x); };
    try {
        adaptive_quad_1d<double>(f, Interval{1e-6, 1.0}, rule);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::isfinite(e.best_re));
        CHECK(e.achieved_error > 0.0);
    }
    CHECK_THROWS_AS((QuadratureRule{1, 0.0, 0.0, 10}.validate()), DomainError);
    CHECK_THROWS_AS((QuadratureRule{4, 1e-8, 0.0, 10}.validate()), DomainError);
}

TEST_CASE("principal value integrals") {
    QuadratureRule rule;
    CHECK(std::fabs(pv_quad_1d<double>([](double) { return 1.0; }, 1.0, rule).value) < 1e-15);
    CHECK(pv_quad_1d<double>([](double t) { return t; }, 1.7, rule).value == doctest::Approx(3.4).epsilon(1e-14));
    double series = 0.0, fact = 1.0;
    for (int k = 0; k < 20; ++k) {
        if (k > 0) fact *= (2 * k) * (2 * k + 1);
        series += 2.0 / ((2 * k + 1) * fact);
    }
    const double pv = pv_quad_1d<double>([](double t) { return std::exp(t); }, 1.0, rule).value;
    CHECK(std::fabs(pv - series) < 1e-13);
    CHECK(series == doctest::Approx(2.11450175).epsilon(1e-8));
    for (auto g : std::vector<std::function<double(double)>>{[](double t) { return std::exp(t); },
                                                             [](double t) { return std::cos(3 * t) + t * t * t; },
                                                             [](double t) { return 1.0 / (2.0 + t); }}) {
        const double fwd = pv_quad_1d<double>(g, 1.0, rule).value;
        const double rev = pv_quad_1d<double>([&](double t) { return g(-t); }, 1.0, rule).value;
        CHECK(std::fabs(fwd + rev) < 1e-13);
    }
}

TEST_CASE("bracketed roots") {
    auto q = [](double x) { return x * x - 4.0; };
    CHECK(find_root_bracketed(q, Bracket::make(q, 0.0, 10.0), 1e-14) == doctest::Approx(2.0).epsilon(1e-14));
    auto g = [](double x) { return x * (1 + x) - 1; };
    CHECK(find_root_bracketed(g, Bracket::make(g, 0.0, 2.0), 1e-14) ==
          doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-14));
    CHECK_THROWS_AS(Bracket::make(q, 3.0, 10.0), BracketError);
    // growth from the left end
    auto h = [](double x) { return x - 1000.5; };
    const Bracket b = grow_bracket(h, 0.0);
    CHECK(b.lo < 1000.5);
    CHECK(b.hi > 1000.5);
    CHECK_THROWS_AS(grow_bracket([](double) { return -1.0; }, 0.0), BracketError);
}

TEST_CASE("largest root of the ring equation against a sign scan") {
    // prod_k (delta_k - delta_m + r^2 x) = r^2 with delta = (1, 0.5, 0), r = 0.8
    const double r2 = 0.64;
    auto f = [&](double x) { return (1 + r2 * x) * (0.5 + r2 * x) * (r2 * x) - r2; };
    const double root = find_root_bracketed(f, grow_bracket(f, 0.0), 1e-14);
    double scan = 0.0;
    for (double x = 0.0; x < 5.0; x += 1e-6)
        if (f(x) <= 0 && f(x + 1e-6) > 0) scan = x;
    CHECK(std::fabs(root - scan) < 1e-6);
}

TEST_CASE("random monotone polynomials change sign at the returned root") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    for (int t = 0; t < 100; ++t) {
        const double c1 = U(rng), c3 = U(rng), c0 = -5 * U(rng);
        auto f = [&](double x) { return c3 * x * x * x + c1 * x + c0; };
        const double tol = 1e-12;
        const double x = find_root_bracketed(f, Bracket::make(f, -10.0, 10.0), tol);
        CHECK(f(x - tol) * f(x + tol) <= 0.0);
    }
}
