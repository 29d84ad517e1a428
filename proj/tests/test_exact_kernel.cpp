#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rmt/error.hpp"
#include "rmt/exact_kernel.hpp"
#include "rmt/quadrature.hpp"

using namespace rmt;
using big = boost::multiprecision::cpp_dec_float_50;
constexpr double kPi = std::numbers::pi;

namespace {

// K_0 by its ascending series (fine for moderate x)
double bessel_k0_series(double x) {
    const double y = x * x / 4;
    double term = 1.0, harmonic = 0.0, i0 = 0.0, rest = 0.0;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            term *= y / (double(k) * k);
            harmonic += 1.0 / k;
        }
        i0 += term;
        rest += term * harmonic;
    }
    return -(std::log(x / 2) + std::numbers::egamma) * i0 + rest;
}

// Weight of a product of m <= 3 Ginibre factors as a function of x = |z|^2, built by Mellin convolution
// from the two-factor Bessel form G(x | a, b) = 2 x^{(a+b)/2} K_{a-b}(2 sqrt x).
double weight_oracle(std::vector<double> a, double x) {
    double norm = kPi;
    for (double ak : a) norm *= std::tgamma(ak + 1);
    auto g2 = [&](double y) {
        return 2 * std::pow(y, 0.5 * (a[a.size() - 2] + a.back())) *
               boost::math::cyl_bessel_k(a[a.size() - 2] - a.back(), 2 * std::sqrt(y));
    };
    if (a.size() == 2) return g2(x) / norm;
    auto f = [&](double t) { return t <= 0 ? 0.0 : g2(x / t) * std::pow(t, a[0] - 1) * std::exp(-t); };
    return adaptive_quad_1d<double>(f, Interval{0.0, INFINITY}, QuadratureRule{1, 1e-11, 0.0, 4000}).value / norm;
}

KernelContext unscaled(int N, std::vector<double> a) { return KernelContext::make(EnsembleSpec::ginibre(N, a), false); }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("weight examples") {
    CHECK(log_weight(unscaled(4, {0}), 1.0).log_mag == doctest::Approx(-1.0 - std::log(kPi)).epsilon(1e-14));
    CHECK(log_weight(unscaled(4, {0}), 1.0).phase == 0.0);
    const double k0 = bessel_k0_series(2.0);
    CHECK(std::fabs(k0 - boost::math::cyl_bessel_k(0, 2.0)) < 1e-14);
    CHECK(std::fabs(log_weight(unscaled(4, {0, 0}), cplx(0.6, 0.8)).log_mag - std::log(2 / kPi * k0)) < 1e-8);
    const auto trunc = KernelContext::make(EnsembleSpec::truncated_haar(8, {8}));
    const double r = 0.5;
    CHECK(std::fabs(log_weight(trunc, r).log_mag - std::log(8 / kPi * std::pow(1 - r * r, 7))) < 1e-8);
    CHECK(log_weight(trunc, 1.2).is_zero());
    CHECK_THROWS_AS(log_weight(unscaled(4, {0, 0}), 0.0), DomainError);
}

TEST_CASE("two- and three-factor weights against Mellin-convolution oracles") {
    for (const auto& a : std::vector<std::vector<double>>{{0, 0}, {0.5, 0}, {3, 0}, {0, 0, 0}, {1, 0.5, 0}, {2.5, -0.5, -0.5}})
        for (double x : {0.05, 0.7, 3.0, 12.0}) {
            INFO("m=" << a.size() << " a0=" << a[0] << " x=" << x);
            const double got = log_weight(unscaled(4, a), std::sqrt(x)).log_mag;
            CHECK(std::fabs(got - std::log(weight_oracle(a, x))) < 1e-7);
        }
}

TEST_CASE("weights are normalised probability densities") {
    for (const auto& a : std::vector<std::vector<double>>{{0, 0}, {0.5, 0}, {1, 0, 0}}) {
        const auto ctx = unscaled(3, a);
        auto f = [&](double s) { return 2 * kPi * s * std::exp(log_weight(ctx, s).log_mag); };
        CHECK(adaptive_quad_1d<double>(f, Interval{0.0, INFINITY}, QuadratureRule{1, 1e-9, 0.0, 4000}).value ==
              doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("truncated series examples") {
    const auto one = log_tn(unscaled(1, {0.3, 0}), cplx(0.4, 0.1), cplx(2.0, -1.0));
    CHECK(one.log_mag == 0.0);
    CHECK(one.phase == 0.0);
    double partial = 0.0, fact = 1.0;
    for (int l = 0; l < 20; ++l) {
        if (l > 0) fact *= l;
        partial += 1.0 / fact;
    }
    CHECK(std::fabs(log_tn(unscaled(20, {0}), 1.0, 1.0).to_complex().real() - partial) < 1e-14 * partial);
    // z conj(w) = 0.3 + 0.4i against 50-digit summation
    const cplx x(0.3, 0.4);
    big sr = 0, si = 0, pr = 1, pi = 0;
    for (int l = 0; l < 6; ++l) {
        const big h = boost::math::tgamma(big(1.5) + l) / boost::math::tgamma(big(1.5)) * boost::math::tgamma(big(1) + l);
        sr += pr / h;
        si += pi / h;
        const big nr = pr * big(0.3) - pi * big(0.4), ni = pr * big(0.4) + pi * big(0.3);
        pr = nr;
        pi = ni;
    }
    const cplx oracle(static_cast<double>(sr), static_cast<double>(si));
    CHECK(rel(log_tn(unscaled(6, {0.5, 0}), x, 1.0).to_complex(), oracle) < 1e-13);
}

TEST_CASE("kernel structure") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 0.6);
    for (const auto& ctx : {KernelContext::make(EnsembleSpec::ginibre(12, {0.5, 0})),
                            KernelContext::make(EnsembleSpec::ginibre(6, {1, 0, 0})),
                            KernelContext::make(EnsembleSpec::truncated(10, {0.2, 0.0}, {1.0, 1.5}, {0.0, 0.5}))}) {
        for (int t = 0; t < 10; ++t) {
            const cplx z(g(rng), g(rng)), w(g(rng), g(rng));
            const cplx kzw = log_kernel(ctx, z, w).to_complex(), kwz = log_kernel(ctx, w, z).to_complex();
            CHECK(std::abs(kzw - std::conj(kwz)) <= 1e-12 * std::abs(kzw));
            const LogComplex d = log_kernel(ctx, z, z);
            CHECK(std::fabs(d.phase) < 1e-12);
            if (ctx.spec.family == Family::truncated && std::abs(z) >= 1.0)
                CHECK(d.is_zero());
            else
                CHECK(std::isfinite(d.log_mag));
        }
    }
}

TEST_CASE("one-point function integrates to N") {
    const auto ctx = unscaled(40, {0});
    auto f = [&](double s) { return 2 * kPi * s * log_kernel(ctx, s, s).to_complex().real(); };
    const double total = adaptive_quad_1d<double>(f, Interval{0.0, INFINITY}, QuadratureRule{1, 1e-11, 0.0, 4000}).value;
    CHECK(std::fabs(total - 40.0) < 1e-6);
    // two factors, fractional parameter
    const auto ctx2 = unscaled(10, {0.5, 0});
    auto f2 = [&](double s) { return 2 * kPi * s * log_kernel(ctx2, s, s).to_complex().real(); };
    CHECK(adaptive_quad_1d<double>(f2, Interval{0.0, INFINITY}, QuadratureRule{1, 1e-9, 0.0, 4000}).value ==
          doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("reproducing property of the one-factor kernel") {
    const auto ctx = unscaled(5, {0});
    const std::vector<cplx> pts{{0.3, -0.2}, {-1.0, 0.5}, {1.2, 1.1}};
    QuadratureRule rule{2, 1e-9, 0.0, 4000};
    std::vector<Interval> box{{0.0, INFINITY}, {0.0, 2 * kPi}};
    for (cplx z : pts)
        for (cplx w : pts) {
            auto f = [&](std::span<const double> p) {
                const cplx u = std::polar(p[0], p[1]);
                return p[0] * (log_kernel(ctx, z, u) * log_kernel(ctx, u, w)).to_complex();
            };
            const cplx got = adaptive_quad<cplx>(f, std::span<const Interval>(box), rule).value;
            CHECK(std::abs(got - log_kernel(ctx, z, w).to_complex()) < 1e-6);
        }
}

TEST_CASE("correlation functions") {
    const auto ctx = KernelContext::make(EnsembleSpec::ginibre(16, {0.5, 0}));
    const cplx z(0.3, 0.2);
    const auto r1 = correlation(ctx, {{z}, {}, false});
    CHECK(r1.value == doctest::Approx(log_kernel(ctx, z, z).to_complex().real()).epsilon(1e-14));
    CHECK_THROWS_AS(correlation(ctx, {{z, z}, {}, false}), DomainError);
    CHECK(correlation(ctx, {{z, z}, {}, true}).value == 0.0);
    // gauge invariance
    const std::vector<cplx> pts{{0.1, 0.2}, {-0.4, 0.3}, {0.5, -0.5}, {0.0, -0.2}};
    const auto base = correlation(ctx, {pts, {}, false});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-30.0, 30.0);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> gauge{U(rng), U(rng), U(rng), U(rng)};
        const auto gauged = correlation(ctx, {pts, gauge, false});
        CHECK(std::fabs(gauged.log_value.log_mag - base.log_value.log_mag) < 1e-10 * std::fabs(base.log_value.log_mag) + 1e-10);
    }
    // two-point function by hand
    const cplx a = pts[0], b = pts[1];
    const cplx kab = log_kernel(ctx, a, b).to_complex();
    const double by_hand = log_kernel(ctx, a, a).to_complex().real() * log_kernel(ctx, b, b).to_complex().real() - std::norm(kab);
    CHECK(correlation(ctx, {{a, b}, {}, false}).value == doctest::Approx(by_hand).epsilon(1e-10));
    CHECK_THROWS_AS(correlation(ctx, {std::vector<cplx>(9, 0.1), {}, true}), DomainError);
}

TEST_CASE("orthogonality moments") {
    CHECK(orthogonality_residual(unscaled(4, {0, 0}), 1, 1) < 1e-6);
    CHECK(orthogonality_residual(unscaled(4, {0, 0}), 1, 2) == 0.0);
    CHECK(orthogonality_residual(unscaled(4, {0.5, 0}), 3, 3) < 1e-6);
    CHECK(log_moment_by_quadrature(unscaled(4, {0, 0}), 1) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK_THROWS_AS(orthogonality_residual(unscaled(4, {0, 0}), 5, 5), DomainError);
}

TEST_CASE("joint density") {
    const auto ctx = unscaled(2, {0});
    const std::vector<cplx> pts{{0.3, 0.1}, {-0.5, 0.7}};
    const double w = -std::norm(pts[0]) - std::norm(pts[1]) - 2 * std::log(kPi);
    const double vdm = 2 * std::log(std::abs(pts[1] - pts[0]));
    // C = 1/(N! prod h_l) = 1/2
    CHECK(log_joint_density(ctx, pts) - w - vdm == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    const std::vector<cplx> same{{0.3, 0.1}, {0.3, 0.1}};
    CHECK(log_joint_density(ctx, same) == -INFINITY);
}

TEST_CASE("joint density normalisation by importance sampling") {
    // proposal: iid points with radial density r e^{-r/s}/s^2 and uniform angle
    const auto ctx = unscaled(3, {0, 0});
    const double s = 1.5;
    std::mt19937_64 rng(2024);
    std::gamma_distribution<double> radius(2.0, s);
    std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
    const int samples = 100000;
    double acc = 0.0;
    for (int t = 0; t < samples; ++t) {
        std::vector<cplx> p(3);
        double log_q = 0.0;
        for (auto& z : p) {
            const double r = radius(rng);
            z = std::polar(r, angle(rng));
            log_q += -r / s - std::log(2 * kPi * s * s);
        }
        acc += std::exp(log_joint_density(ctx, p) - log_q);
    }
    CHECK(std::fabs(acc / samples - 1.0) < 0.1);
}
