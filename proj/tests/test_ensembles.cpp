#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rmt/asymptotics.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/error.hpp"
#include "rmt/quadrature.hpp"

using namespace rmt;

namespace {

std::vector<double> moduli(const EnsembleSpec& spec, int trials, double scale) {
    std::vector<double> out;
    run_monte_carlo(spec, trials, false, [&](const EigenvalueCloud& c) {
        for (cplx z : c.eigenvalues) out.push_back(std::abs(z) / scale);
    });
    std::sort(out.begin(), out.end());
    return out;
}

double ks_two_sample(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) ++i;
        while (j < y.size() && y[j] <= t) ++j;
        d = std::max(d, std::fabs(double(i) / x.size() - double(j) / y.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("complex Gaussian entries have unit mean square and no pseudo-covariance") {
    Rng rng = trial_stream(1, 0);
    const CMatrix G = sample_complex_gaussian(1000, 1000, rng);
    const double n = double(G.size());
    CHECK(std::fabs(G.squaredNorm() / n - 1.0) < 0.01);
    CHECK(std::abs(G.array().square().sum() / n) < 0.01);
    Rng r1 = trial_stream(9, 4), r2 = trial_stream(9, 4);
    CHECK(sample_complex_gaussian(5, 7, r1) == sample_complex_gaussian(5, 7, r2));
    CHECK_THROWS_AS(sample_complex_gaussian(0, 3, r1), DomainError);
}

TEST_CASE("Haar unitaries are unitary and have E|tr U|^2 = 1") {
    Rng rng = trial_stream(2, 0);
    const CMatrix U = sample_haar_unitary(50, rng);
    CHECK((U.adjoint() * U - CMatrix::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::fabs(std::abs(U.determinant()) - 1.0) < 1e-10);
    double acc = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        Rng r = trial_stream(3, t);
        acc += std::norm(sample_haar_unitary(20, r).trace());
    }
    CHECK(std::fabs(acc / trials - 1.0) < 0.05);
}

TEST_CASE("rectangular chain shapes") {
    const auto spec = EnsembleSpec::ginibre(5, {2, 1, 0});
    const auto shapes = ginibre_chain_shapes(spec);
    REQUIRE(shapes.size() == 3);
    CHECK(shapes[0] == std::make_pair(7, 5));
    CHECK(shapes[1] == std::make_pair(6, 7));
    CHECK(shapes[2] == std::make_pair(5, 6));
    // the smallest parameter is moved last
    const auto moved = EnsembleSpec::ginibre(5, {0, 2, 1});
    CHECK(moved.a.back() == 0.0);
    CHECK_THROWS_AS(ginibre_chain_shapes(EnsembleSpec::ginibre(5, {0.5, 0})), UnsupportedParameters);
    CHECK_THROWS_AS(ginibre_chain_shapes(EnsembleSpec::ginibre(5, {2, 1})), UnsupportedParameters);
}

TEST_CASE("identity hook gives the identity product") {
    Rng rng = trial_stream(0, 0);
    SamplingHooks hooks{true};
    CHECK(sample_ginibre_product(EnsembleSpec::ginibre(2, {0}), rng, hooks) == CMatrix::Identity(2, 2));
    CHECK(sample_ginibre_product(EnsembleSpec::ginibre(4, {2, 1, 0}), rng, hooks) == CMatrix::Identity(4, 4));
    CHECK(sample_truncated_unitary_product(EnsembleSpec::truncated_haar(3, {2, 5}), rng, hooks) ==
          CMatrix::Identity(3, 3));
}

TEST_CASE("second moments of a two-factor product") {
    // E tr(Y*Y) = N^3 by Wick; E sum |lambda|^2 = sum_{l<N} (l+1)^2 from the Gamma moments
    const int N = 64, trials = 100;
    const auto spec = EnsembleSpec::ginibre(N, {0, 0}, 17);
    double frob = 0.0, eig = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = trial_stream(spec.seed, t);
        const CMatrix Y = sample_ginibre_product(spec, rng);
        frob += Y.squaredNorm();
        for (cplx z : eigenvalues(Y)) eig += std::norm(z);
    }
    const double n3 = double(N) * N * N;
    CHECK(std::fabs(frob / trials / n3 - 1.0) < 0.02);
    const double exact = N * (N + 1.0) * (2.0 * N + 1.0) / 6.0;
    CHECK(std::fabs(eig / trials / exact - 1.0) < 0.03);
}

TEST_CASE("truncated blocks are contractions") {
    const auto spec = EnsembleSpec::truncated_haar(24, {3, 30});
    for (int t = 0; t < 20; ++t) {
        Rng rng = trial_stream(5, t);
        const CMatrix M = sample_truncated_unitary_product(spec, rng);
        for (cplx z : eigenvalues(M)) CHECK(std::abs(z) <= 1.0 + 1e-12);
        CHECK(Eigen::JacobiSVD<CMatrix>(M).singularValues()(0) <= 1.0 + 1e-12);
    }
    Rng rng(1);
    CHECK_THROWS_AS(sample_truncated_unitary_product(EnsembleSpec::truncated(4, {0.5}, {1.0}, {0.0}), rng),
                    UnsupportedParameters);
}

TEST_CASE("large truncations approach the Gaussian radial law") {
    const int N = 8, L = 200, trials = 300;
    const auto trunc = moduli(EnsembleSpec::truncated_haar(N, {L}, 21), trials, 1.0 / std::sqrt(double(N + L)));
    const auto gin = moduli(EnsembleSpec::ginibre(N, {0}, 22), trials, 1.0);
    CHECK(ks_two_sample(trunc, gin) < 0.05);
}

TEST_CASE("one-factor truncation against the limiting density") {
    const int N = 32, trials = 200;
    const auto r = moduli(EnsembleSpec::truncated_haar(N, {N}, 31), trials, 1.0);
    // cut inside the bulk; the limiting ring ends at 1/sqrt(2) where finite-N leakage is O(1/sqrt N)
    const double cut = 0.5;
    const double frac = double(r.end() - std::upper_bound(r.begin(), r.end(), cut)) / r.size();
    const auto params = LimitParams::truncated({0.0}, {1.0});
    const auto ring = ring_geometry(params);
    auto radial = [&](double s) { return 2 * std::numbers::pi * s * limit_density(params, cplx(s, 0.0)); };
    const double lim = adaptive_quad_1d<double>(radial, Interval{cut, ring.r_out}, QuadratureRule{}).value;
    CHECK(lim == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(std::fabs(frac - lim) < 0.03);
}

TEST_CASE("eigenvalue examples") {
    CMatrix D = CMatrix::Zero(3, 3);
    D(0, 0) = 1.0;
    D(1, 1) = cplx(0, 2);
    D(2, 2) = -3.0;
    auto ev = eigenvalues(D, true);
    auto by_re = [](cplx x, cplx y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); };
    std::sort(ev.begin(), ev.end(), by_re);
    CHECK(std::abs(ev[0] + 3.0) < 1e-14);
    CHECK(std::abs(ev[1] - cplx(0, 2)) < 1e-14);
    CHECK(std::abs(ev[2] - 1.0) < 1e-14);
    CMatrix C(2, 2);
    C << 0, 1, 1, 0;
    ev = eigenvalues(C, true);
    std::sort(ev.begin(), ev.end(), by_re);
    CHECK(std::abs(ev[0] + 1.0) < 1e-14);
    CHECK(std::abs(ev[1] - 1.0) < 1e-14);
    Rng rng = trial_stream(8, 8);
    const CMatrix R = sample_complex_gaussian(8, 8, rng);
    ev = eigenvalues(R, true);
    cplx sum = 0.0, prod = 1.0;
    for (cplx z : ev) {
        sum += z;
        prod *= z;
    }
    CHECK(std::abs(sum - R.trace()) < 1e-9);
    CHECK(std::abs(prod - R.determinant()) < 1e-9 * std::abs(R.determinant()));
    CMatrix bad = R;
    bad(0, 0) = NAN;
    CHECK_THROWS_AS(eigenvalues(bad), DomainError);
    CHECK_THROWS_AS(eigenvalues(CMatrix::Zero(2, 3)), DomainError);
}

TEST_CASE("cyclic invariance of square products") {
    Rng rng = trial_stream(13, 0);
    const CMatrix G1 = sample_complex_gaussian(12, 12, rng), G2 = sample_complex_gaussian(12, 12, rng);
    auto a = eigenvalues(G2 * G1), b = eigenvalues(G1 * G2);
    // greedy nearest pairing
    for (cplx z : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx x, cplx y) { return std::abs(x - z) < std::abs(y - z); });
        CHECK(std::abs(*it - z) < 1e-8 * (1 + std::abs(z)));
        b.erase(it);
    }
}

TEST_CASE("Monte Carlo bookkeeping and determinism") {
    const auto spec = EnsembleSpec::ginibre(64, {0, 0}, 99);
    const auto s = run_monte_carlo(spec, 100, true, [](const EigenvalueCloud&) {}, 2);
    CHECK(s.eigenvalue_count == 6400);
    CHECK(s.rescaled);
    CHECK(s.scale == doctest::Approx(64.0));
    std::vector<cplx> first, second;
    const auto small = EnsembleSpec::ginibre(16, {1, 0}, 5);
    run_monte_carlo(small, 2, true, [&](const EigenvalueCloud& c) {
        first.insert(first.end(), c.eigenvalues.begin(), c.eigenvalues.end());
    });
    run_monte_carlo(small, 2, true, [&](const EigenvalueCloud& c) {
        second.insert(second.end(), c.eigenvalues.begin(), c.eigenvalues.end());
    }, 3);
    CHECK(first == second);
    int order = 0;
    run_monte_carlo(small, 5, false, [&](const EigenvalueCloud& c) { CHECK(c.trial_index == order++); }, 4);
    CHECK_THROWS_AS(run_monte_carlo(small, 0, false, [](const EigenvalueCloud&) {}), ConfigError);
    // truncated spectra are never rescaled
    CHECK_FALSE(run_monte_carlo(EnsembleSpec::truncated_haar(8, {8}), 1, true, [](const EigenvalueCloud&) {}).rescaled);
}

TEST_CASE("ensemble validation names the violated constraint") {
    CHECK_THROWS_WITH_AS(EnsembleSpec::ginibre(4, {-1.5, 0}), doctest::Contains("a_k > -1"), ConfigError);
    CHECK_THROWS_AS(EnsembleSpec::ginibre(0, {0}), ConfigError);
    CHECK_THROWS_WITH_AS(EnsembleSpec::truncated_haar(4, {0}), doctest::Contains("L_k >= 1"), ConfigError);
    CHECK_THROWS_AS(EnsembleSpec::truncated(4, {-0.1}, {1.0}, {0.0}), ConfigError);
    CHECK_THROWS_AS(EnsembleSpec::truncated(4, {0.0}, {0.0}, {0.0}), ConfigError);
}
