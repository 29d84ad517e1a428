#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace rmt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

enum class Family { ginibre, truncated };

const char* family_name(Family f);

// Ensemble description. Ginibre products use `a`; truncated-unitary products use
// induced exponents a_k = sigma_k N + b_k and truncation sizes tau_k N (= L_k when integral).
struct EnsembleSpec {
    Family family = Family::ginibre;
    int N = 1;
    int m = 1;
    std::vector<double> a;
    std::vector<double> sigma, tau, b;
    std::vector<int> L;  // optional, equal to tau_k N when present
    std::uint64_t seed = 0;

    static EnsembleSpec ginibre(int N, std::vector<double> a, std::uint64_t seed = 0);
    static EnsembleSpec truncated(int N, std::vector<double> sigma, std::vector<double> tau, std::vector<double> b,
                                  std::uint64_t seed = 0);
    // Plain Haar truncations of U(N + L_k).
    static EnsembleSpec truncated_haar(int N, std::vector<int> L, std::uint64_t seed = 0);

    // Throws ConfigError naming the violated constraint.
    void validate() const;
    // Moves the factor with the smallest parameter to the last slot.
    void normalise();

    // Weight exponents of |z|^2 per factor (a_k, or sigma_k N + b_k).
    std::vector<double> induced() const;
    // Exponents of (1 - r_k^2) in the truncated weight: tau_k N - 1.
    std::vector<double> truncation_exponents() const;

    bool operator==(const EnsembleSpec&) const = default;
};

struct SamplingHooks {
    bool identity_factors = false;  // replace every random factor by a (rectangular) identity
};

// Independent stream for one trial, derived from (seed, trial_index).
Rng trial_stream(std::uint64_t seed, std::uint64_t trial_index);

// Entries with independent N(0, 1/2) real and imaginary parts.
CMatrix sample_complex_gaussian(int rows, int cols, Rng& rng);

// Haar unitary from the QR factorisation of a Gaussian matrix with R's diagonal phases removed.
CMatrix sample_haar_unitary(int n, Rng& rng);

// Factor shapes (rows, cols) of the rectangular chain G_1, ..., G_m.
std::vector<std::pair<int, int>> ginibre_chain_shapes(const EnsembleSpec& spec);

CMatrix sample_ginibre_product(const EnsembleSpec& spec, Rng& rng, const SamplingHooks& hooks = {});
CMatrix sample_truncated_unitary_product(const EnsembleSpec& spec, Rng& rng, const SamplingHooks& hooks = {});

// All eigenvalues of a square matrix. With verify=true, eigenvectors are computed and
// every residual |Mv - lambda v| / |M| is checked against 1e-8.
std::vector<cplx> eigenvalues(const CMatrix& M, bool verify = false);

struct EigenvalueCloud {
    std::vector<cplx> eigenvalues;
    int trial_index = 0;
    bool rescaled = false;
};

struct RunSummary {
    int trials = 0;
    long long eigenvalue_count = 0;
    bool rescaled = false;
    double scale = 1.0;  // eigenvalues were divided by this factor
    double wall_seconds = 0.0;
};

// Samples `trials` independent matrices and hands their spectra to `sink` in trial order.
// Ginibre spectra are divided by N^{m/2} when rescaled is set; truncated spectra never are.
RunSummary run_monte_carlo(const EnsembleSpec& spec, int trials, bool rescaled,
                           const std::function<void(const EigenvalueCloud&)>& sink, int workers = 1);

}  // namespace rmt
