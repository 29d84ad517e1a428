#include "rmt/ensembles.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <sstream>

#include "rmt/error.hpp"
#include "rmt/parallel.hpp"

namespace rmt {

const char* family_name(Family f) { return f == Family::ginibre ? "ginibre" : "truncated"; }

EnsembleSpec EnsembleSpec::ginibre(int N, std::vector<double> a, std::uint64_t seed) {
    EnsembleSpec s;
    s.family = Family::ginibre;
    s.N = N;
    s.m = int(a.size());
    s.a = std::move(a);
    s.seed = seed;
    s.validate();
    s.normalise();
    return s;
}

EnsembleSpec EnsembleSpec::truncated(int N, std::vector<double> sigma, std::vector<double> tau, std::vector<double> b,
                                     std::uint64_t seed) {
    EnsembleSpec s;
    s.family = Family::truncated;
    s.N = N;
    s.m = int(sigma.size());
    s.sigma = std::move(sigma);
    s.tau = std::move(tau);
    s.b = std::move(b);
    s.seed = seed;
    s.validate();
    s.normalise();
    return s;
}

EnsembleSpec EnsembleSpec::truncated_haar(int N, std::vector<int> L, std::uint64_t seed) {
    EnsembleSpec s;
    s.family = Family::truncated;
    s.N = N;
    s.m = int(L.size());
    s.sigma.assign(s.m, 0.0);
    s.b.assign(s.m, 0.0);
    for (int l : L) s.tau.push_back(double(l) / N);
    s.L = std::move(L);
    s.seed = seed;
    s.validate();
    return s;
}

void EnsembleSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (N < 1) fail("N must be >= 1");
    if (m < 1) fail("m must be >= 1");
    auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    if (family == Family::ginibre) {
        if (int(a.size()) != m) fail("a must have m entries");
        if (!finite(a)) fail("a_k must be finite");
        for (double x : a)
            if (!(x > -1.0)) fail("a_k > -1 violated");
        if (!sigma.empty() || !tau.empty() || !b.empty() || !L.empty())
            fail("truncation parameters are not allowed for the ginibre family");
        return;
    }
    if (!a.empty()) fail("a is not allowed for the truncated family (use sigma and b)");
    if (int(sigma.size()) != m || int(tau.size()) != m || int(b.size()) != m)
        fail("sigma, tau and b must have m entries");
    if (!finite(sigma) || !finite(tau) || !finite(b)) fail("truncation parameters must be finite");
    if (!L.empty()) {
        if (int(L.size()) != m) fail("L must have m entries");
        for (int k = 0; k < m; ++k) {
            if (L[k] < 1) fail("L_k >= 1 violated");
            if (std::fabs(tau[k] * N - L[k]) > 1e-9 * L[k]) fail("L_k must equal tau_k N");
        }
    }
    for (int k = 0; k < m; ++k) {
        if (!(sigma[k] >= 0.0)) fail("sigma_k >= 0 violated");
        if (!(tau[k] > 0.0)) fail("tau_k > 0 violated");
        if (!(sigma[k] * N + b[k] > -1.0)) fail("sigma_k N + b_k > -1 violated");
    }
}

void EnsembleSpec::normalise() {
    int best = m - 1;
    if (family == Family::ginibre) {
        for (int k = 0; k < m; ++k)
            if (a[k] < a[best]) best = k;
        std::swap(a[best], a[m - 1]);
        return;
    }
    auto key = [&](int k) { return std::make_pair(sigma[k], sigma[k] * N + b[k]); };
    for (int k = 0; k < m; ++k)
        if (key(k) < key(best)) best = k;
    std::swap(sigma[best], sigma[m - 1]);
    std::swap(tau[best], tau[m - 1]);
    std::swap(b[best], b[m - 1]);
    if (!L.empty()) std::swap(L[best], L[m - 1]);
}

std::vector<double> EnsembleSpec::induced() const {
    if (family == Family::ginibre) return a;
    std::vector<double> out(m);
    for (int k = 0; k < m; ++k) out[k] = sigma[k] * N + b[k];
    return out;
}

std::vector<double> EnsembleSpec::truncation_exponents() const {
    std::vector<double> out(m);
    for (int k = 0; k < m; ++k) out[k] = L.empty() ? tau[k] * N - 1.0 : double(L[k]) - 1.0;
    return out;
}

Rng trial_stream(std::uint64_t seed, std::uint64_t trial_index) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(trial_index),
                      std::uint32_t(trial_index >> 32), 0x726d74u};
    return Rng(seq);
}

CMatrix sample_complex_gaussian(int rows, int cols, Rng& rng) {
    if (rows < 1 || cols < 1) throw DomainError("sample_complex_gaussian: dimensions must be >= 1");
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    CMatrix G(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            G(i, j) = cplx(re, im);
        }
    return G;
}

CMatrix sample_haar_unitary(int n, Rng& rng) {
    if (n < 1) throw DomainError("sample_haar_unitary: n must be >= 1");
    CMatrix G = sample_complex_gaussian(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(G);
    CMatrix Q = qr.householderQ();
    const CMatrix& R = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
        const cplx d = R(j, j);
        const double ad = std::abs(d);
        Q.col(j) *= (ad > 0 ? d / ad : cplx(1.0));
    }
    return Q;
}

std::vector<std::pair<int, int>> ginibre_chain_shapes(const EnsembleSpec& spec) {
    if (spec.family != Family::ginibre) throw UnsupportedParameters("chain shapes apply to the ginibre family");
    const int N = spec.N, m = spec.m;
    std::vector<int> extra(m);
    for (int k = 0; k < m; ++k) {
        const double ak = spec.a[k];
        if (ak < 0 || ak != std::floor(ak))
            throw UnsupportedParameters(
                "Monte Carlo needs non-negative integer a_k; use the exact kernel for general a_k > -1");
        extra[k] = int(ak);
    }
    if (extra[m - 1] != 0)
        throw UnsupportedParameters("Monte Carlo needs the smallest parameter a_m = 0");
    // dimension profile N -> N+a_1 -> ... -> N+a_{m-1} -> N
    std::vector<std::pair<int, int>> shapes;
    int cols = N;
    for (int k = 0; k < m; ++k) {
        const int rows = (k == m - 1) ? N : N + extra[k];
        shapes.emplace_back(rows, cols);
        cols = rows;
    }
    return shapes;
}

CMatrix sample_ginibre_product(const EnsembleSpec& spec, Rng& rng, const SamplingHooks& hooks) {
    const auto shapes = ginibre_chain_shapes(spec);
    CMatrix M;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const auto [rows, cols] = shapes[k];
        CMatrix G = hooks.identity_factors ? CMatrix(CMatrix::Identity(rows, cols))
                                           : sample_complex_gaussian(rows, cols, rng);
        M = (k == 0) ? G : CMatrix(G * M);
    }
    return M;
}

CMatrix sample_truncated_unitary_product(const EnsembleSpec& spec, Rng& rng, const SamplingHooks& hooks) {
    if (spec.family != Family::truncated) throw UnsupportedParameters("expected the truncated family");
    if (spec.L.empty()) throw UnsupportedParameters("Monte Carlo needs integer truncation sizes L_k");
    for (int k = 0; k < spec.m; ++k)
        if (spec.sigma[k] != 0.0 || spec.b[k] != 0.0)
            throw UnsupportedParameters(
                "Monte Carlo needs sigma_k = b_k = 0; use the exact kernel for induced truncations");
    const int N = spec.N;
    CMatrix M;
    for (int k = 0; k < spec.m; ++k) {
        CMatrix U = hooks.identity_factors ? CMatrix(CMatrix::Identity(N + spec.L[k], N + spec.L[k]))
                                           : sample_haar_unitary(N + spec.L[k], rng);
        CMatrix block = U.topLeftCorner(N, N);
        M = (k == 0) ? block : CMatrix(block * M);
    }
    return M;
}

std::vector<cplx> eigenvalues(const CMatrix& M, bool verify) {
    if (M.rows() != M.cols() || M.rows() < 1) throw DomainError("eigenvalues: square matrix required");
    if (M.rows() > 512) throw DomainError("eigenvalues: N <= 512 supported");
    if (!M.allFinite()) throw DomainError("eigenvalues: non-finite entries");
    Eigen::ComplexEigenSolver<CMatrix> es(M, verify);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "eigensolver did not converge (n=" << M.rows() << ", max iterations "
           << es.getMaxIterations() * M.rows() << ")";
        throw NumericError(os.str());
    }
    const auto& ev = es.eigenvalues();
    std::vector<cplx> out(ev.data(), ev.data() + ev.size());
    if (verify) {
        const double norm = M.norm();
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            Eigen::VectorXcd v = es.eigenvectors().col(j);
            const double res = (M * v - ev[j] * v).norm() / (v.norm() * (norm > 0 ? norm : 1.0));
            if (!(res < 1e-8)) throw NumericError("eigenpair residual " + std::to_string(res) + " exceeds 1e-8");
        }
    }
    return out;
}

RunSummary run_monte_carlo(const EnsembleSpec& spec, int trials, bool rescaled,
                           const std::function<void(const EigenvalueCloud&)>& sink, int workers) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary summary;
    summary.trials = trials;
    summary.rescaled = rescaled && spec.family == Family::ginibre;
    summary.scale = summary.rescaled ? std::pow(double(spec.N), 0.5 * spec.m) : 1.0;

    std::vector<EigenvalueCloud> clouds(trials);
    parallel_for(std::size_t(trials), workers, [&](std::size_t t) {
        Rng rng = trial_stream(spec.seed, t);
        CMatrix M = spec.family == Family::ginibre ? sample_ginibre_product(spec, rng)
                                                   : sample_truncated_unitary_product(spec, rng);
        EigenvalueCloud c;
        c.trial_index = int(t);
        c.rescaled = summary.rescaled;
        c.eigenvalues = eigenvalues(M);
        if (summary.rescaled)
            for (auto& z : c.eigenvalues) z /= summary.scale;
        clouds[t] = std::move(c);
    });
    for (const auto& c : clouds) {
        summary.eigenvalue_count += (long long)c.eigenvalues.size();
        sink(c);
    }
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

}  // namespace rmt
