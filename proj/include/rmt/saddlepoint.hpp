#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmt/log_complex.hpp"
#include "rmt/quadrature.hpp"

namespace rmt {

using cplx = std::complex<double>;

// Integration path through the origin, parametrised by s in [-half_width, half_width] with point(0) = 0.
struct Contour {
    std::function<cplx(double)> point;
    std::function<cplx(double)> tangent;
    double half_width = 1.0;
    bool auto_width = false;  // line contours may be widened until the integrand tail is negligible

    static Contour line(cplx direction = 1.0);
    // Counter-clockwise circle c(1 - e^{i s}), s in [-pi, pi], passing through 0.
    static Contour loop(double radius);
};

struct HessianBlocks {
    Eigen::MatrixXcd A;      // m x m
    Eigen::VectorXcd beta;   // m
    cplx alpha;              // second derivative in the pole coordinate
    Eigen::VectorXcd eta_tilde;
    cplx eta_last;

    int m() const { return int(A.rows()); }
    Eigen::MatrixXcd full() const;
    static HessianBlocks from_full(const Eigen::MatrixXcd& B, const Eigen::VectorXcd& eta);
};

// I(lambda) = PV int e^{-lambda p(x) - sqrt(lambda) f(x; lambda)} q(x) / x_{m+1} dx over m+1 coordinates,
// the last one carrying the pole. Coordinates passed to p, f, q are absolute (saddle + path point).
struct SaddleProblem {
    std::string name;
    int m = 1;
    std::function<cplx(std::span<const cplx>)> p;
    std::function<cplx(std::span<const cplx>, double)> f;
    std::function<cplx(std::span<const cplx>)> q;
    std::vector<cplx> saddle;

    // Analytic derivatives at the saddle; when absent, central differences are used.
    std::optional<Eigen::VectorXcd> grad_p;
    std::optional<Eigen::MatrixXcd> hess_p;
    std::function<Eigen::VectorXcd(double)> grad_f;  // may be empty

    std::vector<Contour> contours;  // m+1 paths used by pv_oracle

    // When positive, the sign epsilon is fixed once against pv_oracle at this lambda.
    double calibration_lambda = 0.0;

    struct Calibration {
        std::once_flag once;
        int epsilon = 1;
        bool done = false;
    };
    std::shared_ptr<Calibration> calibration = std::make_shared<Calibration>();

    int dims() const { return m + 1; }
    void validate() const;
};

struct SaddleDerivatives {
    cplx p0, f0, q0;
    Eigen::VectorXcd grad_p;  // m+1
    Eigen::MatrixXcd hess_p;  // (m+1) x (m+1)
    Eigen::VectorXcd grad_f;  // m+1
};

SaddleDerivatives saddle_derivatives(const SaddleProblem& problem, double lambda);

// Central differences of a holomorphic function along the real coordinate directions.
Eigen::VectorXcd fd_gradient(const std::function<cplx(std::span<const cplx>)>& F, std::span<const cplx> x);
Eigen::MatrixXcd fd_hessian(const std::function<cplx(std::span<const cplx>)>& F, std::span<const cplx> x);

// Product of principal square roots of the eigenvalues, ordered by decreasing real part.
cplx sqrt_det(const Eigen::MatrixXcd& A);

LogComplex leading_term_interior(const SaddleProblem& problem, double lambda);
LogComplex leading_term_edge(const SaddleProblem& problem, double lambda);

cplx gaussian_pv_closed_form(const HessianBlocks& blocks);

// Brute-force PV integral on the problem's contours (total dimension <= 2).
cplx pv_oracle(const SaddleProblem& problem, double lambda, const QuadratureRule& rule = {1, 1e-9, 0.0, 4000});

// Heuristic hypothesis probe: warns where Re(p - p(0)) <= 0 on the ends of the integration box.
std::vector<std::string> tail_probe(const SaddleProblem& problem, double lambda);

// Epsilon sign selected by comparing with pv_oracle (cached per problem).
int calibrated_epsilon(const SaddleProblem& problem, bool edge);

// Closed forms for A(a) = all-ones + diag(a).
cplx rank_structured_det(std::span<const cplx> a);
Eigen::MatrixXcd rank_structured_inverse(std::span<const cplx> a);
Eigen::MatrixXcd rank_structured_matrix(std::span<const cplx> a);

// Named test problems: "interior-basic", "interior", "interior-lambda", "edge".
SaddleProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();
bool builtin_is_edge(const std::string& name);

// Problem p = x B x^T / 2, f = eta x^T, q = 1 on real lines.
SaddleProblem gaussian_problem(const HessianBlocks& blocks);

}  // namespace rmt
