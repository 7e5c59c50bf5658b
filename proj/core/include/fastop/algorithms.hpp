#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fastop/operator.hpp"

namespace fastop {

struct SolveOptions {
    /// 0 selects the problem dimension (A.cols()).
    index_t max_iterations = 0;
    double relative_tolerance = 1e-10;
    /// Run plain CG on A X = Y. Otherwise CG runs on the normal equations
    /// A^H A X = A^H Y using one forward and one backward per iteration.
    bool assume_hermitian = false;
};

struct SolveReport {
    DenseBatch solution;
    std::vector<index_t> iterations;
    /// Final ||y - A x||_2 per column.
    std::vector<double> residual_norm;
    std::vector<bool> converged;

    [[nodiscard]] bool all_converged() const noexcept;
};

/// Conjugate gradients per column from x0 = 0. A column stops once
/// ||y - A x|| <= tol * ||y||, verified against the true residual before it is
/// reported as converged. Throws BreakdownError when a search direction has
/// p^H A p <= 0 (hermitian mode) or A p = 0.
SolveReport cg_solve(const LinearOperator& a, const DenseBatch& y, const SolveOptions& opts = {});

/// Elementwise soft thresholding: u -> u * max(|u| - c, 0) / |u|.
DenseBatch soft_threshold(const DenseBatch& x, double c);

struct IstaOptions {
    double lambda = 1e-2;
    index_t steps = 100;
    /// Defaults to 1 / (1.01 L) with L = sigma_max(M)^2 from power iteration.
    std::optional<double> step_size;
    std::uint64_t seed = 0;
};

struct IstaResult {
    DenseBatch solution;
    /// objective[k] = lambda ||x_k||_1 + 0.5 ||b - M x_k||^2 for k = 0 .. steps.
    std::vector<double> objective;
    double step_size = 0.0;
    double residual_norm = 0.0;
};

/// Iterative soft thresholding x <- t_{lambda alpha}(x + alpha M^H (b - M x)).
/// Uses one forward and one backward per step plus one final forward for the
/// last objective value.
IstaResult ista(const LinearOperator& m, const DenseBatch& b, const IstaOptions& opts = {});

struct OmpResult {
    /// Atoms in selection order.
    std::vector<index_t> support;
    /// Least-squares coefficients aligned with `support`.
    std::vector<cplx> coefficients;
    /// Full-length solution (zeros off the support).
    DenseBatch solution;
    /// ||r|| before the first and after every selection.
    std::vector<double> residual_history;
};

/// Orthogonal matching pursuit with at most `sparsity` atoms. Stops early once
/// ||r|| <= residual_tol * ||b||. Ties in the correlation pick the lowest index.
OmpResult omp(const LinearOperator& m, const DenseBatch& b, index_t sparsity,
              double residual_tol = 0.0);

enum class SpectralMode { Eigen, Singular };

struct PowerOptions {
    double tolerance = 1e-10;
    index_t max_iterations = 1000;
    std::uint64_t seed = 0;
};

struct SpectralReport {
    /// |lambda| of the dominant eigenvalue, or the largest singular value.
    double value = 0.0;
    /// Last Rayleigh quotient v^H A v (Eigen) or v^H A^H A v (Singular).
    cplx rayleigh{};
    DenseBatch vector;
    index_t iterations = 0;
    bool converged = false;
};

/// Power iteration from a seeded random start. Converged when successive
/// estimates agree to `tolerance` relative or the eigen-residual
/// ||A v - rho v|| drops below tolerance * |rho|. Non-convergence is reported
/// through the flag. Eigen mode throws NonSquare for rectangular operators.
SpectralReport power_iteration(const LinearOperator& a, SpectralMode mode,
                               const PowerOptions& opts = {});

}  // namespace fastop
