#pragma once

#include "pcecal/ensemble.hpp"
#include "pcecal/pc_basis.hpp"
#include "pcecal/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pcecal {

/// Psi(q, k) = psi_k(xi_q), N x (R+1).
[[nodiscard]] Matrix measurement_matrix(const PCBasis& basis, const RowMatrix& nodes);

/// Euclidean projection onto { x : |x|_1 <= tau } (sort-based, exact).
[[nodiscard]] Vector project_l1_ball(const Vector& v, double tau);

struct SpgOptions {
    std::size_t max_iters = 5000;  // total projected-gradient iterations across all tau updates
    double opt_tol = 1e-4;
};

enum class BpdnExit {
    root_found,     // |residual| reached delta within tolerance
    zero_solution,  // delta >= |E|, the origin is optimal
    least_squares,  // delta below the least-squares residual; returns the (sparsest) least-squares point
    max_iters,
};

struct ParetoPoint {
    double tau;
    double residual_norm;
};

struct BpdnSolution {
    Vector coefficients;
    double residual_norm = 0.0;
    double l1_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    BpdnExit exit = BpdnExit::max_iters;
    std::vector<ParetoPoint> pareto_path;  // (tau, |r|) at subproblems solved to opt_tol before each tau update
};

/// min |e|_1 subject to |E - Psi e|_2 <= delta.
///
/// Root finding on the Pareto curve phi(tau) = min{|E - Psi e|_2 : |e|_1 <= tau}:
/// each LASSO subproblem is solved by spectral projected gradient with a
/// nonmonotone line search, and tau is advanced by Newton steps using
/// phi'(tau) = -|Psi^T r|_inf / |r|_2. Stops when |r| - delta lies in
/// [-opt_tol max(1, |E|), opt_tol delta] (opt_tol max(1, |E|) above when delta = 0).
[[nodiscard]] BpdnSolution solve_bpdn(const Matrix& psi, const Vector& values, double delta,
                                      const SpgOptions& options = {});

struct BpdnConfig {
    std::optional<double> delta;     // absolute residual budget; absent -> cross-validate
    std::size_t cv_folds = 4;
    std::vector<double> delta_grid;  // relative to |E|_2; empty -> default_delta_grid()
    SpgOptions solver;
    std::uint64_t seed = 0;          // fold shuffling
    unsigned threads = 1;            // concurrent (fold, delta) fits
};

/// 20 log-spaced values from 1e-4 to 0.5.
[[nodiscard]] std::vector<double> default_delta_grid();

struct BpdnReport {
    Vector coefficients;
    double chosen_delta = 0.0;        // absolute, full-ensemble scale
    double residual_norm = 0.0;
    double l1_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    BpdnExit exit = BpdnExit::max_iters;
    bool cross_validated = false;
    std::vector<double> cv_grid;          // relative grid values
    std::vector<double> cv_train_deltas;  // absolute training-fold budgets per grid value
    Matrix cv_errors;                     // folds x grid, validation residual norms
    std::vector<double> cv_mean_errors;   // per grid value
};

/// Cross-validated BPDN fit. A grid value d is applied to training folds as
/// d |E|_2 sqrt(N_train / N); the minimizer of the mean validation residual is
/// rescaled by sqrt(N / N_train) (that is, d |E|_2) for the final full-data fit.
[[nodiscard]] BpdnReport fit_bpdn(const PCBasis& basis, const DesignEnsemble& ensemble, const BpdnConfig& config);

}  // namespace pcecal
