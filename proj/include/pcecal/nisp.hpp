#pragma once

#include "pcecal/ensemble.hpp"
#include "pcecal/pc_basis.hpp"
#include "pcecal/types.hpp"

#include <span>
#include <vector>

namespace pcecal {

/// Compensation-free pairwise summation; fixes the reduction order of every fit.
[[nodiscard]] double pairwise_sum(std::span<const double> v);

/// P(k, q) = psi_k(xi_q) w_q / <psi_k, psi_k>, (R+1) x Q.
[[nodiscard]] Matrix projection_matrix(const PCBasis& basis, const RowMatrix& nodes, const Vector& weights);

/// e = P E. Requires quadrature weights on the ensemble.
[[nodiscard]] Vector nisp_coefficients(const PCBasis& basis, const DesignEnsemble& ensemble);

/// Same product with a precomputed projection matrix.
[[nodiscard]] Vector apply_projection(const Matrix& projection, const Vector& values);

struct SpectrumEntry {
    std::size_t term;
    unsigned degree;
    double ratio;  // |e_k / e_0|
};

[[nodiscard]] std::vector<SpectrumEntry> spectrum(const PCBasis& basis, const Vector& coefficients);

/// Mean |e_k / e_0| per total-degree band 0..order.
[[nodiscard]] std::vector<double> band_means(const PCBasis& basis, const Vector& coefficients);

}  // namespace pcecal
