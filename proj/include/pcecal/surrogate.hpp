#pragma once

#include "pcecal/ensemble.hpp"
#include "pcecal/kde.hpp"
#include "pcecal/pc_basis.hpp"
#include "pcecal/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcecal {

enum class FitMethod { nisp, bpdn };

[[nodiscard]] const char* to_string(FitMethod m) noexcept;
[[nodiscard]] FitMethod parse_fit_method(const std::string& s);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Truncated Legendre chaos E(xi) = sum_k e_k psi_k(xi).
class PCExpansion {
public:
    PCExpansion(PCBasis basis, Vector coefficients, FitMethod method = FitMethod::nisp, Metadata metadata = {});

    [[nodiscard]] const PCBasis& basis() const noexcept { return basis_; }
    [[nodiscard]] const Vector& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] FitMethod method() const noexcept { return method_; }
    [[nodiscard]] const Metadata& metadata() const noexcept { return metadata_; }
    [[nodiscard]] std::size_t dim() const noexcept { return basis_.dim(); }

    [[nodiscard]] double eval(std::span<const double> xi) const;
    [[nodiscard]] Vector predict(const RowMatrix& nodes) const;

    [[nodiscard]] double mean() const noexcept { return coefficients_[0]; }
    [[nodiscard]] double variance() const;

    /// T_i = sum over terms involving xi_i of e_k^2 <psi_k^2>, divided by the variance.
    [[nodiscard]] std::vector<double> total_sensitivity() const;

private:
    PCBasis basis_;
    Vector coefficients_;
    FitMethod method_;
    Metadata metadata_;
};

/// |E_obs - E_pc|_2 / |E_obs|_2 over the ensemble rows.
[[nodiscard]] double nre(const PCExpansion& surrogate, const DesignEnsemble& ensemble);

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

struct Surface {
    std::vector<double> x;  // axis i
    std::vector<double> y;  // axis j
    RowMatrix z;            // z(a, b) = E at (x[a], y[b])
};

/// Sweep coordinate `axis` over [-1, 1]; other coordinates from `fixed` (empty = origin).
[[nodiscard]] Curve response_slice(const PCExpansion& s, std::size_t axis, std::span<const double> fixed = {},
                                   std::size_t points = 201);

[[nodiscard]] Surface response_surface(const PCExpansion& s, std::size_t axis_i, std::size_t axis_j,
                                       std::span<const double> fixed = {}, std::size_t points = 51);

/// Surrogate values at `n` seeded uniform draws on [-1,1]^m.
[[nodiscard]] std::vector<double> sample_surrogate(const PCExpansion& s, std::size_t n, std::uint64_t seed);

/// KDE of the pushforward density of E under the uniform input density.
[[nodiscard]] Density sample_pdf(const PCExpansion& s, std::size_t n_samples = 1'000'000, std::uint64_t seed = 0,
                                 std::size_t n_grid = 256);

}  // namespace pcecal
