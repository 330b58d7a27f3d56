#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pcecal {

struct Density {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
};

/// Silverman's rule 0.9 min(sd, IQR / 1.34) n^(-1/5); falls back to the nonzero
/// spread measure when the other vanishes, and fails when both do.
[[nodiscard]] double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density on `n_grid` equispaced points spanning [min - 3h, max + 3h].
/// Requires at least 100 samples.
[[nodiscard]] Density kde(std::span<const double> samples, std::size_t n_grid = 256,
                          std::optional<double> bandwidth = std::nullopt);

/// Trapezoid integral of a density table.
[[nodiscard]] double trapezoid(const Density& d);

}  // namespace pcecal
