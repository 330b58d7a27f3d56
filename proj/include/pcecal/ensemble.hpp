#pragma once

#include "pcecal/sparse_grid.hpp"
#include "pcecal/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pcecal {

/// A set of canonical design points, optionally carrying quadrature weights.
struct Design {
    RowMatrix nodes;                  // N x m, canonical coordinates
    std::optional<Vector> weights;    // present iff the nodes form a quadrature
    std::string kind = "custom";      // "smolyak", "random", "custom"
    int level = -1;                   // Smolyak level when kind == "smolyak"
    std::uint64_t seed = 0;           // random designs only

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(nodes.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(nodes.cols()); }
};

[[nodiscard]] Design smolyak_design(const SparseGrid& grid);

/// `n` distinct points drawn uniformly on [-1,1]^m from a seeded generator.
[[nodiscard]] Design random_design(std::size_t dim, std::size_t n, std::uint64_t seed);

/// Evaluated design: observed cost statistic per node plus provenance tags.
class DesignEnsemble {
public:
    DesignEnsemble(RowMatrix nodes, Vector values, std::optional<Vector> weights = std::nullopt,
                   std::vector<std::string> tags = {});
    DesignEnsemble(const Design& design, Vector values, std::vector<std::string> tags = {});

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(nodes_.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(nodes_.cols()); }
    [[nodiscard]] const RowMatrix& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] const std::optional<Vector>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<std::string>& tags() const noexcept { return tags_; }

    /// Rows in `rows` order; weights are dropped since a subset is not a quadrature.
    [[nodiscard]] DesignEnsemble select(const std::vector<std::size_t>& rows) const;

    /// Rows whose nodes appear in `nodes` (exact match), carrying the supplied weights.
    [[nodiscard]] DesignEnsemble restrict_to(const RowMatrix& nodes, const std::optional<Vector>& weights) const;

private:
    RowMatrix nodes_;
    Vector values_;
    std::optional<Vector> weights_;
    std::vector<std::string> tags_;
};

}  // namespace pcecal
