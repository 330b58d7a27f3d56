#pragma once

#include "pcecal/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pcecal {

/// Nested 1D rule for the uniform density 1/2 on [-1, 1]; weights sum to one.
struct QuadratureRule1D {
    unsigned level = 0;
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;
};

inline constexpr unsigned max_sparse_level = 5;

/// Delayed Gauss-Patterson rule: level l uses the smallest Patterson rule that is
/// exact for degree 2l + 1, giving node counts 1, 3, 3, 7, 7, 7 for levels 0..5.
/// Each level's nodes are bitwise a subset of the next.
[[nodiscard]] const QuadratureRule1D& gauss_patterson_rule(unsigned level);

/// Number of 1D nodes at a delayed level.
[[nodiscard]] std::size_t gauss_patterson_size(unsigned level);

/// Smolyak combination of delayed Gauss-Patterson rules on [-1,1]^m.
/// Weights may be negative; they sum to one.
class SparseGrid {
public:
    SparseGrid(std::size_t dim, unsigned level, RowMatrix nodes, Vector weights);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] unsigned level() const noexcept { return level_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(nodes_.rows()); }
    [[nodiscard]] const RowMatrix& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
    [[nodiscard]] std::span<const double> node(std::size_t q) const {
        return {nodes_.data() + q * dim_, dim_};
    }

    /// Sum of w_q f(x_q).
    template <class F>
    [[nodiscard]] double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t q = 0; q < size(); ++q) s += weights_[static_cast<Eigen::Index>(q)] * f(node(q));
        return s;
    }

private:
    std::size_t dim_;
    unsigned level_;
    RowMatrix nodes_;
    Vector weights_;
};

/// Nodes are ordered lexicographically by coordinate.
[[nodiscard]] SparseGrid build_smolyak(std::size_t dim, unsigned level);

/// The level-`lower_level` grid of the same family; every node is checked to be present in `grid`.
[[nodiscard]] SparseGrid subset_levels(const SparseGrid& grid, unsigned lower_level);

/// Tensor Gauss-Legendre rule for the uniform density on [-1,1]^m (test and diagnostic use).
[[nodiscard]] QuadratureRule1D gauss_legendre_rule(std::size_t n);

}  // namespace pcecal
