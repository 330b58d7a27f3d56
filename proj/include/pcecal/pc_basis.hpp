#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcecal {

/// Unnormalized Legendre values P_0(x) .. P_n(x) via the three-term recurrence.
void legendre_values(double x, unsigned max_degree, std::span<double> out);

/// Number of multi-indices of total degree <= order in `dim` variables,
/// (dim + order)! / (dim! order!). Throws a capacity error on overflow.
[[nodiscard]] std::size_t total_degree_count(std::size_t dim, unsigned order);

/// Total-degree tensor Legendre basis on [-1,1]^m, graded ordering.
///
/// Terms are sorted by total degree; within a degree, multi-indices with a
/// larger leading exponent come first ((1,0) before (0,1), (2,0) before (1,1)).
/// Term 0 is the constant. Norms are taken against the uniform density
/// 2^-m, so norm_sq(k) = prod_i 1 / (2 alpha_i + 1).
class PCBasis {
public:
    PCBasis(std::size_t dim, unsigned order);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] unsigned order() const noexcept { return order_; }
    [[nodiscard]] std::size_t size() const noexcept { return norms_sq_.size(); }

    [[nodiscard]] std::span<const unsigned> index(std::size_t k) const;
    [[nodiscard]] unsigned total_degree(std::size_t k) const;
    [[nodiscard]] double norm_sq(std::size_t k) const;
    [[nodiscard]] const std::vector<double>& norms_sq() const noexcept { return norms_sq_; }

    /// Position of a multi-index in the ordering, or size() when absent.
    [[nodiscard]] std::size_t find(std::span<const unsigned> alpha) const;

    /// psi_k(xi) for all k into `out` (length size()).
    void evaluate(std::span<const double> xi, std::span<double> out) const;
    [[nodiscard]] std::vector<double> evaluate(std::span<const double> xi) const;

    friend bool operator==(const PCBasis& a, const PCBasis& b) {
        return a.dim_ == b.dim_ && a.order_ == b.order_ && a.degrees_ == b.degrees_;
    }

private:
    std::size_t dim_;
    unsigned order_;
    std::vector<unsigned> degrees_;  // size() x dim_, row-major
    std::vector<unsigned> totals_;
    std::vector<double> norms_sq_;
};

}  // namespace pcecal
