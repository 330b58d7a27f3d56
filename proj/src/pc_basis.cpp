#include "pcecal/pc_basis.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace pcecal {

void legendre_values(double x, unsigned max_degree, std::span<double> out) {
    require(out.size() > max_degree, ErrorCode::shape, "legendre_values: output buffer too small");
    out[0] = 1.0;
    if (max_degree == 0) return;
    out[1] = x;
    for (unsigned n = 1; n < max_degree; ++n)
        out[n + 1] = ((2.0 * n + 1.0) * x * out[n] - n * out[n - 1]) / (n + 1.0);
}

std::size_t total_degree_count(std::size_t dim, unsigned order) {
    // C(dim + order, order) built incrementally; each partial product is itself a binomial.
    constexpr auto max = std::numeric_limits<std::size_t>::max();
    std::size_t c = 1;
    for (std::size_t j = 1; j <= order; ++j) {
        // c * (dim + j) / j is an integer and gcd(c / g, j / g) = 1, so j / g divides dim + j.
        if (dim > max - j) fail(ErrorCode::capacity, "basis size overflows index arithmetic");
        const std::size_t g = std::gcd(c, j);
        const std::size_t factor = (dim + j) / (j / g);
        if (c / g > max / factor) fail(ErrorCode::capacity, "basis size overflows index arithmetic");
        c = (c / g) * factor;
    }
    return c;
}

namespace {

// All multi-indices with exactly `degree` total, leading exponent descending.
void append_degree(std::size_t dim, unsigned degree, std::vector<unsigned>& current, std::size_t pos,
                   unsigned remaining, std::vector<unsigned>& out) {
    if (pos + 1 == dim) {
        current[pos] = remaining;
        out.insert(out.end(), current.begin(), current.end());
        return;
    }
    for (unsigned d = remaining + 1; d-- > 0;) {
        current[pos] = d;
        append_degree(dim, degree, current, pos + 1, remaining - d, out);
    }
}

}  // namespace

PCBasis::PCBasis(std::size_t dim, unsigned order) : dim_(dim), order_(order) {
    require(dim >= 1, ErrorCode::invalid_argument, "basis dimension must be >= 1");
    const std::size_t n = total_degree_count(dim, order);
    if (n > std::numeric_limits<std::size_t>::max() / dim)
        fail(ErrorCode::capacity, "basis size overflows index arithmetic");
    degrees_.reserve(n * dim);
    std::vector<unsigned> current(dim, 0);
    for (unsigned deg = 0; deg <= order; ++deg) append_degree(dim, deg, current, 0, deg, degrees_);

    totals_.resize(n);
    norms_sq_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        unsigned t = 0;
        double nrm = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const unsigned a = degrees_[k * dim + i];
            t += a;
            nrm /= (2.0 * a + 1.0);
        }
        totals_[k] = t;
        norms_sq_[k] = nrm;
    }
}

std::span<const unsigned> PCBasis::index(std::size_t k) const {
    require(k < size(), ErrorCode::invalid_argument, "basis term index out of range");
    return {degrees_.data() + k * dim_, dim_};
}

unsigned PCBasis::total_degree(std::size_t k) const {
    require(k < size(), ErrorCode::invalid_argument, "basis term index out of range");
    return totals_[k];
}

double PCBasis::norm_sq(std::size_t k) const {
    require(k < size(), ErrorCode::invalid_argument, "basis term index out of range");
    return norms_sq_[k];
}

std::size_t PCBasis::find(std::span<const unsigned> alpha) const {
    if (alpha.size() != dim_) return size();
    for (std::size_t k = 0; k < size(); ++k)
        if (std::equal(alpha.begin(), alpha.end(), degrees_.begin() + static_cast<std::ptrdiff_t>(k * dim_)))
            return k;
    return size();
}

void PCBasis::evaluate(std::span<const double> xi, std::span<double> out) const {
    require(xi.size() == dim_, ErrorCode::shape,
            "basis expects " + std::to_string(dim_) + " coordinates, got " + std::to_string(xi.size()));
    require(out.size() == size(), ErrorCode::shape, "basis output buffer has wrong length");
    const std::size_t stride = order_ + 1;
    thread_local std::vector<double> table;
    table.resize(dim_ * stride);
    for (std::size_t i = 0; i < dim_; ++i)
        legendre_values(xi[i], order_, std::span<double>(table.data() + i * stride, stride));
    for (std::size_t k = 0; k < size(); ++k) {
        double v = 1.0;
        const unsigned* a = degrees_.data() + k * dim_;
        for (std::size_t i = 0; i < dim_; ++i)
            if (a[i] != 0) v *= table[i * stride + a[i]];
        out[k] = v;
    }
}

std::vector<double> PCBasis::evaluate(std::span<const double> xi) const {
    std::vector<double> out(size());
    evaluate(xi, out);
    return out;
}

}  // namespace pcecal
