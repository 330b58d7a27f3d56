#include "pcecal/nisp.hpp"

#include "pcecal/error.hpp"

#include <cmath>

namespace pcecal {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

Matrix projection_matrix(const PCBasis& basis, const RowMatrix& nodes, const Vector& weights) {
    require(static_cast<std::size_t>(nodes.cols()) == basis.dim(), ErrorCode::shape,
            "projection matrix: basis dimension " + std::to_string(basis.dim()) + " vs node width " +
                std::to_string(nodes.cols()));
    require(weights.size() == nodes.rows(), ErrorCode::shape, "projection matrix: weight count mismatch");
    const auto terms = static_cast<Eigen::Index>(basis.size());
    Matrix p(terms, nodes.rows());
    std::vector<double> psi(basis.size());
    for (Eigen::Index q = 0; q < nodes.rows(); ++q) {
        basis.evaluate(std::span<const double>(nodes.data() + q * nodes.cols(), basis.dim()), psi);
        for (Eigen::Index k = 0; k < terms; ++k)
            p(k, q) = psi[static_cast<std::size_t>(k)] * weights[q] / basis.norm_sq(static_cast<std::size_t>(k));
    }
    return p;
}

Vector apply_projection(const Matrix& projection, const Vector& values) {
    require(projection.cols() == values.size(), ErrorCode::shape, "projection/value length mismatch");
    Vector e(projection.rows());
    std::vector<double> terms(static_cast<std::size_t>(values.size()));
    for (Eigen::Index k = 0; k < projection.rows(); ++k) {
        for (Eigen::Index q = 0; q < values.size(); ++q)
            terms[static_cast<std::size_t>(q)] = projection(k, q) * values[q];
        e[k] = pairwise_sum(terms);
    }
    return e;
}

Vector nisp_coefficients(const PCBasis& basis, const DesignEnsemble& ensemble) {
    if (!ensemble.weights())
        fail(ErrorCode::precondition,
             "NISP requires a quadrature design with weights (e.g. a Smolyak grid); "
             "use BPDN for random or partial ensembles");
    return apply_projection(projection_matrix(basis, ensemble.nodes(), *ensemble.weights()), ensemble.values());
}

std::vector<SpectrumEntry> spectrum(const PCBasis& basis, const Vector& coefficients) {
    require(static_cast<std::size_t>(coefficients.size()) == basis.size(), ErrorCode::shape,
            "coefficient length does not match basis size");
    const double e0 = coefficients[0];
    require(e0 != 0.0, ErrorCode::numerical, "spectrum normalization undefined: e_0 = 0");
    std::vector<SpectrumEntry> out;
    out.reserve(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k)
        out.push_back({k, basis.total_degree(k), std::fabs(coefficients[static_cast<Eigen::Index>(k)] / e0)});
    return out;
}

std::vector<double> band_means(const PCBasis& basis, const Vector& coefficients) {
    std::vector<double> sum(basis.order() + 1, 0.0);
    std::vector<std::size_t> count(basis.order() + 1, 0);
    for (const auto& s : spectrum(basis, coefficients)) {
        sum[s.degree] += s.ratio;
        ++count[s.degree];
    }
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] /= static_cast<double>(count[d]);
    return sum;
}

}  // namespace pcecal
