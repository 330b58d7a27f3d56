#include "pcecal/surrogate.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pcecal {

const char* to_string(FitMethod m) noexcept { return m == FitMethod::nisp ? "nisp" : "bpdn"; }

FitMethod parse_fit_method(const std::string& s) {
    if (s == "nisp") return FitMethod::nisp;
    if (s == "bpdn") return FitMethod::bpdn;
    fail(ErrorCode::parse, "unknown fit method '" + s + "' (expected nisp or bpdn)");
}

PCExpansion::PCExpansion(PCBasis basis, Vector coefficients, FitMethod method, Metadata metadata)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), method_(method), metadata_(std::move(metadata)) {
    require(static_cast<std::size_t>(coefficients_.size()) == basis_.size(), ErrorCode::shape,
            "coefficient length " + std::to_string(coefficients_.size()) + " does not match basis size " +
                std::to_string(basis_.size()));
}

double PCExpansion::eval(std::span<const double> xi) const {
    require(xi.size() == basis_.dim(), ErrorCode::shape,
            "surrogate expects " + std::to_string(basis_.dim()) + " coordinates, got " + std::to_string(xi.size()));
    thread_local std::vector<double> psi;
    psi.resize(basis_.size());
    basis_.evaluate(xi, psi);
    double s = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) s += coefficients_[static_cast<Eigen::Index>(k)] * psi[k];
    return s;
}

Vector PCExpansion::predict(const RowMatrix& nodes) const {
    require(static_cast<std::size_t>(nodes.cols()) == basis_.dim(), ErrorCode::shape, "node width mismatch");
    Vector out(nodes.rows());
    for (Eigen::Index q = 0; q < nodes.rows(); ++q)
        out[q] = eval(std::span<const double>(nodes.data() + q * nodes.cols(), basis_.dim()));
    return out;
}

double PCExpansion::variance() const {
    double v = 0.0;
    for (std::size_t k = 1; k < basis_.size(); ++k) {
        const double e = coefficients_[static_cast<Eigen::Index>(k)];
        v += e * e * basis_.norm_sq(k);
    }
    return v;
}

std::vector<double> PCExpansion::total_sensitivity() const {
    const double var = variance();
    require(var > 0.0, ErrorCode::numerical, "total sensitivity undefined: surrogate variance is zero");
    std::vector<double> t(basis_.dim(), 0.0);
    for (std::size_t k = 1; k < basis_.size(); ++k) {
        const double e = coefficients_[static_cast<Eigen::Index>(k)];
        const double part = e * e * basis_.norm_sq(k);
        const auto alpha = basis_.index(k);
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] > 0) t[i] += part;
    }
    for (double& v : t) v /= var;
    return t;
}

double nre(const PCExpansion& surrogate, const DesignEnsemble& ensemble) {
    const Vector pred = surrogate.predict(ensemble.nodes());
    const double denom = ensemble.values().norm();
    require(denom > 0.0, ErrorCode::numerical, "NRE undefined: observed values are all zero");
    return (ensemble.values() - pred).norm() / denom;
}

namespace {

std::vector<double> base_point(const PCExpansion& s, std::span<const double> fixed) {
    if (fixed.empty()) return std::vector<double>(s.dim(), 0.0);
    require(fixed.size() == s.dim(), ErrorCode::shape, "fixed point has wrong dimension");
    return {fixed.begin(), fixed.end()};
}

std::vector<double> sweep(std::size_t points) {
    require(points >= 2, ErrorCode::invalid_argument, "response sweep needs at least two points");
    std::vector<double> x(points);
    for (std::size_t a = 0; a < points; ++a) x[a] = -1.0 + 2.0 * static_cast<double>(a) / static_cast<double>(points - 1);
    return x;
}

}  // namespace

Curve response_slice(const PCExpansion& s, std::size_t axis, std::span<const double> fixed, std::size_t points) {
    require(axis < s.dim(), ErrorCode::invalid_argument, "response axis out of range");
    auto xi = base_point(s, fixed);
    Curve c;
    c.x = sweep(points);
    c.y.reserve(points);
    for (double v : c.x) {
        xi[axis] = v;
        c.y.push_back(s.eval(xi));
    }
    return c;
}

Surface response_surface(const PCExpansion& s, std::size_t axis_i, std::size_t axis_j, std::span<const double> fixed,
                         std::size_t points) {
    require(axis_i < s.dim() && axis_j < s.dim() && axis_i != axis_j, ErrorCode::invalid_argument,
            "response surface needs two distinct valid axes");
    auto xi = base_point(s, fixed);
    Surface out;
    out.x = sweep(points);
    out.y = out.x;
    out.z.resize(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(points));
    for (std::size_t a = 0; a < points; ++a) {
        xi[axis_i] = out.x[a];
        for (std::size_t b = 0; b < points; ++b) {
            xi[axis_j] = out.y[b];
            out.z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s.eval(xi);
        }
    }
    return out;
}

std::vector<double> sample_surrogate(const PCExpansion& s, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xi(s.dim());
    std::vector<double> out(n);
    for (auto& v : out) {
        for (auto& c : xi) c = u(rng);
        v = s.eval(xi);
    }
    return out;
}

Density sample_pdf(const PCExpansion& s, std::size_t n_samples, std::uint64_t seed, std::size_t n_grid) {
    require(n_samples >= 1000, ErrorCode::precondition, "pdf sampling needs at least 1000 samples");
    const auto values = sample_surrogate(s, n_samples, seed);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mn == *mx) return kde(values, n_grid, 1e-6 * std::max(1.0, std::fabs(*mn)));
    return kde(values, n_grid);
}

}  // namespace pcecal
