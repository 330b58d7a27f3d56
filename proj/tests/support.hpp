#pragma once

// Independent reference implementations used as test oracles.

#include "pcecal/error.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle {

// Closed-form Legendre polynomials.
inline double legendre(unsigned n, double x) {
    const double x2 = x * x;
    switch (n) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return 0.5 * (3 * x2 - 1);
        case 3: return 0.5 * (5 * x2 - 3) * x;
        case 4: return (35 * x2 * x2 - 30 * x2 + 3) / 8.0;
        case 5: return (63 * x2 * x2 - 70 * x2 + 15) * x / 8.0;
        case 6: return (231 * x2 * x2 * x2 - 315 * x2 * x2 + 105 * x2 - 5) / 16.0;
        case 7: return (429 * x2 * x2 * x2 - 693 * x2 * x2 + 315 * x2 - 35) * x / 16.0;
        default: return std::nan("");
    }
}

inline double psi(const std::vector<unsigned>& alpha, const double* xi) {
    double v = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) v *= legendre(alpha[i], xi[i]);
    return v;
}

inline double binomial(unsigned n, unsigned k) {
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

struct Rule {
    std::vector<double> x, w;  // weights sum to one
};

// Golub-Welsch for the uniform density on [-1, 1].
inline Rule gauss_legendre(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    for (int i = 0; i < n; ++i) {
        r.x.push_back(es.eigenvalues()(i));
        r.w.push_back(es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
    }
    return r;
}

// Calls f(point, weight) over the tensor product of a 1D rule.
template <class F>
void tensor_rule(const Rule& r, std::size_t dim, F&& f) {
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> pt(dim);
    const std::size_t n = r.x.size();
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            pt[i] = r.x[idx[i]];
            w *= r.w[idx[i]];
        }
        f(pt, w);
        std::size_t d = 0;
        while (d < dim && ++idx[d] == n) idx[d++] = 0;
        if (d == dim) return;
    }
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Kolmogorov distribution survival function Q_KS(lambda).
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        s += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

// One-sample KS test p-value against a continuous CDF.
template <class Cdf>
double ks_pvalue(std::vector<double> x, Cdf&& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pcecal_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Error code raised by fn, or a test failure when nothing is thrown.
template <class F>
pcecal::ErrorCode code_of(F&& fn) {
    try {
        fn();
    } catch (const pcecal::Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no pcecal::Error thrown";
    return pcecal::ErrorCode::invalid_argument;
}

}  // namespace oracle
