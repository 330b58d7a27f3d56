#include "pcecal/harness.hpp"
#include "pcecal/nisp.hpp"
#include "pcecal/sparse_grid.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pcecal;
using oracle::code_of;

namespace {

Vector eval_on(const SparseGrid& g, auto&& f) {
    Vector v(static_cast<Eigen::Index>(g.size()));
    for (std::size_t q = 0; q < g.size(); ++q) v[static_cast<Eigen::Index>(q)] = f(g.node(q));
    return v;
}

DesignEnsemble ensemble_of(const SparseGrid& g, Vector values) { return {smolyak_design(g), std::move(values)}; }

}  // namespace

TEST(Nisp, ProjectionMatrixEntries) {
    const auto g = build_smolyak(3, 3);
    const PCBasis b(3, 3);
    const Matrix P = projection_matrix(b, g.nodes(), g.weights());
    ASSERT_EQ(P.rows(), static_cast<Eigen::Index>(b.size()));
    ASSERT_EQ(P.cols(), static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index q = 0; q < P.cols(); ++q) EXPECT_EQ(P(0, q), g.weights()[q]);
    for (std::size_t k = 0; k < b.size(); ++k) {
        std::vector<unsigned> a(b.index(k).begin(), b.index(k).end());
        for (std::size_t q = 0; q < g.size(); ++q)
            EXPECT_NEAR(P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)),
                        oracle::psi(a, g.node(q).data()) * g.weights()[static_cast<Eigen::Index>(q)] / b.norm_sq(k), 1e-13);
    }
    EXPECT_EQ(code_of([&] { (void)projection_matrix(PCBasis(2, 3), g.nodes(), g.weights()); }), ErrorCode::shape);
}

TEST(Nisp, ConstantsAndZero) {
    for (std::size_t m : {1u, 3u, 5u}) {
        const auto g = build_smolyak(m, 3);
        const PCBasis b(m, 3);
        const Vector e = nisp_coefficients(b, ensemble_of(g, Vector::Constant(static_cast<Eigen::Index>(g.size()), 7.5)));
        EXPECT_NEAR(e[0], 7.5, 1e-12);
        for (Eigen::Index k = 1; k < e.size(); ++k) EXPECT_NEAR(e[k], 0.0, 1e-12);
        const Vector z = nisp_coefficients(b, ensemble_of(g, Vector::Zero(static_cast<Eigen::Index>(g.size()))));
        EXPECT_EQ(z.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Nisp, LinearOneD) {
    for (unsigned l = 1; l <= 5; ++l) {
        const auto g = build_smolyak(1, l);
        const PCBasis b(1, l);
        const Vector e = nisp_coefficients(b, ensemble_of(g, eval_on(g, [](auto x) { return x[0]; })));
        for (Eigen::Index k = 0; k < e.size(); ++k) EXPECT_NEAR(e[k], k == 1 ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Nisp, BilinearFiveD) {
    const auto g = build_smolyak(5, 5);
    const PCBasis b(5, 5);
    const Vector e = nisp_coefficients(b, ensemble_of(g, eval_on(g, [](auto x) { return 3.0 + 2.0 * x[0] * x[1]; })));
    const std::vector<unsigned> a{1, 1, 0, 0, 0};
    const auto k11 = static_cast<Eigen::Index>(b.find(a));
    EXPECT_NEAR(e[0], 3.0, 1e-10);
    EXPECT_NEAR(e[k11], 2.0, 1e-10);
    for (Eigen::Index k = 1; k < e.size(); ++k)
        if (k != k11) EXPECT_LE(std::abs(e[k]), 1e-10);
}

TEST(Nisp, ExactForEveryBasisFunction) {
    const auto g = build_smolyak(5, 5);
    const PCBasis b(5, 5);
    const Matrix P = projection_matrix(b, g.nodes(), g.weights());
    for (std::size_t j = 0; j < b.size(); ++j) {
        std::vector<unsigned> a(b.index(j).begin(), b.index(j).end());
        const Vector e = apply_projection(P, eval_on(g, [&](auto x) { return oracle::psi(a, x.data()); }));
        for (Eigen::Index k = 0; k < e.size(); ++k)
            ASSERT_NEAR(e[k], k == static_cast<Eigen::Index>(j) ? 1.0 : 0.0, 1e-10) << "term " << j << " coefficient " << k;
    }
}

TEST(Nisp, Linearity) {
    const auto g = build_smolyak(5, 4);
    const PCBasis b(5, 4);
    const auto model = SyntheticModel::smooth(SyntheticModel::default_noise_sigma, 3);
    const Vector e1 = evaluate_synthetic(model, g.nodes());
    Vector e2 = eval_on(g, [](auto x) { return std::sin(x[0]) * std::exp(x[3]) - x[2] * x[4]; });
    const double a = 2.5, c = -0.75;
    const Vector lhs = nisp_coefficients(b, ensemble_of(g, a * e1 + c * e2));
    const Vector rhs = a * nisp_coefficients(b, ensemble_of(g, e1)) + c * nisp_coefficients(b, ensemble_of(g, e2));
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST(Nisp, RequiresWeights) {
    const auto d = random_design(3, 50, 1);
    const DesignEnsemble ens(d, Vector::Ones(50));
    try {
        (void)nisp_coefficients(PCBasis(3, 2), ens);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::precondition);
        EXPECT_NE(std::string(e.what()).find("quadrature"), std::string::npos);
    }
    EXPECT_EQ(code_of([] { (void)apply_projection(Matrix::Zero(3, 4), Vector::Zero(5)); }), ErrorCode::shape);
}

TEST(Nisp, PairwiseSum) {
    std::mt19937_64 rng(9);
    std::normal_distribution<> n(0.0, 1e3);
    std::vector<double> v(100'003);
    for (auto& x : v) x = n(rng);
    long double ref = 0.0L;
    for (double x : v) ref += x;
    const double s = pairwise_sum(v);
    EXPECT_NEAR(s, static_cast<double>(ref), 1e-9 * std::sqrt(static_cast<double>(v.size())) * 1e3);
    EXPECT_EQ(s, pairwise_sum(v));
    EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
    EXPECT_EQ(pairwise_sum(std::vector<double>{4.0}), 4.0);
}

TEST(Spectrum, Ratios) {
    const PCBasis b(1, 2);
    Vector e(3);
    e << 2.0, 1.0, -0.5;
    const auto s = spectrum(b, e);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s[0].ratio, 1.0);
    EXPECT_DOUBLE_EQ(s[1].ratio, 0.5);
    EXPECT_DOUBLE_EQ(s[2].ratio, 0.25);
    EXPECT_EQ(s[2].degree, 2u);
    EXPECT_EQ(s[1].term, 1u);

    const PCBasis b5(5, 3);
    Vector c = Vector::Zero(static_cast<Eigen::Index>(b5.size()));
    c[0] = 4.0;
    int nonzero = 0;
    for (const auto& entry : spectrum(b5, c)) nonzero += entry.ratio != 0.0;
    EXPECT_EQ(nonzero, 1);
    const auto bands = band_means(b5, c);
    ASSERT_EQ(bands.size(), 4u);
    EXPECT_EQ(bands[0], 1.0);

    c[0] = 0.0;
    EXPECT_EQ(code_of([&] { (void)spectrum(b5, c); }), ErrorCode::numerical);
    EXPECT_EQ(code_of([&] { (void)spectrum(b, Vector::Ones(4)); }), ErrorCode::shape);
}

TEST(Spectrum, BandMeansAverageByDegree) {
    const PCBasis b(2, 2);  // 1 | x, y | x^2, xy, y^2
    Vector e(6);
    e << -2.0, 1.0, 0.0, 0.2, 0.4, 0.6;
    const auto m = band_means(b, e);
    EXPECT_DOUBLE_EQ(m[0], 1.0);
    EXPECT_DOUBLE_EQ(m[1], 0.25);
    EXPECT_NEAR(m[2], 0.2, 1e-15);
}

TEST(Nisp, NoiseDivergence) {
    // Degree-4 polynomial truth: the clean fit has an empty top band, the noisy one does not.
    const auto g = build_smolyak(5, 5);
    const PCBasis b(5, 5);
    const PCBasis b4(5, 4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<> u(-1.0, 1.0);
    Vector truth(static_cast<Eigen::Index>(b4.size()));
    for (Eigen::Index k = 0; k < truth.size(); ++k) truth[k] = u(rng) / (1.0 + b4.total_degree(static_cast<std::size_t>(k)));
    truth[0] = 10.0;
    const PCExpansion poly(b4, truth);
    const double sigma = 0.05;

    const Vector clean = poly.predict(g.nodes());
    const auto noisy_model = SyntheticModel::planted(poly, sigma, 23);
    const Vector noisy = evaluate_synthetic(noisy_model, g.nodes());

    const Matrix P = projection_matrix(b, g.nodes(), g.weights());
    const Vector ec = apply_projection(P, clean);
    const Vector en = apply_projection(P, noisy);

    double clean_top = 0.0, noisy_top = 0.0, expected = 0.0;
    int n_top = 0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (b.total_degree(k) != 5) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        clean_top += std::abs(ec[kk]);
        noisy_top += std::abs(en[kk]);
        // For iid noise, e_k ~ N(0, sigma^2 |P_k|^2), so E|e_k| = sigma sqrt(2/pi) |P_k|.
        expected += sigma * std::sqrt(2.0 / M_PI) * P.row(kk).norm();
        ++n_top;
    }
    clean_top /= n_top;
    noisy_top /= n_top;
    expected /= n_top;
    EXPECT_LE(clean_top, 1e-10);
    EXPECT_GE(noisy_top, 0.5 * expected);
    EXPECT_LE(noisy_top, 2.0 * expected);

    // The noisy spectrum tail is heavier than its middle band.
    const auto bands = band_means(b, en);
    const auto clean_bands = band_means(b, ec);
    EXPECT_GT(bands[5], clean_bands[5] + 1e-4);
}

TEST(Nisp, NoisySmoothModelTailGrows) {
    const auto g = build_smolyak(5, 5);
    const PCBasis b(5, 5);
    const DesignEnsemble ens(smolyak_design(g),
                             evaluate_synthetic(SyntheticModel::smooth(SyntheticModel::default_noise_sigma, 7), g.nodes()));
    const auto bands = band_means(b, nisp_coefficients(b, ens));
    EXPECT_GT(bands[5], bands[3]);
    EXPECT_GT(bands[5], bands[4]);
}
