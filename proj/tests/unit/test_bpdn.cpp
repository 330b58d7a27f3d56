#include "pcecal/bpdn.hpp"
#include "pcecal/harness.hpp"
#include "pcecal/surrogate.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace pcecal;
using oracle::code_of;

namespace {

// Soft-threshold bisection: the l1-ball projection is sign(v) max(|v| - theta, 0).
Vector l1_projection_oracle(const Vector& v, double tau) {
    if (v.cwiseAbs().sum() <= tau) return v;
    double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = (v.cwiseAbs().array() - mid).max(0.0).sum();
        (s > tau ? lo : hi) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    return v.cwiseSign().cwiseProduct((v.cwiseAbs().array() - theta).max(0.0).matrix());
}

// ADMM on  min |y|_1 + I(|z| <= delta)  s.t.  x = y, Psi x - z = E.
double l1_reference(const Matrix& psi, const Vector& e, double delta) {
    const Eigen::Index n = psi.cols(), m = psi.rows();
    const double rho = 1.0;
    const Eigen::LLT<Matrix> chol(Matrix::Identity(n, n) + psi.transpose() * psi);
    Vector x = Vector::Zero(n), y = x, u1 = x;
    Vector z = Vector::Zero(m), u2 = z;
    for (int it = 0; it < 400'000; ++it) {
        x = chol.solve((y - u1) + psi.transpose() * (z + e - u2));
        const Vector vy = x + u1;
        y = vy.cwiseSign().cwiseProduct((vy.cwiseAbs().array() - 1.0 / rho).max(0.0).matrix());
        Vector vz = psi * x - e + u2;
        if (vz.norm() > delta) vz *= delta / vz.norm();
        z = vz;
        u1 += x - y;
        u2 += psi * x - e - z;
    }
    return y.cwiseAbs().sum();
}

struct Planted {
    PCBasis basis{5, 5};
    Vector truth;
    RowMatrix nodes;
    Vector values;
    double sigma = 0.0;
};

Planted planted_sparse(std::uint64_t seed, std::size_t n_nodes, double noise_fraction) {
    Planted p;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> terms(p.basis.size());
    std::iota(terms.begin(), terms.end(), 0);
    std::shuffle(terms.begin(), terms.end(), rng);
    p.truth = Vector::Zero(static_cast<Eigen::Index>(p.basis.size()));
    std::uniform_real_distribution<> mag(1.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        const std::size_t k = terms[static_cast<std::size_t>(i)];
        const double sign = (rng() & 1) ? 1.0 : -1.0;
        p.truth[static_cast<Eigen::Index>(k)] = sign * mag(rng) / std::sqrt(p.basis.norm_sq(k));
    }
    p.nodes = random_design(5, n_nodes, seed + 5000).nodes;
    const Vector clean = measurement_matrix(p.basis, p.nodes) * p.truth;
    p.sigma = noise_fraction * std::sqrt(clean.squaredNorm() / static_cast<double>(n_nodes));
    std::normal_distribution<> noise(0.0, p.sigma);
    p.values = clean;
    for (Eigen::Index q = 0; q < p.values.size(); ++q) p.values[q] += noise(rng);
    return p;
}

}  // namespace

TEST(Bpdn, MeasurementMatrix) {
    const PCBasis b(3, 4);
    const auto d = random_design(3, 20, 4);
    const Matrix psi = measurement_matrix(b, d.nodes);
    ASSERT_EQ(psi.rows(), 20);
    ASSERT_EQ(psi.cols(), static_cast<Eigen::Index>(b.size()));
    EXPECT_TRUE((psi.col(0).array() == 1.0).all());
    for (Eigen::Index q = 0; q < 20; ++q)
        for (std::size_t k = 0; k < b.size(); ++k) {
            std::vector<unsigned> a(b.index(k).begin(), b.index(k).end());
            EXPECT_NEAR(psi(q, static_cast<Eigen::Index>(k)), oracle::psi(a, d.nodes.row(q).data()), 1e-13);
        }

    const Matrix origin = measurement_matrix(b, RowMatrix::Zero(1, 3));
    for (std::size_t k = 0; k < b.size(); ++k) {
        bool odd = false;
        for (unsigned a : b.index(k)) odd |= a % 2 == 1;
        if (odd) EXPECT_EQ(origin(0, static_cast<Eigen::Index>(k)), 0.0);
    }
    RowMatrix half(1, 1);
    half(0, 0) = 0.5;
    EXPECT_DOUBLE_EQ(measurement_matrix(PCBasis(1, 2), half)(0, 2), -0.125);
    EXPECT_EQ(code_of([&] { (void)measurement_matrix(PCBasis(2, 2), d.nodes); }), ErrorCode::shape);
}

TEST(Bpdn, L1BallProjection) {
    std::mt19937_64 rng(1);
    std::normal_distribution<> n(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        Vector v(1 + t % 40);
        for (auto& x : v) x = n(rng);
        const double tau = std::uniform_real_distribution<>(0.0, 1.5)(rng) * v.cwiseAbs().sum();
        const Vector p = project_l1_ball(v, tau);
        EXPECT_LE((p - l1_projection_oracle(v, tau)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(p.cwiseAbs().sum(), tau * (1 + 1e-12) + 1e-15);
    }
    Vector v(3);
    v << 0.2, -0.1, 0.3;
    EXPECT_EQ(project_l1_ball(v, 1.0), v);
    EXPECT_EQ(project_l1_ball(v, 0.0), Vector::Zero(3));
    EXPECT_EQ(code_of([&] { (void)project_l1_ball(v, -1.0); }), ErrorCode::invalid_argument);
}

TEST(Bpdn, ZeroSolutionWhenBudgetCoversData) {
    const PCBasis b(2, 3);
    const auto d = random_design(2, 15, 2);
    const Matrix psi = measurement_matrix(b, d.nodes);
    Vector e = Vector::LinSpaced(15, -1.0, 2.0);
    const auto s = solve_bpdn(psi, e, e.norm() * 1.01);
    EXPECT_EQ(s.exit, BpdnExit::zero_solution);
    EXPECT_TRUE(s.converged);
    EXPECT_EQ(s.coefficients, Vector::Zero(psi.cols()));
    EXPECT_DOUBLE_EQ(s.residual_norm, e.norm());
}

TEST(Bpdn, BasisPursuitLimitSquareSystem) {
    const PCBasis b(1, 5);
    RowMatrix nodes(6, 1);
    for (Eigen::Index q = 0; q < 6; ++q) nodes(q, 0) = std::cos(M_PI * (q + 0.5) / 6.0);
    const Matrix psi = measurement_matrix(b, nodes);
    Vector e(6);
    e << 1.0, -2.0, 0.5, 3.0, 0.25, -1.0;
    const Vector direct = psi.fullPivLu().solve(e);
    SpgOptions opt;
    opt.opt_tol = 1e-10;
    opt.max_iters = 200'000;
    const auto s = solve_bpdn(psi, e, 0.0, opt);
    EXPECT_TRUE(s.converged);
    EXPECT_LE((s.coefficients - direct).norm(), 1e-6 * direct.norm());
}

TEST(Bpdn, LeastSquaresFloor) {
    // Overdetermined and inconsistent: no point meets delta = 0, the LS point is returned.
    const PCBasis b(1, 2);
    const auto d = random_design(1, 30, 8);
    const Matrix psi = measurement_matrix(b, d.nodes);
    Vector e(30);
    for (Eigen::Index q = 0; q < 30; ++q) e[q] = std::cos(3.0 * d.nodes(q, 0));
    const Vector ls = (psi.transpose() * psi).ldlt().solve(psi.transpose() * e);
    const auto s = solve_bpdn(psi, e, 0.0);
    EXPECT_EQ(s.exit, BpdnExit::least_squares);
    EXPECT_LE((s.coefficients - ls).norm(), 1e-10 * ls.norm());
}

TEST(Bpdn, FeasibilityAndParetoMonotonicity) {
    std::mt19937_64 rng(12);
    std::size_t path_points = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 30 + 5 * static_cast<std::size_t>(t);
        const PCBasis b(3, 4);
        const auto d = random_design(3, n, 100 + static_cast<std::uint64_t>(t));
        const Matrix psi = measurement_matrix(b, d.nodes);
        Vector e(static_cast<Eigen::Index>(n));
        for (Eigen::Index q = 0; q < e.size(); ++q)
            e[q] = std::exp(0.5 * d.nodes(q, 0)) + d.nodes(q, 1) * d.nodes(q, 2) + 0.05 * std::normal_distribution<>()(rng);
        const double delta = std::uniform_real_distribution<>(0.02, 0.3)(rng) * e.norm();
        SpgOptions opt;
        const auto s = solve_bpdn(psi, e, delta, opt);
        const Vector ls = psi.colPivHouseholderQr().solve(e);
        const double floor = (e - psi * ls).norm();
        if (floor >= delta) {
            // Budget below the least-squares floor: the least-squares point comes back.
            EXPECT_EQ(s.exit, BpdnExit::least_squares) << t;
            EXPECT_NEAR(s.residual_norm, floor, 1e-10 * e.norm()) << t;
            continue;
        }
        ASSERT_TRUE(s.converged) << t;
        EXPECT_LE(s.residual_norm, delta * (1 + opt.opt_tol)) << t;
        EXPECT_NEAR((e - psi * s.coefficients).norm(), s.residual_norm, 1e-12 * e.norm());
        EXPECT_NEAR(s.coefficients.cwiseAbs().sum(), s.l1_norm, 1e-12 * s.l1_norm);

        auto path = s.pareto_path;
        path_points += path.size();
        std::stable_sort(path.begin(), path.end(), [](auto a, auto b) { return a.tau < b.tau; });
        for (std::size_t i = 1; i < path.size(); ++i)
            EXPECT_LE(path[i].residual_norm, path[i - 1].residual_norm + opt.opt_tol * e.norm()) << t;
    }
    EXPECT_GE(path_points, 20u);
}

TEST(Bpdn, L1MinimalityAgainstReference) {
    struct Case {
        std::size_t m;
        unsigned r;
        std::size_t n;
        double rel_delta;
    };
    const Case cases[] = {{2, 3, 7, 0.2}, {3, 2, 9, 0.1}, {1, 11, 10, 0.3}, {2, 2, 10, 0.25}, {4, 1, 5, 0.05}};
    std::mt19937_64 rng(77);
    std::normal_distribution<> g(0.0, 1.0);
    for (const auto& c : cases) {
        const PCBasis b(c.m, c.r);
        ASSERT_LE(b.size(), 12u);
        const auto d = random_design(c.m, c.n, rng());
        const Matrix psi = measurement_matrix(b, d.nodes);
        Vector e(static_cast<Eigen::Index>(c.n));
        for (auto& x : e) x = g(rng);
        // Keep the budget above the least-squares floor so the constraint is attainable.
        const Vector ls = psi.colPivHouseholderQr().solve(e);
        const double delta = std::max(c.rel_delta * e.norm(), 1.05 * (e - psi * ls).norm());
        SpgOptions opt;
        opt.opt_tol = 1e-11;
        opt.max_iters = 500'000;
        const auto s = solve_bpdn(psi, e, delta, opt);
        EXPECT_TRUE(s.converged);
        const double ref = l1_reference(psi, e, delta);
        EXPECT_NEAR(s.l1_norm, ref, 1e-6 * ref) << c.m << " " << c.r << " " << c.n;
    }
}

TEST(Bpdn, PlantedSparsityRecovery) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const auto p = planted_sparse(seed, 200, 0.02);
        const Matrix psi = measurement_matrix(p.basis, p.nodes);
        const double delta = 1.1 * p.sigma * std::sqrt(200.0);
        const auto s = solve_bpdn(psi, p.values, delta);
        const double err = (s.coefficients - p.truth).norm() / p.truth.norm();
        EXPECT_LE(err, 0.05) << "seed " << seed;
    }
}

TEST(Bpdn, CrossValidationNoiseFree) {
    const PCBasis b(2, 3);
    const auto d = random_design(2, 60, 31);
    Vector truth = Vector::Zero(static_cast<Eigen::Index>(b.size()));
    truth << 2.0, 0.5, -1.0, 0.0, 0.3, 0.0, 0.1, 0.0, 0.0, -0.2;
    const DesignEnsemble ens(d, measurement_matrix(b, d.nodes) * truth);
    BpdnConfig cfg;
    cfg.seed = 4;
    const auto rep = fit_bpdn(b, ens, cfg);
    ASSERT_TRUE(rep.cross_validated);
    const auto grid = default_delta_grid();
    EXPECT_DOUBLE_EQ(rep.chosen_delta, grid.front() * ens.values().norm());
    EXPECT_LE((rep.coefficients - truth).norm(), 1e-3 * truth.norm());
    EXPECT_EQ(rep.cv_errors.rows(), 4);
    EXPECT_EQ(rep.cv_errors.cols(), 20);
}

TEST(Bpdn, CrossValidatedDeltaTracksNoise) {
    const auto p = planted_sparse(42, 200, 0.05);
    const DesignEnsemble ens(p.nodes, p.values);
    BpdnConfig cfg;
    cfg.seed = 1;
    const auto rep = fit_bpdn(p.basis, ens, cfg);
    ASSERT_TRUE(rep.cross_validated);
    const auto best = static_cast<std::size_t>(
        std::min_element(rep.cv_mean_errors.begin(), rep.cv_mean_errors.end()) - rep.cv_mean_errors.begin());
    const double n_train = 150.0;
    const double target = p.sigma * std::sqrt(n_train);
    EXPECT_GT(rep.cv_train_deltas[best], 0.5 * target);
    EXPECT_LT(rep.cv_train_deltas[best], 2.0 * target);
    // The final budget is the training budget scaled back to the full sample.
    EXPECT_NEAR(rep.chosen_delta, rep.cv_train_deltas[best] * std::sqrt(200.0 / n_train), 1e-9 * rep.chosen_delta);
}

TEST(Bpdn, CrossValidationIsThreadInvariant) {
    const auto p = planted_sparse(9, 120, 0.05);
    const DesignEnsemble ens(p.nodes, p.values);
    BpdnConfig cfg;
    cfg.seed = 3;
    cfg.delta_grid = {0.005, 0.01, 0.02, 0.05, 0.1};
    const auto a = fit_bpdn(p.basis, ens, cfg);
    cfg.threads = 3;
    const auto b = fit_bpdn(p.basis, ens, cfg);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.cv_errors, b.cv_errors);
    EXPECT_EQ(a.chosen_delta, b.chosen_delta);
    cfg.seed = 4;
    const auto c = fit_bpdn(p.basis, ens, cfg);
    EXPECT_NE(a.cv_errors, c.cv_errors);
}

TEST(Bpdn, ConfigurationErrors) {
    const PCBasis b(3, 3);
    const auto d = random_design(3, 20, 5);
    const DesignEnsemble ens(d, Vector::LinSpaced(20, 1.0, 2.0));
    BpdnConfig cfg;
    cfg.delta_grid = {0.1, 0.05};
    EXPECT_EQ(code_of([&] { (void)fit_bpdn(b, ens, cfg); }), ErrorCode::invalid_argument);
    cfg.delta_grid = {0.1};
    cfg.cv_folds = 1;
    EXPECT_EQ(code_of([&] { (void)fit_bpdn(b, ens, cfg); }), ErrorCode::invalid_argument);
    cfg.cv_folds = 21;
    EXPECT_EQ(code_of([&] { (void)fit_bpdn(b, ens, cfg); }), ErrorCode::precondition);
    cfg.cv_folds = 4;
    cfg.delta = -1.0;
    EXPECT_EQ(code_of([&] { (void)fit_bpdn(b, ens, cfg); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { (void)solve_bpdn(Matrix::Ones(3, 2), Vector::Ones(4), 0.1); }), ErrorCode::shape);
}

TEST(Bpdn, AllFoldsFailingIsANumericalError) {
    const PCBasis b(5, 3);
    const auto d = random_design(5, 20, 6);
    Vector e(20);
    for (Eigen::Index q = 0; q < 20; ++q) e[q] = std::exp(d.nodes(q, 0)) + d.nodes(q, 3);
    const DesignEnsemble ens(d, e);
    BpdnConfig cfg;
    cfg.delta_grid = {1e-3};
    cfg.solver.max_iters = 1;
    try {
        (void)fit_bpdn(b, ens, cfg);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::numerical);
        EXPECT_NE(std::string(err.what()).find("fold 3"), std::string::npos);
    }
}

TEST(Bpdn, NonConvergenceReturnsFlaggedIterate) {
    const auto p = planted_sparse(3, 100, 0.02);
    const Matrix psi = measurement_matrix(p.basis, p.nodes);
    SpgOptions opt;
    opt.max_iters = 3;
    const auto s = solve_bpdn(psi, p.values, 0.01 * p.values.norm(), opt);
    EXPECT_FALSE(s.converged);
    EXPECT_EQ(s.exit, BpdnExit::max_iters);
    EXPECT_LE(s.iterations, 3u);
    EXPECT_EQ(s.coefficients.size(), psi.cols());
}
