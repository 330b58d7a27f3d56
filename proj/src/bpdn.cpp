#include "pcecal/bpdn.hpp"

#include "pcecal/error.hpp"
#include "pcecal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace pcecal {

Matrix measurement_matrix(const PCBasis& basis, const RowMatrix& nodes) {
    require(static_cast<std::size_t>(nodes.cols()) == basis.dim(), ErrorCode::shape,
            "measurement matrix: basis dimension " + std::to_string(basis.dim()) + " vs node width " +
                std::to_string(nodes.cols()));
    Matrix psi(nodes.rows(), static_cast<Eigen::Index>(basis.size()));
    std::vector<double> row(basis.size());
    for (Eigen::Index q = 0; q < nodes.rows(); ++q) {
        basis.evaluate(std::span<const double>(nodes.data() + q * nodes.cols(), basis.dim()), row);
        for (Eigen::Index k = 0; k < psi.cols(); ++k) psi(q, k) = row[static_cast<std::size_t>(k)];
    }
    return psi;
}

Vector project_l1_ball(const Vector& v, double tau) {
    require(tau >= 0.0, ErrorCode::invalid_argument, "l1 ball radius must be nonnegative");
    if (v.cwiseAbs().sum() <= tau) return v;
    if (tau == 0.0) return Vector::Zero(v.size());
    std::vector<double> u(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::fabs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double t = (cumsum - tau) / static_cast<double>(j + 1);
        if (u[j] > t) theta = t;
    }
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double m = std::max(std::fabs(v[i]) - theta, 0.0);
        out[i] = v[i] < 0.0 ? -m : m;
    }
    return out;
}

namespace {

constexpr double step_min = 1e-16;
constexpr double step_max = 1e5;
constexpr double armijo = 1e-4;
constexpr std::size_t memory = 10;
constexpr double stall_tol = 1e-4;

double spectral_norm_sq_estimate(const Matrix& a) {
    Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double est = 1.0;
    for (int it = 0; it < 30; ++it) {
        Vector w = a.transpose() * (a * v);
        est = w.norm();
        if (est == 0.0) return 1.0;
        v = w / est;
    }
    return est;
}

}  // namespace

BpdnSolution solve_bpdn(const Matrix& psi, const Vector& values, double delta, const SpgOptions& options) {
    require(psi.rows() == values.size(), ErrorCode::shape, "BPDN: matrix rows do not match data length");
    require(psi.cols() >= 1, ErrorCode::shape, "BPDN: empty basis");
    require(std::isfinite(delta) && delta >= 0.0, ErrorCode::invalid_argument, "BPDN: delta must be >= 0");
    require(options.opt_tol > 0.0, ErrorCode::invalid_argument, "BPDN: opt_tol must be positive");

    BpdnSolution sol;
    const double b_norm = values.norm();
    if (delta >= b_norm) {
        sol.coefficients = Vector::Zero(psi.cols());
        sol.residual_norm = b_norm;
        sol.converged = true;
        sol.exit = BpdnExit::zero_solution;
        return sol;
    }

    const double lower_tol = options.opt_tol * std::max(1.0, b_norm);
    double upper_tol = delta > 0.0 ? options.opt_tol * delta : lower_tol;

    auto finish = [&](Vector x, const Vector& r, BpdnExit exit, bool converged) {
        sol.residual_norm = r.norm();
        sol.l1_norm = x.cwiseAbs().sum();
        sol.coefficients = std::move(x);
        sol.exit = exit;
        sol.converged = converged;
        return sol;
    };

    // When the range of psi misses the data there may be no point with residual <= delta.
    // A unique least-squares point is returned as is; otherwise aim for the sparsest
    // point on the least-squares floor.
    BpdnExit root_exit = BpdnExit::root_found;
    {
        Eigen::ColPivHouseholderQR<Matrix> qr(psi);
        if (qr.rank() < psi.rows()) {
            Vector x_ls = qr.solve(values);
            Vector r_ls = values - psi * x_ls;
            const double r_ls_norm = r_ls.norm();
            if (r_ls_norm >= delta) {
                if (qr.rank() == psi.cols())
                    return finish(std::move(x_ls), r_ls, BpdnExit::least_squares, r_ls_norm - delta <= upper_tol);
                delta = r_ls_norm + lower_tol;
                upper_tol = options.opt_tol * delta;
                root_exit = BpdnExit::least_squares;
            }
        }
    }

    const Eigen::Index n = psi.cols();
    Vector x = Vector::Zero(n);
    Vector r = values;
    Vector g = -(psi.transpose() * r);
    double f = 0.5 * r.squaredNorm();
    double tau = 0.0;
    double step = 1.0 / spectral_norm_sq_estimate(psi);
    std::deque<double> last_f{f};
    double f_old = f;
    double r_norm_old = b_norm;
    bool updated_last = false;

    for (;;) {
        const double r_norm = r.norm();
        const double g_norm = g.cwiseAbs().maxCoeff();
        const double gap = r.dot(r - values) + tau * g_norm;
        const double r_gap = std::fabs(gap) / std::max(1.0, f);
        const double a_err = r_norm - delta;
        const double r_err2 = std::fabs(r_norm * r_norm - delta * delta) / std::max(1.0, f);
        const bool sub_solved = r_gap <= std::max(options.opt_tol, r_err2);
        const bool at_root = a_err <= upper_tol && -a_err <= lower_tol;

        if (at_root && sub_solved) return finish(std::move(x), r, root_exit, true);

        const double df = std::fabs(f - f_old);
        const bool stalled = sol.iterations > 0 && !updated_last &&
                             ((r_norm > 2.0 * delta && df <= stall_tol * f) ||
                              (r_norm <= 2.0 * delta && df <= 0.1 * f * std::fabs(r_norm - r_norm_old)));

        if ((sub_solved || stalled) && !at_root) {
            if (g_norm <= 1e-13 * std::max(1.0, r_norm))
                return finish(std::move(x), r, BpdnExit::least_squares, false);
            // Loosely solved subproblems are not points on the curve.
            if (r_gap <= options.opt_tol) sol.pareto_path.push_back({tau, r_norm});
            const double tau_old = tau;
            tau = std::max(0.0, tau + r_norm * a_err / g_norm);
            if (tau < tau_old) {
                x = project_l1_ball(x, tau);
                r = values - psi * x;
                g = -(psi.transpose() * r);
                f = 0.5 * r.squaredNorm();
            }
            last_f.assign(1, f);
            updated_last = true;
            if (sol.iterations >= options.max_iters)
                return finish(std::move(x), r, BpdnExit::max_iters, false);
            continue;
        }
        updated_last = false;

        if (sol.iterations >= options.max_iters) return finish(std::move(x), r, BpdnExit::max_iters, false);
        ++sol.iterations;

        // Nonmonotone projected step with backtracking on the step length.
        const double f_max = *std::max_element(last_f.begin(), last_f.end());
        double alpha = step;
        Vector x_new, r_new;
        double f_new = 0.0;
        for (int ls = 0;; ++ls) {
            x_new = project_l1_ball(x - alpha * g, tau);
            const double gtd = g.dot(x_new - x);
            r_new = values - psi * x_new;
            f_new = 0.5 * r_new.squaredNorm();
            if (f_new <= f_max + armijo * gtd || ls >= 40) break;
            alpha *= 0.5;
        }
        Vector g_new = -(psi.transpose() * r_new);
        const Vector s = x_new - x;
        const double sts = s.squaredNorm();
        const double sty = s.dot(g_new - g);
        step = sty <= 0.0 ? step_max : std::clamp(sts / sty, step_min, step_max);

        f_old = f;
        r_norm_old = r_norm;
        x = std::move(x_new);
        r = std::move(r_new);
        g = std::move(g_new);
        f = f_new;
        last_f.push_back(f);
        if (last_f.size() > memory) last_f.pop_front();
    }
}

std::vector<double> default_delta_grid() {
    std::vector<double> grid(20);
    const double lo = std::log(1e-4);
    const double hi = std::log(0.5);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.size() - 1));
    return grid;
}

namespace {

struct Fold {
    Matrix psi_train, psi_val;
    Vector e_train, e_val;
};

}  // namespace

BpdnReport fit_bpdn(const PCBasis& basis, const DesignEnsemble& ensemble, const BpdnConfig& config) {
    const Matrix psi = measurement_matrix(basis, ensemble.nodes());
    const Vector& values = ensemble.values();
    const auto n = static_cast<std::size_t>(values.size());
    const double e_norm = values.norm();

    BpdnReport rep;
    double delta = 0.0;
    if (config.delta) {
        require(*config.delta >= 0.0, ErrorCode::invalid_argument, "BPDN: delta must be >= 0");
        delta = *config.delta;
    } else {
        std::vector<double> grid = config.delta_grid.empty() ? default_delta_grid() : config.delta_grid;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            require(grid[j] >= 0.0, ErrorCode::invalid_argument, "delta grid values must be nonnegative");
            require(j == 0 || grid[j] > grid[j - 1], ErrorCode::invalid_argument, "delta grid must be increasing");
        }
        require(!grid.empty(), ErrorCode::invalid_argument, "delta grid must not be empty");
        const std::size_t k = config.cv_folds;
        require(k >= 2, ErrorCode::invalid_argument, "cross-validation needs at least 2 folds");
        require(n >= k, ErrorCode::precondition,
                "cross-validation needs at least as many rows (" + std::to_string(n) + ") as folds (" +
                    std::to_string(k) + ")");

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng(config.seed);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::size_t> fold_of(n);
        for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % k;

        std::vector<Fold> folds(k);
        double mean_train = 0.0;
        for (std::size_t f = 0; f < k; ++f) {
            std::vector<Eigen::Index> train, val;
            for (std::size_t q = 0; q < n; ++q) (fold_of[q] == f ? val : train).push_back(static_cast<Eigen::Index>(q));
            folds[f].psi_train = psi(train, Eigen::all);
            folds[f].psi_val = psi(val, Eigen::all);
            folds[f].e_train = values(train);
            folds[f].e_val = values(val);
            mean_train += static_cast<double>(train.size()) / static_cast<double>(k);
        }

        const std::size_t g = grid.size();
        rep.cv_errors = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g));
        std::vector<char> converged(k * g, 0);
        std::vector<std::string> exits(k * g);
        parallel_for(k * g, config.threads, [&](std::size_t t) {
            const std::size_t f = t / g;
            const std::size_t j = t % g;
            const auto& fold = folds[f];
            const double train_delta =
                grid[j] * e_norm * std::sqrt(static_cast<double>(fold.e_train.size()) / static_cast<double>(n));
            const auto s = solve_bpdn(fold.psi_train, fold.e_train, train_delta, config.solver);
            rep.cv_errors(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) =
                (fold.e_val - fold.psi_val * s.coefficients).norm();
            converged[t] = s.converged ? 1 : 0;
            exits[t] = std::to_string(static_cast<int>(s.exit));
        });
        if (std::none_of(converged.begin(), converged.end(), [](char c) { return c != 0; })) {
            std::ostringstream msg;
            msg << "BPDN cross-validation: no (fold, delta) fit converged; exit codes per fold:";
            for (std::size_t f = 0; f < k; ++f) {
                msg << " [fold " << f << ':';
                for (std::size_t j = 0; j < g; ++j) msg << ' ' << exits[f * g + j];
                msg << ']';
            }
            fail(ErrorCode::numerical, msg.str());
        }

        rep.cross_validated = true;
        rep.cv_grid = grid;
        rep.cv_mean_errors.resize(g);
        rep.cv_train_deltas.resize(g);
        std::size_t best = 0;
        for (std::size_t j = 0; j < g; ++j) {
            rep.cv_mean_errors[j] = rep.cv_errors.col(static_cast<Eigen::Index>(j)).mean();
            rep.cv_train_deltas[j] = grid[j] * e_norm * std::sqrt(mean_train / static_cast<double>(n));
            if (rep.cv_mean_errors[j] < rep.cv_mean_errors[best]) best = j;
        }
        delta = grid[best] * e_norm;
    }

    const auto s = solve_bpdn(psi, values, delta, config.solver);
    rep.coefficients = s.coefficients;
    rep.chosen_delta = delta;
    rep.residual_norm = s.residual_norm;
    rep.l1_norm = s.l1_norm;
    rep.iterations = s.iterations;
    rep.converged = s.converged;
    rep.exit = s.exit;
    return rep;
}

}  // namespace pcecal
