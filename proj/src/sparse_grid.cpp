#include "pcecal/sparse_grid.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace pcecal {

namespace {

using Real = long double;

// Legendre P_0..P_n at x.
void legendre_ld(Real x, std::size_t n, std::vector<Real>& p) {
    p.assign(n + 1, 0.0L);
    p[0] = 1.0L;
    if (n == 0) return;
    p[1] = x;
    for (std::size_t k = 1; k < n; ++k)
        p[k + 1] = ((2.0L * k + 1.0L) * x * p[k] - static_cast<Real>(k) * p[k - 1]) / (k + 1.0L);
}

struct GaussLegendreLD {
    std::vector<Real> x, w;  // weights sum to 2
};

GaussLegendreLD gauss_legendre_ld(std::size_t n) {
    GaussLegendreLD r;
    r.x.resize(n);
    r.w.resize(n);
    std::vector<Real> p;
    for (std::size_t i = 0; i < n; ++i) {
        Real x = std::cos(std::numbers::pi_v<Real> * (i + 0.75L) / (n + 0.5L));
        Real dp = 0.0L;
        for (int it = 0; it < 100; ++it) {
            legendre_ld(x, n, p);
            dp = n * (x * p[n] - p[n - 1]) / (x * x - 1.0L);
            const Real dx = p[n] / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-19L) break;
        }
        legendre_ld(x, n, p);
        dp = n * (x * p[n] - p[n - 1]) / (x * x - 1.0L);
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = 2.0L / ((1.0L - x * x) * dp * dp);
    }
    return r;
}

// Dense solve with partial pivoting.
std::vector<Real> solve_ld(std::vector<std::vector<Real>> a, std::vector<Real> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const Real f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<Real> x(n);
    for (std::size_t r = n; r-- > 0;) {
        Real s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

// Patterson extension: the n + 1 new nodes are the roots of q (degree n + 1) with
// integral of node_poly(x) q(x) P_k(x) dx = 0 for k = 0..n.
std::vector<Real> extension_nodes(const std::vector<Real>& old_nodes) {
    const std::size_t n = old_nodes.size();
    const std::size_t deg = n + 1;
    const auto gl = gauss_legendre_ld(64);
    auto node_poly = [&](Real x) {
        Real v = 1.0L;
        for (Real t : old_nodes) v *= (x - t);
        return v;
    };
    std::vector<std::vector<Real>> a(deg, std::vector<Real>(deg, 0.0L));
    std::vector<Real> rhs(deg, 0.0L);
    std::vector<Real> p;
    for (std::size_t g = 0; g < gl.x.size(); ++g) {
        legendre_ld(gl.x[g], deg, p);
        const Real base = gl.w[g] * node_poly(gl.x[g]);
        for (std::size_t k = 0; k < deg; ++k) {
            for (std::size_t j = 0; j < deg; ++j) a[k][j] += base * p[j] * p[k];
            rhs[k] -= base * p[deg] * p[k];
        }
    }
    std::vector<Real> c = solve_ld(a, rhs);
    c.push_back(1.0L);
    auto q = [&](Real x) {
        legendre_ld(x, deg, p);
        Real v = 0.0L;
        for (std::size_t j = 0; j <= deg; ++j) v += c[j] * p[j];
        return v;
    };
    // Bracket sign changes on a fine grid, then bisect to full precision.
    std::vector<Real> roots;
    constexpr int samples = 40000;
    Real x0 = -1.0L;
    Real f0 = q(x0);
    for (int i = 1; i <= samples; ++i) {
        const Real x1 = -1.0L + 2.0L * i / samples;
        const Real f1 = q(x1);
        if (f0 == 0.0L) {
            roots.push_back(x0);
        } else if (f0 * f1 < 0.0L) {
            Real lo = x0, hi = x1, flo = f0;
            for (int it = 0; it < 200 && hi - lo > 0.0L; ++it) {
                const Real mid = 0.5L * (lo + hi);
                if (mid == lo || mid == hi) break;
                const Real fm = q(mid);
                if ((fm < 0.0L) == (flo < 0.0L)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5L * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    if (roots.size() != deg) fail(ErrorCode::numerical, "Gauss-Patterson extension did not yield real roots");
    // Exact symmetry keeps the nested tables mirror-symmetric.
    for (std::size_t i = 0; i < deg / 2; ++i) {
        const Real s = 0.5L * (roots[deg - 1 - i] - roots[i]);
        roots[i] = -s;
        roots[deg - 1 - i] = s;
    }
    if (deg % 2 == 1) roots[deg / 2] = 0.0L;
    return roots;
}

// Interpolatory weights for the density 1/2: sum_i w_i P_k(x_i) = delta_k0.
std::vector<Real> interpolatory_weights(const std::vector<Real>& x) {
    const std::size_t n = x.size();
    std::vector<std::vector<Real>> a(n, std::vector<Real>(n));
    std::vector<Real> p;
    for (std::size_t i = 0; i < n; ++i) {
        legendre_ld(x[i], n - 1, p);
        for (std::size_t k = 0; k < n; ++k) a[k][i] = p[k];
    }
    std::vector<Real> b(n, 0.0L);
    b[0] = 1.0L;
    return solve_ld(a, b);
}

struct PattersonTables {
    std::array<QuadratureRule1D, 3> rules;  // 1, 3, 7 points
};

PattersonTables make_patterson_tables() {
    PattersonTables t;
    std::vector<Real> nodes{0.0L};
    for (std::size_t r = 0; r < t.rules.size(); ++r) {
        if (r > 0) {
            auto added = extension_nodes(nodes);
            // Keep the previous level's long-double values so nesting survives rounding to double.
            nodes.insert(nodes.end(), added.begin(), added.end());
            std::sort(nodes.begin(), nodes.end());
        }
        const auto w = interpolatory_weights(nodes);
        auto& rule = t.rules[r];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            rule.nodes.push_back(static_cast<double>(nodes[i]));
            rule.weights.push_back(static_cast<double>(w[i]));
        }
        // Symmetrize weights, which the linear solve only reproduces to rounding.
        const std::size_t n = rule.weights.size();
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double s = static_cast<double>(0.5L * (w[i] + w[n - 1 - i]));
            rule.weights[i] = rule.weights[n - 1 - i] = s;
        }
    }
    return t;
}

constexpr std::array<std::size_t, max_sparse_level + 1> delayed_index{0, 1, 1, 2, 2, 2};

const PattersonTables& patterson_tables() {
    static const PattersonTables tables = make_patterson_tables();
    return tables;
}

const std::vector<QuadratureRule1D>& delayed_rules() {
    static const std::vector<QuadratureRule1D> rules = [] {
        std::vector<QuadratureRule1D> out;
        for (unsigned l = 0; l <= max_sparse_level; ++l) {
            QuadratureRule1D r = patterson_tables().rules[delayed_index[l]];
            r.level = l;
            out.push_back(std::move(r));
        }
        return out;
    }();
    return rules;
}

void check_level(unsigned level) {
    require(level <= max_sparse_level, ErrorCode::invalid_argument,
            "sparse grid level " + std::to_string(level) + " unsupported (0.." +
                std::to_string(max_sparse_level) + ")");
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

const QuadratureRule1D& gauss_patterson_rule(unsigned level) {
    check_level(level);
    return delayed_rules()[level];
}

std::size_t gauss_patterson_size(unsigned level) { return gauss_patterson_rule(level).nodes.size(); }

QuadratureRule1D gauss_legendre_rule(std::size_t n) {
    require(n >= 1, ErrorCode::invalid_argument, "Gauss-Legendre rule needs n >= 1");
    QuadratureRule1D r;
    if (n == 1) {
        r.nodes = {0.0};
        r.weights = {1.0};
        return r;
    }
    const auto gl = gauss_legendre_ld(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.nodes.push_back(static_cast<double>(gl.x[i]));
        r.weights.push_back(static_cast<double>(gl.w[i] / 2.0L));
    }
    return r;
}

SparseGrid::SparseGrid(std::size_t dim, unsigned level, RowMatrix nodes, Vector weights)
    : dim_(dim), level_(level), nodes_(std::move(nodes)), weights_(std::move(weights)) {
    require(static_cast<std::size_t>(nodes_.cols()) == dim_, ErrorCode::shape, "sparse grid node width mismatch");
    require(nodes_.rows() == weights_.size(), ErrorCode::shape, "sparse grid weight count mismatch");
}

SparseGrid build_smolyak(std::size_t dim, unsigned level) {
    require(dim >= 1, ErrorCode::invalid_argument, "sparse grid dimension must be >= 1");
    check_level(level);

    // Nodes are keyed by their position in the finest 1D table; positions order like coordinates.
    const auto& finest = gauss_patterson_rule(max_sparse_level).nodes;
    std::vector<std::vector<std::uint8_t>> position(max_sparse_level + 1);
    for (unsigned l = 0; l <= max_sparse_level; ++l) {
        for (double x : gauss_patterson_rule(l).nodes) {
            const auto it = std::find(finest.begin(), finest.end(), x);
            if (it == finest.end()) fail(ErrorCode::numerical, "Gauss-Patterson tables are not nested");
            position[l].push_back(static_cast<std::uint8_t>(it - finest.begin()));
        }
    }

    std::map<std::vector<std::uint8_t>, double> acc;
    std::vector<unsigned> levels(dim, 0);
    const unsigned lo = level + 1 > dim ? static_cast<unsigned>(level + 1 - dim) : 0;

    // Enumerate level multi-indices with lo <= |l| <= level.
    auto visit = [&](auto&& self, std::size_t pos, unsigned used) -> void {
        if (pos == dim) {
            if (used < lo) return;
            const unsigned gap = level - used;
            const double coeff = ((gap % 2) ? -1.0 : 1.0) * static_cast<double>(binomial(dim - 1, gap));
            if (coeff == 0.0) return;
            std::vector<std::size_t> counter(dim, 0);
            std::vector<std::uint8_t> key(dim);
            while (true) {
                double w = coeff;
                for (std::size_t i = 0; i < dim; ++i) {
                    key[i] = position[levels[i]][counter[i]];
                    w *= gauss_patterson_rule(levels[i]).weights[counter[i]];
                }
                acc[key] += w;
                std::size_t i = 0;
                for (; i < dim; ++i) {
                    if (++counter[i] < position[levels[i]].size()) break;
                    counter[i] = 0;
                }
                if (i == dim) break;
            }
            return;
        }
        for (unsigned l = 0; l + used <= level; ++l) {
            levels[pos] = l;
            self(self, pos + 1, used + l);
        }
    };
    visit(visit, 0, 0);

    RowMatrix nodes(static_cast<Eigen::Index>(acc.size()), static_cast<Eigen::Index>(dim));
    Vector weights(static_cast<Eigen::Index>(acc.size()));
    Eigen::Index q = 0;
    for (const auto& [key, w] : acc) {
        for (std::size_t i = 0; i < dim; ++i) nodes(q, static_cast<Eigen::Index>(i)) = finest[key[i]];
        weights[q] = w;
        ++q;
    }
    return {dim, level, std::move(nodes), std::move(weights)};
}

SparseGrid subset_levels(const SparseGrid& grid, unsigned lower_level) {
    require(lower_level <= grid.level(), ErrorCode::invalid_argument,
            "cannot subset a level-" + std::to_string(grid.level()) + " grid to level " +
                std::to_string(lower_level));
    if (lower_level == grid.level()) return grid;
    SparseGrid sub = build_smolyak(grid.dim(), lower_level);
    // Both node lists are lexicographically sorted; walk them together.
    auto less = [&](std::span<const double> a, std::span<const double> b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    };
    std::size_t j = 0;
    for (std::size_t q = 0; q < sub.size(); ++q) {
        while (j < grid.size() && less(grid.node(j), sub.node(q))) ++j;
        if (j == grid.size() || !std::equal(sub.node(q).begin(), sub.node(q).end(), grid.node(j).begin()))
            fail(ErrorCode::precondition, "grid is not a Smolyak grid of this family: lower-level node missing");
    }
    return sub;
}

}  // namespace pcecal
