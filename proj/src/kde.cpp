#include "pcecal/kde.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pcecal {

namespace {

double quantile_sorted(const std::vector<double>& s, double p) {
    const double pos = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
    require(samples.size() >= 2, ErrorCode::invalid_argument, "bandwidth needs at least two samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
    double spread = std::min(sd, iqr);
    if (spread <= 0.0) spread = std::max(sd, iqr);
    if (!(spread > 0.0)) fail(ErrorCode::numerical, "KDE bandwidth is degenerate: samples have zero spread");
    return 0.9 * spread * std::pow(n, -0.2);
}

Density kde(std::span<const double> samples, std::size_t n_grid, std::optional<double> bandwidth) {
    require(samples.size() >= 100, ErrorCode::precondition, "KDE needs at least 100 samples");
    require(n_grid >= 2, ErrorCode::invalid_argument, "KDE grid needs at least two points");
    for (double x : samples) require(std::isfinite(x), ErrorCode::numerical, "KDE sample is not finite");
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "KDE bandwidth must be positive");

    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    Density d;
    d.bandwidth = h;
    d.grid.resize(n_grid);
    d.density.assign(n_grid, 0.0);
    const double lo = *mn - 3.0 * h;
    const double dx = (*mx - *mn + 6.0 * h) / static_cast<double>(n_grid - 1);
    for (std::size_t i = 0; i < n_grid; ++i) d.grid[i] = lo + dx * static_cast<double>(i);

    // Kernel support is cut at 8h where exp(-32) is below double resolution of the sum.
    const double reach = 8.0 * h;
    for (double x : samples) {
        const auto first = static_cast<std::ptrdiff_t>(std::ceil((x - reach - lo) / dx));
        const auto last = static_cast<std::ptrdiff_t>(std::floor((x + reach - lo) / dx));
        const std::ptrdiff_t a = std::max<std::ptrdiff_t>(first, 0);
        const std::ptrdiff_t b = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(n_grid) - 1);
        for (auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(a, 0)); static_cast<std::ptrdiff_t>(i) <= b; ++i) {
            const double u = (d.grid[i] - x) / h;
            d.density[i] += std::exp(-0.5 * u * u);
        }
    }
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (double& v : d.density) v *= norm;
    return d;
}

double trapezoid(const Density& d) {
    double s = 0.0;
    for (std::size_t i = 1; i < d.grid.size(); ++i)
        s += 0.5 * (d.density[i] + d.density[i - 1]) * (d.grid[i] - d.grid[i - 1]);
    return s;
}

}  // namespace pcecal
