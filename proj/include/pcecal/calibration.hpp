#pragma once

#include "pcecal/parameter_space.hpp"
#include "pcecal/surrogate.hpp"
#include "pcecal/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace pcecal {

/// Gamma(alpha, rate beta) prior on the likelihood scale S.
struct HyperPrior {
    double alpha = 18.18;
    double beta = 72.02;

    [[nodiscard]] double mean() const noexcept { return alpha / beta; }
    [[nodiscard]] double variance() const noexcept { return alpha / (beta * beta); }
};

/// Cost statistic E(p) in physical units.
using CostFunction = std::function<double(std::span<const double>)>;

/// E(p) = surrogate(to_canonical(p)). The returned function owns copies of both arguments.
[[nodiscard]] CostFunction surrogate_cost(const ParameterSpace& space, const PCExpansion& surrogate);

/// log pi(p, S) up to an additive constant:
///   (ke/2 + alpha - 1) ln S - S (E(p) + beta) + log_prior(p).
class ScaledPosterior {
public:
    ScaledPosterior(ParameterSpace space, CostFunction cost, double ke = 17.0, HyperPrior hyper = {});

    [[nodiscard]] const ParameterSpace& space() const noexcept { return space_; }
    [[nodiscard]] double ke() const noexcept { return ke_; }
    [[nodiscard]] const HyperPrior& hyper() const noexcept { return hyper_; }

    /// Throws a numerical error naming p when the cost is not finite.
    [[nodiscard]] double cost(std::span<const double> p) const;

    [[nodiscard]] double log_posterior(std::span<const double> p, double scale) const;
    [[nodiscard]] double log_posterior(std::span<const double> p, double cost, double scale) const;

    /// Shape and rate of the Gamma conditional of S given p.
    [[nodiscard]] double conditional_shape() const noexcept { return 0.5 * ke_ + hyper_.alpha; }
    [[nodiscard]] double conditional_rate(double cost) const noexcept { return cost + hyper_.beta; }

private:
    ParameterSpace space_;
    CostFunction cost_;
    double ke_;
    HyperPrior hyper_;
};

/// Exact draw from Gamma(ke/2 + alpha, E(p) + beta). Fails if the rate is not positive.
[[nodiscard]] double draw_scale(const ScaledPosterior& post, double cost, std::mt19937_64& rng);

/// min(1, exp(proposed - current)), with -inf handled as zero probability.
[[nodiscard]] double acceptance_probability(double log_current, double log_proposed) noexcept;

struct McmcConfig {
    double ke = 17.0;
    HyperPrior hyper;
    std::size_t n_iters = 1'000'000;
    std::size_t burn_in = 200'000;
    std::vector<double> proposal_scales;  // canonical units per axis; empty -> 0.1 (5% of the range)
    std::uint64_t seed = 0;
    std::size_t tune_iters = 0;           // discarded adaptive pre-run targeting acceptance 0.2-0.4
    std::optional<double> fixed_scale;    // hold S fixed and skip its Gibbs update
    std::vector<double> initial;          // physical start point; empty -> nominal
};

struct Chain {
    std::vector<std::string> names;
    RowMatrix p;       // n_iters x m, physical units
    Vector scale;      // S
    Vector log_post;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::vector<double> proposal_scales;  // after tuning

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(p.rows()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(p.cols()); }
};

/// Metropolis-within-Gibbs: one Gaussian random-walk step on p (canonical
/// coordinates) given S, then an exact Gamma draw of S given p.
[[nodiscard]] Chain run_mcmc(const ScaledPosterior& posterior, const McmcConfig& config);

/// Cumulative means of p_1..p_m and S over rows [from, n), one row per iteration.
[[nodiscard]] RowMatrix running_mean(const Chain& chain, std::size_t from = 0);

/// Column `coord` (0..m-1 for p, m for S) of rows [from, n).
[[nodiscard]] std::vector<double> chain_column(const Chain& chain, std::size_t coord, std::size_t from);

}  // namespace pcecal
