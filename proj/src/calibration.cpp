#include "pcecal/calibration.hpp"

#include "pcecal/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pcecal {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

std::string format_point(std::span<const double> p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

}  // namespace

CostFunction surrogate_cost(const ParameterSpace& space, const PCExpansion& surrogate) {
    require(space.dim() == surrogate.dim(), ErrorCode::shape,
            "surrogate dimension " + std::to_string(surrogate.dim()) + " does not match parameter space dimension " +
                std::to_string(space.dim()));
    return [space, surrogate](std::span<const double> p) {
        const auto xi = space.to_canonical(p);
        return surrogate.eval(xi);
    };
}

ScaledPosterior::ScaledPosterior(ParameterSpace space, CostFunction cost, double ke, HyperPrior hyper)
    : space_(std::move(space)), cost_(std::move(cost)), ke_(ke), hyper_(hyper) {
    require(static_cast<bool>(cost_), ErrorCode::invalid_argument, "posterior needs a cost function");
    require(ke_ > 0.0 && std::isfinite(ke_), ErrorCode::invalid_argument, "ke must be positive");
    require(hyper_.alpha > 0.0 && hyper_.beta > 0.0, ErrorCode::invalid_argument,
            "Gamma hyper-prior needs alpha > 0 and beta > 0");
}

double ScaledPosterior::cost(std::span<const double> p) const {
    const double e = cost_(p);
    if (!std::isfinite(e)) fail(ErrorCode::numerical, "cost statistic is not finite at p = " + format_point(p));
    return e;
}

double ScaledPosterior::log_posterior(std::span<const double> p, double scale) const {
    if (!(scale > 0.0) || !space_.contains(p)) return neg_inf;
    return log_posterior(p, cost(p), scale);
}

double ScaledPosterior::log_posterior(std::span<const double> p, double cost, double scale) const {
    if (!(scale > 0.0)) return neg_inf;
    const double lp = space_.log_prior(p);
    if (lp == neg_inf) return neg_inf;
    return (0.5 * ke_ + hyper_.alpha - 1.0) * std::log(scale) - scale * (cost + hyper_.beta) + lp;
}

double draw_scale(const ScaledPosterior& post, double cost, std::mt19937_64& rng) {
    const double rate = post.conditional_rate(cost);
    if (!(rate > 0.0))
        fail(ErrorCode::numerical, "degenerate S conditional: E(p) + beta = " + std::to_string(rate) + " <= 0");
    std::gamma_distribution<double> gamma(post.conditional_shape(), 1.0 / rate);
    return gamma(rng);
}

double acceptance_probability(double log_current, double log_proposed) noexcept {
    if (log_proposed == neg_inf) return 0.0;
    if (log_current == neg_inf) return 1.0;
    const double d = log_proposed - log_current;
    return d >= 0.0 ? 1.0 : std::exp(d);
}

namespace {

struct SamplerState {
    std::vector<double> xi;
    std::vector<double> p;
    double cost = 0.0;
    double scale = 0.0;
    double log_post = 0.0;
};

class Sampler {
public:
    Sampler(const ScaledPosterior& post, const McmcConfig& cfg, std::vector<double> scales)
        : post_(post), cfg_(cfg), scales_(std::move(scales)), rng_(cfg.seed) {
        const auto& space = post_.space();
        state_.p = cfg.initial.empty() ? space.nominal() : cfg.initial;
        require(state_.p.size() == space.dim(), ErrorCode::shape, "initial point has wrong dimension");
        require(space.contains(state_.p), ErrorCode::domain, "initial point lies outside the prior box");
        state_.xi = space.to_canonical(state_.p);
        state_.cost = post_.cost(state_.p);
        state_.scale = cfg.fixed_scale ? *cfg.fixed_scale : cfg.hyper.mean();
        require(state_.scale > 0.0, ErrorCode::invalid_argument, "S must be positive");
        state_.log_post = post_.log_posterior(state_.p, state_.cost, state_.scale);
        proposal_xi_.resize(space.dim());
    }

    // One Metropolis step on p given S followed by the Gibbs draw of S; returns acceptance.
    bool step(std::size_t iter) {
        const auto& space = post_.space();
        bool inside = true;
        for (std::size_t i = 0; i < proposal_xi_.size(); ++i) {
            proposal_xi_[i] = state_.xi[i] + scales_[i] * normal_(rng_);
            if (!(proposal_xi_[i] >= -1.0 && proposal_xi_[i] <= 1.0)) inside = false;
        }
        // The uniform draw is consumed on every iteration so the stream layout does not depend on the box.
        const double u = uniform_(rng_);
        bool accepted = false;
        if (inside) {
            auto p_new = space.from_canonical(proposal_xi_);
            double c_new = 0.0;
            try {
                c_new = post_.cost(p_new);
            } catch (const Error& e) {
                fail(e.code(), std::string(e.what()) + " (iteration " + std::to_string(iter) + ")");
            }
            const double lp_new = post_.log_posterior(p_new, c_new, state_.scale);
            if (u < acceptance_probability(state_.log_post, lp_new)) {
                state_.xi = proposal_xi_;
                state_.p = std::move(p_new);
                state_.cost = c_new;
                state_.log_post = lp_new;
                accepted = true;
            }
        }
        if (!cfg_.fixed_scale) {
            state_.scale = draw_scale(post_, state_.cost, rng_);
            state_.log_post = post_.log_posterior(state_.p, state_.cost, state_.scale);
        }
        return accepted;
    }

    [[nodiscard]] const SamplerState& state() const noexcept { return state_; }
    std::vector<double>& scales() noexcept { return scales_; }

private:
    const ScaledPosterior& post_;
    const McmcConfig& cfg_;
    std::vector<double> scales_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    SamplerState state_;
    std::vector<double> proposal_xi_;
};

}  // namespace

Chain run_mcmc(const ScaledPosterior& posterior, const McmcConfig& config) {
    const std::size_t m = posterior.space().dim();
    require(config.n_iters >= 1, ErrorCode::invalid_argument, "MCMC needs at least one iteration");
    require(config.burn_in < config.n_iters, ErrorCode::invalid_argument, "burn-in must be shorter than the chain");
    std::vector<double> scales = config.proposal_scales.empty() ? std::vector<double>(m, 0.1) : config.proposal_scales;
    require(scales.size() == m, ErrorCode::shape, "proposal scale count does not match parameter dimension");
    for (double s : scales) require(s > 0.0 && std::isfinite(s), ErrorCode::invalid_argument, "proposal scales must be positive");
    if (config.fixed_scale)
        require(*config.fixed_scale > 0.0, ErrorCode::invalid_argument, "fixed S must be positive");

    Sampler sampler(posterior, config, scales);

    // Tuning: batches of 100 steps, scaling all axes towards acceptance 0.2-0.4. Discarded.
    constexpr std::size_t batch = 100;
    for (std::size_t done = 0; done < config.tune_iters;) {
        std::size_t acc = 0;
        const std::size_t len = std::min(batch, config.tune_iters - done);
        for (std::size_t t = 0; t < len; ++t) acc += sampler.step(done + t) ? 1 : 0;
        done += len;
        const double rate = static_cast<double>(acc) / static_cast<double>(len);
        const double factor = rate < 0.2 ? 0.8 : (rate > 0.4 ? 1.25 : 1.0);
        for (double& s : sampler.scales()) s = std::min(s * factor, 2.0);
    }

    Chain chain;
    for (const auto& s : posterior.space().params()) chain.names.push_back(s.name);
    chain.seed = config.seed;
    chain.burn_in = config.burn_in;
    chain.proposal_scales = sampler.scales();
    chain.p.resize(static_cast<Eigen::Index>(config.n_iters), static_cast<Eigen::Index>(m));
    chain.scale.resize(static_cast<Eigen::Index>(config.n_iters));
    chain.log_post.resize(static_cast<Eigen::Index>(config.n_iters));
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < config.n_iters; ++it) {
        accepted += sampler.step(it) ? 1 : 0;
        const auto& st = sampler.state();
        const auto row = static_cast<Eigen::Index>(it);
        for (std::size_t i = 0; i < m; ++i) chain.p(row, static_cast<Eigen::Index>(i)) = st.p[i];
        chain.scale[row] = st.scale;
        chain.log_post[row] = st.log_post;
    }
    chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_iters);
    return chain;
}

RowMatrix running_mean(const Chain& chain, std::size_t from) {
    require(chain.size() > 0, ErrorCode::invalid_argument, "running mean of an empty chain");
    require(from < chain.size(), ErrorCode::invalid_argument, "running mean start beyond chain end");
    const std::size_t m = chain.dim();
    RowMatrix out(static_cast<Eigen::Index>(chain.size() - from), static_cast<Eigen::Index>(m + 1));
    std::vector<double> sum(m + 1, 0.0);
    for (std::size_t it = from; it < chain.size(); ++it) {
        const auto r = static_cast<Eigen::Index>(it);
        const auto o = static_cast<Eigen::Index>(it - from);
        const double n = static_cast<double>(it - from + 1);
        for (std::size_t i = 0; i < m; ++i) {
            sum[i] += chain.p(r, static_cast<Eigen::Index>(i));
            out(o, static_cast<Eigen::Index>(i)) = sum[i] / n;
        }
        sum[m] += chain.scale[r];
        out(o, static_cast<Eigen::Index>(m)) = sum[m] / n;
    }
    return out;
}

std::vector<double> chain_column(const Chain& chain, std::size_t coord, std::size_t from) {
    require(coord <= chain.dim(), ErrorCode::invalid_argument, "chain coordinate out of range");
    require(from <= chain.size(), ErrorCode::invalid_argument, "chain start beyond end");
    std::vector<double> out;
    out.reserve(chain.size() - from);
    for (std::size_t it = from; it < chain.size(); ++it) {
        const auto r = static_cast<Eigen::Index>(it);
        out.push_back(coord < chain.dim() ? chain.p(r, static_cast<Eigen::Index>(coord)) : chain.scale[r]);
    }
    return out;
}

}  // namespace pcecal
