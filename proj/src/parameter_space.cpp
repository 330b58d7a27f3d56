#include "pcecal/parameter_space.hpp"

#include "pcecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace pcecal {

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
    require(!params_.empty(), ErrorCode::invalid_argument, "parameter space needs at least one parameter");
    std::set<std::string> seen;
    for (const auto& p : params_) {
        require(!p.name.empty(), ErrorCode::invalid_argument, "parameter name must not be empty");
        require(seen.insert(p.name).second, ErrorCode::invalid_argument, "duplicate parameter name '" + p.name + "'");
        require(std::isfinite(p.lower) && std::isfinite(p.upper), ErrorCode::domain,
                "parameter '" + p.name + "' has non-finite bounds");
        require(p.lower < p.upper, ErrorCode::domain,
                "parameter '" + p.name + "' needs lower < upper");
        if (p.nominal) {
            require(*p.nominal >= p.lower && *p.nominal <= p.upper, ErrorCode::domain,
                    "default of parameter '" + p.name + "' lies outside its bounds");
        }
        log_volume_ += std::log(p.upper - p.lower);
    }
}

std::optional<std::size_t> ParameterSpace::find(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return i;
    return std::nullopt;
}

void ParameterSpace::check_dim(std::size_t n) const {
    require(n == params_.size(), ErrorCode::shape,
            "expected " + std::to_string(params_.size()) + " components, got " + std::to_string(n));
}

std::vector<double> ParameterSpace::to_canonical(std::span<const double> p) const {
    check_dim(p.size());
    std::vector<double> xi(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& s = params_[i];
        if (!(p[i] >= s.lower && p[i] <= s.upper))
            fail(ErrorCode::domain, "parameter '" + s.name + "' = " + std::to_string(p[i]) + " outside [" +
                                        std::to_string(s.lower) + ", " + std::to_string(s.upper) + "]");
        xi[i] = std::clamp((2.0 * p[i] - (s.lower + s.upper)) / (s.lower - s.upper), -1.0, 1.0);
    }
    return xi;
}

std::vector<double> ParameterSpace::from_canonical(std::span<const double> xi) const {
    check_dim(xi.size());
    std::vector<double> p(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const auto& s = params_[i];
        if (!(xi[i] >= -1.0 && xi[i] <= 1.0))
            fail(ErrorCode::domain, "canonical coordinate " + std::to_string(i) + " (" + s.name + ") = " +
                                        std::to_string(xi[i]) + " outside [-1, 1]");
        p[i] = std::clamp(0.5 * ((s.lower + s.upper) + xi[i] * (s.lower - s.upper)), s.lower, s.upper);
    }
    return p;
}

bool ParameterSpace::contains(std::span<const double> p) const {
    check_dim(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= params_[i].lower && p[i] <= params_[i].upper)) return false;
    return true;
}

double ParameterSpace::log_prior(std::span<const double> p) const {
    if (!contains(p)) return -std::numeric_limits<double>::infinity();
    return -log_volume_;
}

std::vector<double> ParameterSpace::nominal() const {
    std::vector<double> out;
    out.reserve(params_.size());
    for (const auto& s : params_) out.push_back(s.nominal.value_or(0.5 * (s.lower + s.upper)));
    return out;
}

}  // namespace pcecal
