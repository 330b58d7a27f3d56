#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcecal {

struct ParameterSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    std::optional<double> nominal;
};

/// Box of uniformly distributed physical parameters.
///
/// The canonical map follows xi = (2p - (a + b)) / (a - b), so the lower
/// bound maps to +1 and the upper bound to -1. Every consumer of canonical
/// coordinates (designs, surrogates, the sampler) uses this orientation.
class ParameterSpace {
public:
    explicit ParameterSpace(std::vector<ParameterSpec> params);

    [[nodiscard]] std::size_t dim() const noexcept { return params_.size(); }
    [[nodiscard]] const std::vector<ParameterSpec>& params() const noexcept { return params_; }
    [[nodiscard]] const ParameterSpec& operator[](std::size_t i) const { return params_.at(i); }
    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;

    [[nodiscard]] std::vector<double> to_canonical(std::span<const double> p) const;
    [[nodiscard]] std::vector<double> from_canonical(std::span<const double> xi) const;

    [[nodiscard]] bool contains(std::span<const double> p) const;

    /// Sum of -ln(b_i - a_i) inside the box, -infinity outside.
    [[nodiscard]] double log_prior(std::span<const double> p) const;

    /// Nominal values where given, box centre elsewhere.
    [[nodiscard]] std::vector<double> nominal() const;

private:
    void check_dim(std::size_t n) const;

    std::vector<ParameterSpec> params_;
    double log_volume_ = 0.0;
};

}  // namespace pcecal
