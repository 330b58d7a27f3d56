#pragma once

#include "pcecal/ensemble.hpp"
#include "pcecal/parameter_space.hpp"
#include "pcecal/surrogate.hpp"
#include "pcecal/types.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcecal {

enum class SyntheticKind { planted_polynomial, smooth_nonpolynomial, noisy_planted, noisy_smooth };

[[nodiscard]] const char* to_string(SyntheticKind k) noexcept;

/// Standard normal deviate that is a pure function of (seed, xi): identical
/// inputs agree bitwise, any change in a coordinate bit decorrelates the draw.
[[nodiscard]] double hash_normal(std::uint64_t seed, std::span<const double> xi) noexcept;

/// Desk-scale stand-in for an expensive simulator with internal noise.
class SyntheticModel {
public:
    /// Ground truth given by a polynomial chaos expansion.
    static SyntheticModel planted(PCExpansion truth, double noise_sigma = 0.0, std::uint64_t seed = 0);

    /// 5D damped exponential of a quadratic with interactions:
    ///   258.3 + 22 xi1 + 8 xi4 - 10 xi5 + 120 exp(-q(xi)), q an off-center quadratic.
    /// Mean ~325, std ~37, range ~209 on [-1,1]^5; spectrum decays by total degree.
    static SyntheticModel smooth(double noise_sigma = 0.0, std::uint64_t seed = 0);

    /// 5% of the smooth model's output range (233.9975 .. 442.6851 over [-1,1]^5).
    static constexpr double smooth_range = 208.6876;
    static constexpr double default_noise_sigma = 0.05 * smooth_range;

    [[nodiscard]] SyntheticKind kind() const noexcept;
    [[nodiscard]] std::size_t dim() const noexcept;
    [[nodiscard]] double noise_sigma() const noexcept { return sigma_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] const std::optional<PCExpansion>& truth() const noexcept { return truth_; }

    [[nodiscard]] double clean(std::span<const double> xi) const;
    [[nodiscard]] double operator()(std::span<const double> xi) const;

private:
    SyntheticModel(std::optional<PCExpansion> truth, double sigma, std::uint64_t seed);

    std::optional<PCExpansion> truth_;
    double sigma_;
    std::uint64_t seed_;
};

[[nodiscard]] Vector evaluate_synthetic(const SyntheticModel& model, const RowMatrix& nodes);

/// Extracts the scalar cost from a node's output file: either the value on the
/// first `key = value` / `key: value` line, or whitespace-separated column
/// `column` (0-based) of the last non-empty line.
struct OutputParser {
    std::string file = "output.txt";
    std::string key;
    std::optional<std::size_t> column;

    [[nodiscard]] std::optional<double> parse(const std::filesystem::path& path) const;
};

struct ExternalModelSpec {
    std::filesystem::path work_dir;
    std::string input_template;  // {name} placeholders; empty -> one "name = value" line per parameter
    std::string input_file = "input.txt";
    std::string command;         // run inside each node directory; empty -> manifest only
    OutputParser output;
    std::chrono::seconds timeout{0};  // 0 -> no limit
};

struct NodeFailure {
    std::size_t node;
    std::string reason;
};

struct RunResult {
    std::optional<DesignEnsemble> ensemble;  // completed rows in design order
    std::vector<std::size_t> completed;
    std::vector<std::size_t> pending;
    std::vector<NodeFailure> failures;
    std::filesystem::path manifest;

    [[nodiscard]] bool complete() const noexcept { return pending.empty(); }
};

[[nodiscard]] std::string node_directory_name(std::size_t node);

/// Renders a node input file: template placeholders {name} become physical values.
[[nodiscard]] std::string render_input(const ExternalModelSpec& spec, const ParameterSpace& space,
                                       std::span<const double> physical);

/// Prepares one directory per design node (input file + manifest line), runs
/// the command for nodes without a completion marker, and harvests outputs.
/// Per-node failures are recorded, not thrown; an empty harvest is an error
/// only when a command was given.
[[nodiscard]] RunResult run_ensemble(const ExternalModelSpec& spec, const Design& design, const ParameterSpace& space);

}  // namespace pcecal
