#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcecal_cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Parameter {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    std::optional<double> nominal;
};

struct DesignBlock {
    std::optional<int> level;
    std::optional<std::size_t> random;
    std::optional<std::size_t> dim;
    std::uint64_t seed = 0;
};

struct FitBlock {
    std::string method = "bpdn";
    unsigned order = 5;
    std::optional<double> delta;
    std::size_t folds = 4;
    std::vector<double> delta_grid;
    std::size_t max_iters = 5000;
    double opt_tol = 1e-4;
    std::uint64_t seed = 0;
};

struct CalibrationBlock {
    double ke = 17.0;
    double alpha = 18.18;
    double beta = 72.02;
    std::size_t iterations = 1'000'000;
    std::optional<std::size_t> burn_in;  // default: 20% of iterations
    std::vector<double> proposal_scales;
    std::size_t tune_iterations = 0;
    std::optional<double> fixed_scale;
    std::vector<double> initial;
    std::uint64_t seed = 0;
};

struct ModelBlock {
    std::string command;
    std::string input_template;
    std::string input_file = "input.txt";
    std::string output_file = "output.txt";
    std::string output_key;
    std::optional<long> output_column;
    double timeout = 0.0;
    std::optional<double> noise_sigma;  // synthetic models
    std::uint64_t noise_seed = 0;
};

struct PathsBlock {
    std::string work_dir = "runs";
    std::string output_dir;
};

struct Config {
    std::string source;  // file path, empty when no file was given
    std::vector<Parameter> parameters;
    DesignBlock design;
    FitBlock fit;
    CalibrationBlock calibration;
    ModelBlock model;
    PathsBlock paths;
};

/// Strict parser: unknown sections or keys, duplicates and malformed values are
/// reported with their line number.
[[nodiscard]] Config parse_config(const std::string& text, const std::string& source);
[[nodiscard]] Config load_config(const std::string& path);

/// Canonical text form; parsing it yields the same configuration.
[[nodiscard]] std::string render_config(const Config& config);

}  // namespace pcecal_cli
