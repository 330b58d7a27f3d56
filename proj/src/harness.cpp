#include "pcecal/harness.hpp"

#include "pcecal/error.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace pcecal {

namespace fs = std::filesystem;

const char* to_string(SyntheticKind k) noexcept {
    switch (k) {
        case SyntheticKind::planted_polynomial: return "planted_polynomial";
        case SyntheticKind::smooth_nonpolynomial: return "smooth_nonpolynomial";
        case SyntheticKind::noisy_planted: return "noisy_planted";
        case SyntheticKind::noisy_smooth: return "noisy_smooth";
    }
    return "unknown";
}

namespace {

std::uint64_t splitmix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double smooth_value(std::span<const double> x) {
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4];
    const double q = 0.315 * (x1 - 0.7) * (x1 - 0.7) + 0.28 * (x2 + 0.5) * (x2 + 0.5) +
                     0.315 * (x3 - 0.4) * (x3 - 0.4) + 0.084 * (x4 - 0.3) * (x4 - 0.3) +
                     0.112 * (x5 + 0.3) * (x5 + 0.3) + 0.21 * x1 * x2 - 0.175 * x1 * x3 + 0.07 * x4 * x5;
    return 258.3 + 22.0 * x1 + 8.0 * x4 - 10.0 * x5 + 120.0 * std::exp(-q);
}

}  // namespace

double hash_normal(std::uint64_t seed, std::span<const double> xi) noexcept {
    std::uint64_t h = splitmix(seed ^ 0x5851f42d4c957f2dULL);
    for (double v : xi) h = splitmix(h ^ std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
    const std::uint64_t h2 = splitmix(h);
    // Box-Muller from two 53-bit uniforms in (0, 1].
    const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticModel::SyntheticModel(std::optional<PCExpansion> truth, double sigma, std::uint64_t seed)
    : truth_(std::move(truth)), sigma_(sigma), seed_(seed) {
    require(sigma_ >= 0.0 && std::isfinite(sigma_), ErrorCode::invalid_argument, "noise sigma must be >= 0");
}

SyntheticModel SyntheticModel::planted(PCExpansion truth, double noise_sigma, std::uint64_t seed) {
    return {std::move(truth), noise_sigma, seed};
}

SyntheticModel SyntheticModel::smooth(double noise_sigma, std::uint64_t seed) {
    return {std::nullopt, noise_sigma, seed};
}

SyntheticKind SyntheticModel::kind() const noexcept {
    if (truth_) return sigma_ > 0.0 ? SyntheticKind::noisy_planted : SyntheticKind::planted_polynomial;
    return sigma_ > 0.0 ? SyntheticKind::noisy_smooth : SyntheticKind::smooth_nonpolynomial;
}

std::size_t SyntheticModel::dim() const noexcept { return truth_ ? truth_->dim() : 5; }

double SyntheticModel::clean(std::span<const double> xi) const {
    require(xi.size() == dim(), ErrorCode::shape,
            "synthetic model expects " + std::to_string(dim()) + " coordinates, got " + std::to_string(xi.size()));
    return truth_ ? truth_->eval(xi) : smooth_value(xi);
}

double SyntheticModel::operator()(std::span<const double> xi) const {
    const double v = clean(xi);
    return sigma_ > 0.0 ? v + sigma_ * hash_normal(seed_, xi) : v;
}

Vector evaluate_synthetic(const SyntheticModel& model, const RowMatrix& nodes) {
    Vector out(nodes.rows());
    for (Eigen::Index q = 0; q < nodes.rows(); ++q)
        out[q] = model(std::span<const double>(nodes.data() + q * nodes.cols(), static_cast<std::size_t>(nodes.cols())));
    return out;
}

std::optional<double> OutputParser::parse(const fs::path& path) const {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line, last;
    auto to_number = [](const std::string& s) -> std::optional<double> {
        std::istringstream is(s);
        double v = 0.0;
        if (!(is >> v) || !std::isfinite(v)) return std::nullopt;
        return v;
    };
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        last = line;
        if (!key.empty()) {
            const auto sep = line.find_first_of("=:");
            if (sep == std::string::npos) continue;
            std::string k = line.substr(0, sep);
            k.erase(0, k.find_first_not_of(" \t"));
            k.erase(k.find_last_not_of(" \t") + 1);
            if (k == key) return to_number(line.substr(sep + 1));
        }
    }
    if (!key.empty()) return std::nullopt;
    std::istringstream is(last);
    std::string tok;
    const std::size_t want = column.value_or(0);
    for (std::size_t c = 0; is >> tok; ++c)
        if (c == want) return to_number(tok);
    return std::nullopt;
}

std::string node_directory_name(std::size_t node) {
    std::ostringstream os;
    os << "node_" << std::setw(6) << std::setfill('0') << node;
    return os.str();
}

std::string render_input(const ExternalModelSpec& spec, const ParameterSpace& space, std::span<const double> physical) {
    auto fmt = [](double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    };
    if (spec.input_template.empty()) {
        std::string out;
        for (std::size_t i = 0; i < space.dim(); ++i) out += space[i].name + " = " + fmt(physical[i]) + "\n";
        return out;
    }
    std::string out = spec.input_template;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const std::string placeholder = "{" + space[i].name + "}";
        for (std::size_t pos; (pos = out.find(placeholder)) != std::string::npos;)
            out.replace(pos, placeholder.size(), fmt(physical[i]));
    }
    return out;
}

namespace {

constexpr const char* done_marker = ".pcecal_done";

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

}  // namespace

RunResult run_ensemble(const ExternalModelSpec& spec, const Design& design, const ParameterSpace& space) {
    require(design.size() >= 1, ErrorCode::invalid_argument, "design is empty");
    require(design.dim() == space.dim(), ErrorCode::shape, "design dimension does not match parameter space");
    std::error_code ec;
    fs::create_directories(spec.work_dir, ec);
    require(!ec, ErrorCode::io, "cannot create work directory " + spec.work_dir.string() + ": " + ec.message());

    RunResult result;
    result.manifest = spec.work_dir / "manifest.tsv";
    std::ofstream manifest(result.manifest);
    require(static_cast<bool>(manifest), ErrorCode::io, "cannot write manifest " + result.manifest.string());
    manifest << "# node\tdirectory\tcommand\n";

    std::vector<Eigen::Index> rows;
    std::vector<double> values;
    std::vector<std::string> tags;
    for (std::size_t q = 0; q < design.size(); ++q) {
        const auto row = static_cast<Eigen::Index>(q);
        const fs::path dir = spec.work_dir / node_directory_name(q);
        fs::create_directories(dir, ec);
        if (ec) {
            result.failures.push_back({q, "cannot create directory: " + ec.message()});
            result.pending.push_back(q);
            continue;
        }
        const std::vector<double> xi(design.nodes.row(row).begin(), design.nodes.row(row).end());
        const auto p = space.from_canonical(xi);
        const std::string input = render_input(spec, space, p);
        const fs::path input_path = dir / spec.input_file;
        {
            // Rewriting identical content keeps reruns idempotent without touching mtimes needlessly.
            std::ifstream old(input_path);
            std::stringstream existing;
            existing << old.rdbuf();
            if (!old || existing.str() != input) std::ofstream(input_path) << input;
        }
        std::string cmd = spec.command;
        if (!cmd.empty() && spec.timeout.count() > 0)
            cmd = "timeout " + std::to_string(spec.timeout.count()) + " sh -c " + shell_quote(cmd);
        manifest << q << '\t' << dir.string() << '\t' << cmd << '\n';

        const fs::path output_path = dir / spec.output.file;
        const bool marked = fs::exists(dir / done_marker);
        std::optional<double> value = marked ? spec.output.parse(output_path) : std::nullopt;
        if (!value && !spec.command.empty()) {
            const std::string full = "cd " + shell_quote(dir.string()) + " && sh -c " + shell_quote(cmd) + " > run.log 2>&1";
            const int status = std::system(full.c_str());
            if (status != 0) {
                result.failures.push_back({q, "command exited with status " + std::to_string(status)});
            } else {
                value = spec.output.parse(output_path);
                if (!value) result.failures.push_back({q, "could not parse output " + output_path.string()});
            }
        } else if (!value) {
            value = spec.output.parse(output_path);
        }
        if (value) {
            std::ofstream(dir / done_marker) << *value << '\n';
            rows.push_back(row);
            values.push_back(*value);
            tags.push_back("run:" + node_directory_name(q));
            result.completed.push_back(q);
        } else {
            result.pending.push_back(q);
        }
    }
    manifest.flush();

    if (rows.empty()) {
        if (!spec.command.empty()) fail(ErrorCode::numerical, "external ensemble harvest is empty: no node produced a value");
        return result;
    }
    RowMatrix nodes = design.nodes(rows, Eigen::all);
    Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    std::optional<Vector> weights;
    if (result.pending.empty()) weights = design.weights;
    result.ensemble.emplace(std::move(nodes), std::move(v), std::move(weights), std::move(tags));
    return result;
}

}  // namespace pcecal
