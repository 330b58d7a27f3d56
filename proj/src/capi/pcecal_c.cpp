#include "pcecal/pcecal.h"

#include "pcecal/bpdn.hpp"
#include "pcecal/calibration.hpp"
#include "pcecal/error.hpp"
#include "pcecal/harness.hpp"
#include "pcecal/io.hpp"
#include "pcecal/kde.hpp"
#include "pcecal/nisp.hpp"
#include "pcecal/parameter_space.hpp"
#include "pcecal/sparse_grid.hpp"
#include "pcecal/surrogate.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <string>

struct pcecal_space {
    pcecal::ParameterSpace value;
};
struct pcecal_design {
    pcecal::Design value;
};
struct pcecal_ensemble {
    pcecal::DesignEnsemble value;
};
struct pcecal_expansion {
    pcecal::PCExpansion value;
};
struct pcecal_bpdn_report {
    pcecal::BpdnReport value;
};
struct pcecal_density {
    pcecal::Density value;
};
struct pcecal_chain {
    pcecal::Chain value;
};

namespace {

thread_local std::string last_error;

pcecal_status to_status(pcecal::ErrorCode code) {
    using pcecal::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_argument: return PCECAL_E_INVALID_ARGUMENT;
        case ErrorCode::domain: return PCECAL_E_DOMAIN;
        case ErrorCode::shape: return PCECAL_E_SHAPE;
        case ErrorCode::precondition: return PCECAL_E_PRECONDITION;
        case ErrorCode::numerical: return PCECAL_E_NUMERICAL;
        case ErrorCode::capacity: return PCECAL_E_CAPACITY;
        case ErrorCode::io: return PCECAL_E_IO;
        case ErrorCode::parse: return PCECAL_E_PARSE;
        case ErrorCode::partial: return PCECAL_E_PARTIAL;
    }
    return PCECAL_E_INTERNAL;
}

template <class F>
pcecal_status guard(F&& f) {
    try {
        f();
        last_error.clear();
        return PCECAL_OK;
    } catch (const pcecal::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PCECAL_E_CAPACITY;
    } catch (const std::exception& e) {
        last_error = e.what();
        return PCECAL_E_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return PCECAL_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (p == nullptr) pcecal::fail(pcecal::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

template <class T>
void copy_out(const T& src, double* dst) {
    for (Eigen::Index i = 0; i < src.size(); ++i) dst[i] = src.data()[i];
}

std::span<const double> row_span(const pcecal::RowMatrix& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

extern "C" {

const char* pcecal_version(void) { return "0.1.0"; }

const char* pcecal_last_error(void) { return last_error.c_str(); }

const char* pcecal_status_name(pcecal_status status) {
    switch (status) {
        case PCECAL_OK: return "ok";
        case PCECAL_E_INVALID_ARGUMENT: return "invalid argument";
        case PCECAL_E_DOMAIN: return "domain error";
        case PCECAL_E_SHAPE: return "shape mismatch";
        case PCECAL_E_PRECONDITION: return "precondition violated";
        case PCECAL_E_NUMERICAL: return "numerical failure";
        case PCECAL_E_CAPACITY: return "capacity exceeded";
        case PCECAL_E_IO: return "i/o error";
        case PCECAL_E_PARSE: return "parse error";
        case PCECAL_E_PARTIAL: return "partial result";
        case PCECAL_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

/* ---- parameter space ---- */

pcecal_status pcecal_space_create(size_t dim, const char* const* names, const double* lower, const double* upper,
                                  const double* nominal, pcecal_space** out) {
    return guard([&] {
        need(names, "names");
        need(lower, "lower");
        need(upper, "upper");
        need(out, "out");
        std::vector<pcecal::ParameterSpec> specs;
        for (size_t i = 0; i < dim; ++i) {
            need(names[i], "parameter name");
            pcecal::ParameterSpec s{names[i], lower[i], upper[i], std::nullopt};
            if (nominal && !std::isnan(nominal[i])) s.nominal = nominal[i];
            specs.push_back(std::move(s));
        }
        *out = new pcecal_space{pcecal::ParameterSpace(std::move(specs))};
    });
}

void pcecal_space_free(pcecal_space* space) { delete space; }

size_t pcecal_space_dim(const pcecal_space* space) { return space ? space->value.dim() : 0; }

const char* pcecal_space_name(const pcecal_space* space, size_t i) {
    if (!space || i >= space->value.dim()) return nullptr;
    return space->value[i].name.c_str();
}

pcecal_status pcecal_space_bounds(const pcecal_space* space, size_t i, double* lower, double* upper) {
    return guard([&] {
        need(space, "space");
        pcecal::require(i < space->value.dim(), pcecal::ErrorCode::invalid_argument, "parameter index out of range");
        if (lower) *lower = space->value[i].lower;
        if (upper) *upper = space->value[i].upper;
    });
}

pcecal_status pcecal_space_nominal(const pcecal_space* space, double* p) {
    return guard([&] {
        need(space, "space");
        need(p, "p");
        const auto v = space->value.nominal();
        std::copy(v.begin(), v.end(), p);
    });
}

pcecal_status pcecal_space_to_canonical(const pcecal_space* space, const double* p, double* xi) {
    return guard([&] {
        need(space, "space");
        need(p, "p");
        need(xi, "xi");
        const auto v = space->value.to_canonical({p, space->value.dim()});
        std::copy(v.begin(), v.end(), xi);
    });
}

pcecal_status pcecal_space_from_canonical(const pcecal_space* space, const double* xi, double* p) {
    return guard([&] {
        need(space, "space");
        need(xi, "xi");
        need(p, "p");
        const auto v = space->value.from_canonical({xi, space->value.dim()});
        std::copy(v.begin(), v.end(), p);
    });
}

double pcecal_space_log_prior(const pcecal_space* space, const double* p) {
    if (!space || !p) return -std::numeric_limits<double>::infinity();
    return space->value.log_prior({p, space->value.dim()});
}

/* ---- basis ---- */

pcecal_status pcecal_basis_size(size_t dim, unsigned order, size_t* size) {
    return guard([&] {
        need(size, "size");
        *size = pcecal::total_degree_count(dim, order);
    });
}

pcecal_status pcecal_basis_index(size_t dim, unsigned order, size_t k, unsigned* alpha) {
    return guard([&] {
        need(alpha, "alpha");
        const pcecal::PCBasis basis(dim, order);
        pcecal::require(k < basis.size(), pcecal::ErrorCode::invalid_argument, "term index out of range");
        const auto a = basis.index(k);
        std::copy(a.begin(), a.end(), alpha);
    });
}

/* ---- designs ---- */

pcecal_status pcecal_design_smolyak(size_t dim, int level, pcecal_design** out) {
    return guard([&] {
        need(out, "out");
        pcecal::require(level >= 0, pcecal::ErrorCode::invalid_argument, "Smolyak level must be nonnegative");
        *out = new pcecal_design{pcecal::smolyak_design(pcecal::build_smolyak(dim, static_cast<unsigned>(level)))};
    });
}

pcecal_status pcecal_design_random(size_t dim, size_t n, uint64_t seed, pcecal_design** out) {
    return guard([&] {
        need(out, "out");
        *out = new pcecal_design{pcecal::random_design(dim, n, seed)};
    });
}

pcecal_status pcecal_design_from_nodes(size_t n, size_t dim, const double* nodes, const double* weights,
                                       pcecal_design** out) {
    return guard([&] {
        need(nodes, "nodes");
        need(out, "out");
        pcecal::require(n >= 1 && dim >= 1, pcecal::ErrorCode::shape, "design needs at least one row and column");
        pcecal::Design d;
        d.nodes = Eigen::Map<const pcecal::RowMatrix>(nodes, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
        if (weights) d.weights = Eigen::Map<const pcecal::Vector>(weights, static_cast<Eigen::Index>(n));
        *out = new pcecal_design{std::move(d)};
    });
}

pcecal_status pcecal_design_subset(const pcecal_design* design, int lower_level, pcecal_design** out) {
    return guard([&] {
        need(design, "design");
        need(out, "out");
        const auto& d = design->value;
        pcecal::require(d.kind == "smolyak" && d.level >= 0 && d.weights, pcecal::ErrorCode::precondition,
                        "subset needs a Smolyak design");
        pcecal::require(lower_level >= 0, pcecal::ErrorCode::invalid_argument, "subset level must be nonnegative");
        const pcecal::SparseGrid grid(d.dim(), static_cast<unsigned>(d.level), d.nodes, *d.weights);
        *out = new pcecal_design{pcecal::smolyak_design(pcecal::subset_levels(grid, static_cast<unsigned>(lower_level)))};
    });
}

pcecal_status pcecal_design_read(const char* path, pcecal_design** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new pcecal_design{pcecal::io::load_design(path)};
    });
}

pcecal_status pcecal_design_write(const pcecal_design* design, const char* path) {
    return guard([&] {
        need(design, "design");
        need(path, "path");
        pcecal::io::save(path, design->value);
    });
}

void pcecal_design_free(pcecal_design* design) { delete design; }
size_t pcecal_design_size(const pcecal_design* design) { return design ? design->value.size() : 0; }
size_t pcecal_design_dim(const pcecal_design* design) { return design ? design->value.dim() : 0; }
int pcecal_design_level(const pcecal_design* design) {
    return design && design->value.kind == "smolyak" ? design->value.level : -1;
}
int pcecal_design_has_weights(const pcecal_design* design) { return design && design->value.weights ? 1 : 0; }

pcecal_status pcecal_design_nodes(const pcecal_design* design, double* nodes) {
    return guard([&] {
        need(design, "design");
        need(nodes, "nodes");
        copy_out(design->value.nodes, nodes);
    });
}

pcecal_status pcecal_design_weights(const pcecal_design* design, double* weights) {
    return guard([&] {
        need(design, "design");
        need(weights, "weights");
        pcecal::require(design->value.weights.has_value(), pcecal::ErrorCode::precondition, "design carries no weights");
        copy_out(*design->value.weights, weights);
    });
}

/* ---- ensembles ---- */

pcecal_status pcecal_ensemble_create(const pcecal_design* design, const double* values, pcecal_ensemble** out) {
    return guard([&] {
        need(design, "design");
        need(values, "values");
        need(out, "out");
        pcecal::Vector v = Eigen::Map<const pcecal::Vector>(values, static_cast<Eigen::Index>(design->value.size()));
        *out = new pcecal_ensemble{pcecal::DesignEnsemble(design->value, std::move(v))};
    });
}

pcecal_status pcecal_ensemble_read(const char* path, pcecal_ensemble** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new pcecal_ensemble{pcecal::io::load_ensemble(path)};
    });
}

pcecal_status pcecal_ensemble_write(const pcecal_ensemble* ensemble, const char* path) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(path, "path");
        pcecal::io::save(path, ensemble->value);
    });
}

pcecal_status pcecal_ensemble_restrict(const pcecal_ensemble* ensemble, const pcecal_design* design,
                                       pcecal_ensemble** out) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(design, "design");
        need(out, "out");
        *out = new pcecal_ensemble{ensemble->value.restrict_to(design->value.nodes, design->value.weights)};
    });
}

void pcecal_ensemble_free(pcecal_ensemble* ensemble) { delete ensemble; }
size_t pcecal_ensemble_size(const pcecal_ensemble* ensemble) { return ensemble ? ensemble->value.size() : 0; }
size_t pcecal_ensemble_dim(const pcecal_ensemble* ensemble) { return ensemble ? ensemble->value.dim() : 0; }
int pcecal_ensemble_has_weights(const pcecal_ensemble* ensemble) {
    return ensemble && ensemble->value.weights() ? 1 : 0;
}

pcecal_status pcecal_ensemble_nodes(const pcecal_ensemble* ensemble, double* nodes) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(nodes, "nodes");
        copy_out(ensemble->value.nodes(), nodes);
    });
}

pcecal_status pcecal_ensemble_values(const pcecal_ensemble* ensemble, double* values) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(values, "values");
        copy_out(ensemble->value.values(), values);
    });
}

/* ---- forward models ---- */

double pcecal_smooth_model_range(void) { return pcecal::SyntheticModel::smooth_range; }
double pcecal_smooth_model_default_sigma(void) { return pcecal::SyntheticModel::default_noise_sigma; }

pcecal_status pcecal_evaluate_smooth(const pcecal_design* design, double noise_sigma, uint64_t seed, double* values) {
    return guard([&] {
        need(design, "design");
        need(values, "values");
        const auto model = pcecal::SyntheticModel::smooth(noise_sigma, seed);
        copy_out(pcecal::evaluate_synthetic(model, design->value.nodes), values);
    });
}

pcecal_status pcecal_evaluate_planted(const pcecal_design* design, const pcecal_expansion* truth, double noise_sigma,
                                      uint64_t seed, double* values) {
    return guard([&] {
        need(design, "design");
        need(truth, "truth");
        need(values, "values");
        const auto model = pcecal::SyntheticModel::planted(truth->value, noise_sigma, seed);
        copy_out(pcecal::evaluate_synthetic(model, design->value.nodes), values);
    });
}

void pcecal_external_spec_default(pcecal_external_spec* spec) {
    if (!spec) return;
    *spec = pcecal_external_spec{};
    spec->output_column = -1;
}

pcecal_status pcecal_run_ensemble(const pcecal_external_spec* spec, const pcecal_design* design,
                                  const pcecal_space* space, pcecal_ensemble** out, pcecal_run_summary* summary) {
    bool partial = false;
    const pcecal_status st = guard([&] {
        need(spec, "spec");
        need(design, "design");
        need(space, "space");
        need(out, "out");
        need(spec->work_dir, "work_dir");
        pcecal::ExternalModelSpec s;
        s.work_dir = spec->work_dir;
        if (spec->input_template) s.input_template = spec->input_template;
        if (spec->input_file && *spec->input_file) s.input_file = spec->input_file;
        if (spec->command) s.command = spec->command;
        if (spec->output_file && *spec->output_file) s.output.file = spec->output_file;
        if (spec->output_key) s.output.key = spec->output_key;
        if (spec->output_column >= 0) s.output.column = static_cast<std::size_t>(spec->output_column);
        if (spec->timeout_seconds > 0)
            s.timeout = std::chrono::seconds(static_cast<long long>(std::ceil(spec->timeout_seconds)));
        auto result = pcecal::run_ensemble(s, design->value, space->value);
        if (summary) *summary = {result.completed.size(), result.pending.size(), result.failures.size()};
        *out = result.ensemble ? new pcecal_ensemble{std::move(*result.ensemble)} : nullptr;
        if (!result.complete()) {
            partial = true;
            std::string msg = std::to_string(result.pending.size()) + " of " + std::to_string(design->value.size()) +
                              " nodes pending; manifest at " + result.manifest.string();
            for (const auto& f : result.failures) msg += "\n  node " + std::to_string(f.node) + ": " + f.reason;
            last_error = msg;
        }
    });
    if (st == PCECAL_OK && partial) return PCECAL_E_PARTIAL;
    return st;
}

/* ---- fitting ---- */

pcecal_status pcecal_fit_nisp(const pcecal_ensemble* ensemble, unsigned order, pcecal_expansion** out) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(out, "out");
        pcecal::PCBasis basis(ensemble->value.dim(), order);
        auto c = pcecal::nisp_coefficients(basis, ensemble->value);
        *out = new pcecal_expansion{pcecal::PCExpansion(std::move(basis), std::move(c), pcecal::FitMethod::nisp,
                                                        {{"rows", std::to_string(ensemble->value.size())}})};
    });
}

void pcecal_bpdn_options_default(pcecal_bpdn_options* options) {
    if (!options) return;
    const pcecal::BpdnConfig cfg;
    *options = pcecal_bpdn_options{};
    options->cv_folds = cfg.cv_folds;
    options->max_iters = cfg.solver.max_iters;
    options->opt_tol = cfg.solver.opt_tol;
    options->seed = cfg.seed;
    options->threads = cfg.threads;
}

namespace {

const char* exit_name(pcecal::BpdnExit e) {
    switch (e) {
        case pcecal::BpdnExit::root_found: return "root_found";
        case pcecal::BpdnExit::zero_solution: return "zero_solution";
        case pcecal::BpdnExit::least_squares: return "least_squares";
        case pcecal::BpdnExit::max_iters: return "max_iters";
    }
    return "unknown";
}

}  // namespace

pcecal_status pcecal_fit_bpdn(const pcecal_ensemble* ensemble, unsigned order, const pcecal_bpdn_options* options,
                              pcecal_expansion** out, pcecal_bpdn_report** report) {
    return guard([&] {
        need(ensemble, "ensemble");
        need(out, "out");
        pcecal_bpdn_options o;
        pcecal_bpdn_options_default(&o);
        if (options) o = *options;
        pcecal::BpdnConfig cfg;
        if (o.has_delta) cfg.delta = o.delta;
        cfg.cv_folds = o.cv_folds;
        if (o.delta_grid && o.n_delta_grid > 0) cfg.delta_grid.assign(o.delta_grid, o.delta_grid + o.n_delta_grid);
        cfg.solver.max_iters = o.max_iters;
        cfg.solver.opt_tol = o.opt_tol;
        cfg.seed = o.seed;
        cfg.threads = o.threads;
        pcecal::PCBasis basis(ensemble->value.dim(), order);
        auto rep = pcecal::fit_bpdn(basis, ensemble->value, cfg);
        pcecal::Metadata md{{"rows", std::to_string(ensemble->value.size())},
                            {"delta", pcecal::io::format_real(rep.chosen_delta)},
                            {"cross_validated", rep.cross_validated ? "yes" : "no"},
                            {"residual_norm", pcecal::io::format_real(rep.residual_norm)},
                            {"l1_norm", pcecal::io::format_real(rep.l1_norm)},
                            {"iterations", std::to_string(rep.iterations)},
                            {"converged", rep.converged ? "yes" : "no"},
                            {"exit", exit_name(rep.exit)}};
        if (rep.cross_validated) {
            md.emplace_back("cv_folds", std::to_string(cfg.cv_folds));
            md.emplace_back("cv_seed", std::to_string(cfg.seed));
        }
        auto* e = new pcecal_expansion{pcecal::PCExpansion(std::move(basis), rep.coefficients, pcecal::FitMethod::bpdn, std::move(md))};
        if (report) {
            try {
                *report = new pcecal_bpdn_report{std::move(rep)};
            } catch (...) {
                delete e;
                throw;
            }
        }
        *out = e;
    });
}

void pcecal_bpdn_report_free(pcecal_bpdn_report* report) { delete report; }

void pcecal_bpdn_report_summary(const pcecal_bpdn_report* report, pcecal_bpdn_summary* summary) {
    if (!report || !summary) return;
    const auto& r = report->value;
    *summary = {r.chosen_delta, r.residual_norm, r.l1_norm, r.iterations, r.converged ? 1 : 0,
                r.cross_validated ? 1 : 0, exit_name(r.exit)};
}

size_t pcecal_bpdn_report_cv_folds(const pcecal_bpdn_report* report) {
    return report ? static_cast<size_t>(report->value.cv_errors.rows()) : 0;
}

size_t pcecal_bpdn_report_cv_grid_size(const pcecal_bpdn_report* report) {
    return report ? report->value.cv_grid.size() : 0;
}

pcecal_status pcecal_bpdn_report_cv(const pcecal_bpdn_report* report, double* grid, double* mean_errors,
                                    double* errors) {
    return guard([&] {
        need(report, "report");
        const auto& r = report->value;
        if (grid) std::copy(r.cv_grid.begin(), r.cv_grid.end(), grid);
        if (mean_errors) std::copy(r.cv_mean_errors.begin(), r.cv_mean_errors.end(), mean_errors);
        if (errors)
            for (Eigen::Index f = 0; f < r.cv_errors.rows(); ++f)
                for (Eigen::Index j = 0; j < r.cv_errors.cols(); ++j) *errors++ = r.cv_errors(f, j);
    });
}

pcecal_status pcecal_bpdn_report_write_cv(const pcecal_bpdn_report* report, const char* path) {
    return guard([&] {
        need(report, "report");
        need(path, "path");
        pcecal::require(report->value.cross_validated, pcecal::ErrorCode::precondition, "fit was not cross-validated");
        std::ofstream os(path);
        pcecal::require(static_cast<bool>(os), pcecal::ErrorCode::io, std::string("cannot open ") + path);
        pcecal::io::write_cv_table(os, report->value);
    });
}

/* ---- surrogate ---- */

pcecal_status pcecal_expansion_create(size_t dim, unsigned order, const double* coefficients, pcecal_fit_method method,
                                      pcecal_expansion** out) {
    return guard([&] {
        need(coefficients, "coefficients");
        need(out, "out");
        pcecal::PCBasis basis(dim, order);
        pcecal::Vector c = Eigen::Map<const pcecal::Vector>(coefficients, static_cast<Eigen::Index>(basis.size()));
        *out = new pcecal_expansion{pcecal::PCExpansion(
            std::move(basis), std::move(c), method == PCECAL_FIT_BPDN ? pcecal::FitMethod::bpdn : pcecal::FitMethod::nisp)};
    });
}

pcecal_status pcecal_expansion_read(const char* path, pcecal_expansion** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new pcecal_expansion{pcecal::io::load_expansion(path)};
    });
}

pcecal_status pcecal_expansion_write(const pcecal_expansion* expansion, const char* path) {
    return guard([&] {
        need(expansion, "expansion");
        need(path, "path");
        pcecal::io::save(path, expansion->value);
    });
}

void pcecal_expansion_free(pcecal_expansion* expansion) { delete expansion; }
size_t pcecal_expansion_dim(const pcecal_expansion* e) { return e ? e->value.dim() : 0; }
unsigned pcecal_expansion_order(const pcecal_expansion* e) { return e ? e->value.basis().order() : 0; }
size_t pcecal_expansion_size(const pcecal_expansion* e) { return e ? e->value.basis().size() : 0; }
pcecal_fit_method pcecal_expansion_method(const pcecal_expansion* e) {
    return e && e->value.method() == pcecal::FitMethod::bpdn ? PCECAL_FIT_BPDN : PCECAL_FIT_NISP;
}

pcecal_status pcecal_expansion_coefficients(const pcecal_expansion* e, double* coefficients) {
    return guard([&] {
        need(e, "expansion");
        need(coefficients, "coefficients");
        copy_out(e->value.coefficients(), coefficients);
    });
}

pcecal_status pcecal_expansion_add_metadata(pcecal_expansion* e, const char* key, const char* value) {
    return guard([&] {
        need(e, "expansion");
        need(key, "key");
        need(value, "value");
        const std::string k = key;
        pcecal::require(!k.empty() && k.find_first_of(" \t\n=") == std::string::npos, pcecal::ErrorCode::invalid_argument,
                        "metadata key must be a nonempty word without '='");
        pcecal::require(std::strchr(value, '\n') == nullptr, pcecal::ErrorCode::invalid_argument,
                        "metadata value must be a single line");
        auto md = e->value.metadata();
        md.emplace_back(k, value);
        e->value = pcecal::PCExpansion(e->value.basis(), e->value.coefficients(), e->value.method(), std::move(md));
    });
}

size_t pcecal_expansion_metadata_count(const pcecal_expansion* e) { return e ? e->value.metadata().size() : 0; }

pcecal_status pcecal_expansion_metadata(const pcecal_expansion* e, size_t i, const char** key, const char** value) {
    return guard([&] {
        need(e, "expansion");
        pcecal::require(i < e->value.metadata().size(), pcecal::ErrorCode::invalid_argument, "metadata index out of range");
        if (key) *key = e->value.metadata()[i].first.c_str();
        if (value) *value = e->value.metadata()[i].second.c_str();
    });
}

pcecal_status pcecal_expansion_eval(const pcecal_expansion* e, const double* xi, double* value) {
    return guard([&] {
        need(e, "expansion");
        need(xi, "xi");
        need(value, "value");
        *value = e->value.eval({xi, e->value.dim()});
    });
}

pcecal_status pcecal_expansion_predict(const pcecal_expansion* e, const pcecal_design* design, double* values) {
    return guard([&] {
        need(e, "expansion");
        need(design, "design");
        need(values, "values");
        copy_out(e->value.predict(design->value.nodes), values);
    });
}

double pcecal_expansion_mean(const pcecal_expansion* e) {
    return e ? e->value.mean() : std::numeric_limits<double>::quiet_NaN();
}

double pcecal_expansion_variance(const pcecal_expansion* e) {
    return e ? e->value.variance() : std::numeric_limits<double>::quiet_NaN();
}

pcecal_status pcecal_expansion_total_sensitivity(const pcecal_expansion* e, double* indices) {
    return guard([&] {
        need(e, "expansion");
        need(indices, "indices");
        const auto t = e->value.total_sensitivity();
        std::copy(t.begin(), t.end(), indices);
    });
}

pcecal_status pcecal_expansion_nre(const pcecal_expansion* e, const pcecal_ensemble* ensemble, double* nre) {
    return guard([&] {
        need(e, "expansion");
        need(ensemble, "ensemble");
        need(nre, "nre");
        *nre = pcecal::nre(e->value, ensemble->value);
    });
}

pcecal_status pcecal_expansion_spectrum(const pcecal_expansion* e, double* ratios, unsigned* degrees) {
    return guard([&] {
        need(e, "expansion");
        const auto s = pcecal::spectrum(e->value.basis(), e->value.coefficients());
        for (size_t k = 0; k < s.size(); ++k) {
            if (ratios) ratios[k] = s[k].ratio;
            if (degrees) degrees[k] = s[k].degree;
        }
    });
}

pcecal_status pcecal_expansion_band_means(const pcecal_expansion* e, double* means) {
    return guard([&] {
        need(e, "expansion");
        need(means, "means");
        const auto b = pcecal::band_means(e->value.basis(), e->value.coefficients());
        std::copy(b.begin(), b.end(), means);
    });
}

pcecal_status pcecal_expansion_write_spectrum(const pcecal_expansion* e, const char* path) {
    return guard([&] {
        need(e, "expansion");
        need(path, "path");
        std::ofstream os(path);
        pcecal::require(static_cast<bool>(os), pcecal::ErrorCode::io, std::string("cannot open ") + path);
        pcecal::io::write_spectrum(os, pcecal::spectrum(e->value.basis(), e->value.coefficients()));
    });
}

pcecal_status pcecal_expansion_response_slice(const pcecal_expansion* e, size_t axis, const double* fixed,
                                              size_t points, double* x, double* y) {
    return guard([&] {
        need(e, "expansion");
        need(x, "x");
        need(y, "y");
        std::span<const double> f;
        if (fixed) f = {fixed, e->value.dim()};
        const auto c = pcecal::response_slice(e->value, axis, f, points);
        std::copy(c.x.begin(), c.x.end(), x);
        std::copy(c.y.begin(), c.y.end(), y);
    });
}

pcecal_status pcecal_expansion_response_surface(const pcecal_expansion* e, size_t axis_i, size_t axis_j,
                                                const double* fixed, size_t points, double* x, double* y, double* z) {
    return guard([&] {
        need(e, "expansion");
        need(x, "x");
        need(y, "y");
        need(z, "z");
        std::span<const double> f;
        if (fixed) f = {fixed, e->value.dim()};
        const auto s = pcecal::response_surface(e->value, axis_i, axis_j, f, points);
        std::copy(s.x.begin(), s.x.end(), x);
        std::copy(s.y.begin(), s.y.end(), y);
        copy_out(s.z, z);
    });
}

/* ---- densities ---- */

pcecal_status pcecal_kde(const double* samples, size_t n, size_t n_grid, double bandwidth, pcecal_density** out) {
    return guard([&] {
        need(samples, "samples");
        need(out, "out");
        std::optional<double> h;
        if (bandwidth > 0) h = bandwidth;
        *out = new pcecal_density{pcecal::kde({samples, n}, n_grid, h)};
    });
}

pcecal_status pcecal_expansion_sample_pdf(const pcecal_expansion* e, size_t n_samples, uint64_t seed, size_t n_grid,
                                          pcecal_density** out) {
    return guard([&] {
        need(e, "expansion");
        need(out, "out");
        *out = new pcecal_density{pcecal::sample_pdf(e->value, n_samples, seed, n_grid)};
    });
}

void pcecal_density_free(pcecal_density* d) { delete d; }
size_t pcecal_density_size(const pcecal_density* d) { return d ? d->value.grid.size() : 0; }
double pcecal_density_bandwidth(const pcecal_density* d) {
    return d ? d->value.bandwidth : std::numeric_limits<double>::quiet_NaN();
}
double pcecal_density_integral(const pcecal_density* d) {
    return d ? pcecal::trapezoid(d->value) : std::numeric_limits<double>::quiet_NaN();
}

pcecal_status pcecal_density_values(const pcecal_density* d, double* grid, double* values) {
    return guard([&] {
        need(d, "density");
        if (grid) std::copy(d->value.grid.begin(), d->value.grid.end(), grid);
        if (values) std::copy(d->value.density.begin(), d->value.density.end(), values);
    });
}

pcecal_status pcecal_density_write(const pcecal_density* d, const char* label, const char* path) {
    return guard([&] {
        need(d, "density");
        need(path, "path");
        std::ofstream os(path);
        pcecal::require(static_cast<bool>(os), pcecal::ErrorCode::io, std::string("cannot open ") + path);
        pcecal::io::write_density(os, d->value, label ? label : "");
    });
}

/* ---- calibration ---- */

void pcecal_mcmc_options_default(pcecal_mcmc_options* options) {
    if (!options) return;
    const pcecal::McmcConfig cfg;
    *options = pcecal_mcmc_options{};
    options->ke = cfg.ke;
    options->alpha = cfg.hyper.alpha;
    options->beta = cfg.hyper.beta;
    options->n_iters = cfg.n_iters;
    options->burn_in = cfg.burn_in;
    options->seed = cfg.seed;
    options->tune_iters = cfg.tune_iters;
}

namespace {

pcecal::McmcConfig to_config(const pcecal_mcmc_options* options, std::size_t dim) {
    pcecal_mcmc_options o;
    pcecal_mcmc_options_default(&o);
    if (options) o = *options;
    pcecal::McmcConfig cfg;
    cfg.ke = o.ke;
    cfg.hyper = {o.alpha, o.beta};
    cfg.n_iters = o.n_iters;
    cfg.burn_in = o.burn_in;
    if (o.proposal_scales) cfg.proposal_scales.assign(o.proposal_scales, o.proposal_scales + dim);
    cfg.seed = o.seed;
    cfg.tune_iters = o.tune_iters;
    if (o.has_fixed_scale) cfg.fixed_scale = o.fixed_scale;
    if (o.initial) cfg.initial.assign(o.initial, o.initial + dim);
    return cfg;
}

}  // namespace

pcecal_status pcecal_mcmc_run(const pcecal_space* space, const pcecal_expansion* surrogate,
                              const pcecal_mcmc_options* options, pcecal_chain** out) {
    return guard([&] {
        need(space, "space");
        need(surrogate, "surrogate");
        need(out, "out");
        const auto cfg = to_config(options, space->value.dim());
        const pcecal::ScaledPosterior post(space->value, pcecal::surrogate_cost(space->value, surrogate->value), cfg.ke,
                                           cfg.hyper);
        *out = new pcecal_chain{pcecal::run_mcmc(post, cfg)};
    });
}

pcecal_status pcecal_mcmc_run_cost(const pcecal_space* space, pcecal_cost_fn cost, void* user,
                                   const pcecal_mcmc_options* options, pcecal_chain** out) {
    return guard([&] {
        need(space, "space");
        need(reinterpret_cast<const void*>(cost), "cost");
        need(out, "out");
        const auto cfg = to_config(options, space->value.dim());
        pcecal::CostFunction f = [cost, user](std::span<const double> p) { return cost(p.data(), p.size(), user); };
        const pcecal::ScaledPosterior post(space->value, std::move(f), cfg.ke, cfg.hyper);
        *out = new pcecal_chain{pcecal::run_mcmc(post, cfg)};
    });
}

pcecal_status pcecal_log_posterior(const pcecal_space* space, const pcecal_expansion* surrogate, double ke,
                                   double alpha, double beta, const double* p, double scale, double* value) {
    return guard([&] {
        need(space, "space");
        need(surrogate, "surrogate");
        need(p, "p");
        need(value, "value");
        const pcecal::ScaledPosterior post(space->value, pcecal::surrogate_cost(space->value, surrogate->value), ke,
                                           {alpha, beta});
        *value = post.log_posterior({p, space->value.dim()}, scale);
    });
}

pcecal_status pcecal_chain_read(const char* path, pcecal_chain** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new pcecal_chain{pcecal::io::load_chain(path)};
    });
}

pcecal_status pcecal_chain_write(const pcecal_chain* chain, const char* path) {
    return guard([&] {
        need(chain, "chain");
        need(path, "path");
        pcecal::io::save(path, chain->value);
    });
}

void pcecal_chain_free(pcecal_chain* chain) { delete chain; }
size_t pcecal_chain_size(const pcecal_chain* c) { return c ? c->value.size() : 0; }
size_t pcecal_chain_dim(const pcecal_chain* c) { return c ? c->value.dim() : 0; }
size_t pcecal_chain_burn_in(const pcecal_chain* c) { return c ? c->value.burn_in : 0; }
double pcecal_chain_acceptance_rate(const pcecal_chain* c) {
    return c ? c->value.acceptance_rate : std::numeric_limits<double>::quiet_NaN();
}
const char* pcecal_chain_name(const pcecal_chain* c, size_t i) {
    if (!c || i >= c->value.names.size()) return nullptr;
    return c->value.names[i].c_str();
}

pcecal_status pcecal_chain_column(const pcecal_chain* c, size_t coord, size_t from, double* values) {
    return guard([&] {
        need(c, "chain");
        need(values, "values");
        const auto col = pcecal::chain_column(c->value, coord, from);
        std::copy(col.begin(), col.end(), values);
    });
}

pcecal_status pcecal_chain_log_posterior(const pcecal_chain* c, double* values) {
    return guard([&] {
        need(c, "chain");
        need(values, "values");
        copy_out(c->value.log_post, values);
    });
}

pcecal_status pcecal_chain_proposal_scales(const pcecal_chain* c, double* scales) {
    return guard([&] {
        need(c, "chain");
        need(scales, "scales");
        std::copy(c->value.proposal_scales.begin(), c->value.proposal_scales.end(), scales);
    });
}

pcecal_status pcecal_chain_running_mean(const pcecal_chain* c, size_t from, double* means) {
    return guard([&] {
        need(c, "chain");
        need(means, "means");
        copy_out(pcecal::running_mean(c->value, from), means);
    });
}

}  // extern "C"
