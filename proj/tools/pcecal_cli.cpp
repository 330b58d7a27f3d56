#include "config.hpp"

#include <pcecal/pcecal.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pcecal_cli;

namespace {

enum Exit { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_partial = 3 };

struct Failure {
    int code;
    std::string message;
};

int exit_code(pcecal_status s) {
    switch (s) {
        case PCECAL_OK: return exit_ok;
        case PCECAL_E_NUMERICAL:
        case PCECAL_E_INTERNAL: return exit_numerical;
        case PCECAL_E_PARTIAL: return exit_partial;
        default: return exit_usage;
    }
}

void check(pcecal_status s, const std::string& context) {
    if (s != PCECAL_OK) throw Failure{exit_code(s), context + ": " + pcecal_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{exit_usage, msg}; }

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};

using Space = Handle<pcecal_space, pcecal_space_free>;
using DesignH = Handle<pcecal_design, pcecal_design_free>;
using EnsembleH = Handle<pcecal_ensemble, pcecal_ensemble_free>;
using ExpansionH = Handle<pcecal_expansion, pcecal_expansion_free>;
using ReportH = Handle<pcecal_bpdn_report, pcecal_bpdn_report_free>;
using DensityH = Handle<pcecal_density, pcecal_density_free>;
using ChainH = Handle<pcecal_chain, pcecal_chain_free>;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct App {
    Config cfg;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool quiet = false;

    void load() {
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) usage_error("config file not found: " + config_path);
            cfg = load_config(config_path);
        }
        if (seed) {
            cfg.design.seed = *seed;
            cfg.fit.seed = *seed;
            cfg.calibration.seed = *seed;
        }
    }

    void announce(const std::string& command) const {
        if (quiet) return;
        std::cerr << "# pcecal " << command << " effective configuration";
        if (!cfg.source.empty()) std::cerr << " (from " << cfg.source << ")";
        std::cerr << "\n# threads = " << threads << '\n';
        std::istringstream is(render_config(cfg));
        for (std::string line; std::getline(is, line);) std::cerr << "#   " << line << '\n';
    }

    std::string output(const std::string& path) const {
        if (path.empty()) usage_error("an output path is required");
        fs::path p(path);
        if (p.is_relative() && !cfg.paths.output_dir.empty()) p = fs::path(cfg.paths.output_dir) / p;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        return p.string();
    }

    static std::string input(const std::string& path, const char* what) {
        if (path.empty()) usage_error(std::string("missing ") + what + " path");
        if (!fs::exists(path)) usage_error(std::string(what) + " not found: " + path);
        return path;
    }

    void space(Space& s) const {
        if (cfg.parameters.empty()) usage_error("this command needs a [parameters] block in the config file");
        std::vector<const char*> names;
        std::vector<double> lo, hi, nom;
        for (const auto& p : cfg.parameters) {
            names.push_back(p.name.c_str());
            lo.push_back(p.lower);
            hi.push_back(p.upper);
            nom.push_back(p.nominal ? *p.nominal : std::nan(""));
        }
        check(pcecal_space_create(names.size(), names.data(), lo.data(), hi.data(), nom.data(), s.out()), "parameter space");
    }

    std::string axis_label(std::size_t axis) const {
        if (axis < cfg.parameters.size()) return cfg.parameters[axis].name;
        return "xi_" + std::to_string(axis + 1);
    }

    std::size_t parse_axis(const std::string& s, std::size_t dim) const {
        for (std::size_t i = 0; i < cfg.parameters.size(); ++i)
            if (cfg.parameters[i].name == s) return i;
        std::size_t v = 0;
        try {
            std::size_t used = 0;
            v = std::stoul(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            usage_error("axis '" + s + "' is neither a parameter name nor a 1-based index");
        }
        if (v < 1 || v > dim) usage_error("axis " + s + " out of range 1.." + std::to_string(dim));
        return v - 1;
    }
};

std::string unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == 'n') {
            out += '\n';
            ++i;
        } else {
            out += s[i];
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Failure{exit_usage, "cannot open " + path};
    os << text;
}

}  // namespace

int main(int argc, char** argv) {
    App app;
    CLI::App cli{"Polynomial chaos surrogates and Bayesian calibration of expensive models"};
    cli.require_subcommand(1);
    cli.fallthrough();
    cli.set_version_flag("--version", std::string(pcecal_version()));
    cli.add_option("-c,--config", app.config_path, "Project configuration file");
    cli.add_option("--seed", app.seed, "Override every seed in the configuration");
    cli.add_option("--threads", app.threads, "Worker threads for cross-validation (0 = all cores)");
    cli.add_flag("-q,--quiet", app.quiet, "Do not print the effective configuration");

    // design
    auto* design = cli.add_subcommand("design", "Write a Smolyak or random design file");
    std::string design_out, design_from;
    std::optional<int> design_level;
    std::optional<std::size_t> design_random, design_dim;
    design->add_option("-o,--out", design_out, "Design file to write")->required();
    design->add_option("--level", design_level, "Smolyak level");
    design->add_option("--random", design_random, "Number of uniform random nodes");
    design->add_option("--dim", design_dim, "Dimension when no [parameters] block is given");
    design->add_option("--from", design_from, "Existing Smolyak design to take a nested lower level from");

    // run
    auto* run = cli.add_subcommand("run", "Prepare node directories, run or manifest the external model, harvest");
    std::string run_design, run_out, run_work, run_command;
    run->add_option("--design", run_design, "Design file")->required();
    run->add_option("-o,--out", run_out, "Ensemble file for the harvested rows")->required();
    run->add_option("--work-dir", run_work, "Node directory root");
    run->add_option("--command", run_command, "Model command run inside each node directory");

    // evaluate
    auto* evaluate = cli.add_subcommand("evaluate", "Evaluate a bundled synthetic model on a design");
    std::string eval_design, eval_out, eval_model = "smooth", eval_truth;
    std::optional<double> eval_sigma;
    std::optional<std::uint64_t> eval_noise_seed;
    evaluate->add_option("--design", eval_design, "Design file")->required();
    evaluate->add_option("-o,--out", eval_out, "Ensemble file to write")->required();
    evaluate->add_option("--model", eval_model, "smooth or planted")->check(CLI::IsMember({"smooth", "planted"}));
    evaluate->add_option("--truth", eval_truth, "Coefficient file of the planted polynomial");
    evaluate->add_option("--sigma", eval_sigma, "Noise standard deviation (default: 5% of the smooth model's range, 0 for planted)");
    evaluate->add_option("--noise-seed", eval_noise_seed, "Seed of the hashed noise");

    // fit
    auto* fit = cli.add_subcommand("fit", "Fit polynomial chaos coefficients by NISP or BPDN");
    std::string fit_ens, fit_out, fit_method, fit_design;
    std::optional<unsigned> fit_order;
    std::optional<double> fit_delta;
    std::optional<std::size_t> fit_folds;
    fit->add_option("--ensemble", fit_ens, "Ensemble file")->required();
    fit->add_option("-o,--out", fit_out, "Coefficient file to write")->required();
    fit->add_option("--method", fit_method, "nisp or bpdn")->check(CLI::IsMember({"nisp", "bpdn"}));
    fit->add_option("--order", fit_order, "Total polynomial order");
    fit->add_option("--delta", fit_delta, "BPDN residual budget (skips cross-validation)");
    fit->add_option("--folds", fit_folds, "Cross-validation folds");
    fit->add_option("--design", fit_design, "Restrict the ensemble to the nodes (and weights) of this design");

    // validate
    auto* validate = cli.add_subcommand("validate", "Normalized relative error of a surrogate on an ensemble");
    std::string val_coeffs, val_ens;
    validate->add_option("--coeffs", val_coeffs, "Coefficient file")->required();
    validate->add_option("--ensemble", val_ens, "Ensemble file")->required();

    // moments
    auto* moments = cli.add_subcommand("moments", "Surrogate mean, variance and standard deviation");
    std::string mom_coeffs;
    moments->add_option("--coeffs", mom_coeffs, "Coefficient file")->required();

    // sobol
    auto* sobol = cli.add_subcommand("sobol", "Total sensitivity indices");
    std::string sob_coeffs;
    sobol->add_option("--coeffs", sob_coeffs, "Coefficient file")->required();

    // response
    auto* response = cli.add_subcommand("response", "1D response curve or 2D response surface table");
    std::string resp_coeffs, resp_out, resp_axis, resp_axis2;
    std::optional<std::size_t> resp_points;
    std::vector<double> resp_at;
    response->add_option("--coeffs", resp_coeffs, "Coefficient file")->required();
    response->add_option("-o,--out", resp_out, "Table to write")->required();
    response->add_option("--axis", resp_axis, "Parameter name or 1-based index")->required();
    response->add_option("--axis2", resp_axis2, "Second axis for a surface");
    response->add_option("--points", resp_points, "Points per axis (default 201 for curves, 51 for surfaces)");
    response->add_option("--at", resp_at, "Canonical coordinates of the fixed point (default origin)")->expected(1, -1);

    // mcmc
    auto* mcmc = cli.add_subcommand("mcmc", "Metropolis-within-Gibbs calibration on a surrogate");
    std::string mc_coeffs, mc_out;
    std::optional<std::size_t> mc_iters, mc_burn, mc_tune;
    std::optional<double> mc_fixed;
    mcmc->add_option("--coeffs", mc_coeffs, "Coefficient file")->required();
    mcmc->add_option("-o,--out", mc_out, "Chain file to write")->required();
    mcmc->add_option("--iters", mc_iters, "Iterations");
    mcmc->add_option("--burn-in", mc_burn, "Burn-in iterations (default 20%)");
    mcmc->add_option("--tune", mc_tune, "Discarded proposal-tuning iterations");
    mcmc->add_option("--fixed-scale", mc_fixed, "Hold S fixed at this value");

    // kde
    auto* kde = cli.add_subcommand("kde", "Kernel density estimates of chain marginals or of the surrogate output");
    std::string kde_chain, kde_coeffs, kde_out;
    std::optional<std::size_t> kde_samples;
    std::size_t kde_grid = 256;
    double kde_bw = 0.0;
    kde->add_option("--chain", kde_chain, "Chain file; one table per parameter and S");
    kde->add_option("--coeffs", kde_coeffs, "Coefficient file; density of the surrogate output");
    kde->add_option("--samples", kde_samples, "Surrogate samples (default 1e6)");
    kde->add_option("-o,--out", kde_out, "Output file (surrogate) or prefix (chain)")->required();
    kde->add_option("--grid", kde_grid, "Grid points");
    kde->add_option("--bandwidth", kde_bw, "Kernel bandwidth (default Silverman)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try {
        app.load();
        auto& cfg = app.cfg;

        if (*design) {
            if (design_level) cfg.design.level = *design_level, cfg.design.random.reset();
            if (design_random) cfg.design.random = *design_random, cfg.design.level.reset();
            if (design_dim) cfg.design.dim = *design_dim;
            std::size_t dim = cfg.parameters.size();
            if (cfg.design.dim) {
                if (dim && *cfg.design.dim != dim) usage_error("dim disagrees with the [parameters] block");
                dim = *cfg.design.dim;
            }
            app.announce("design");
            DesignH d;
            if (!design_from.empty()) {
                DesignH full;
                check(pcecal_design_read(App::input(design_from, "design").c_str(), full.out()), "reading " + design_from);
                if (!cfg.design.level) usage_error("--from needs a level");
                check(pcecal_design_subset(full.get(), *cfg.design.level, d.out()), "subset");
            } else {
                if (dim == 0) usage_error("design dimension unknown: give [parameters], [design] dim or --dim");
                if (cfg.design.random)
                    check(pcecal_design_random(dim, *cfg.design.random, cfg.design.seed, d.out()), "random design");
                else if (cfg.design.level)
                    check(pcecal_design_smolyak(dim, *cfg.design.level, d.out()), "Smolyak design");
                else
                    usage_error("give a Smolyak level or a random sample size");
            }
            const auto out = app.output(design_out);
            check(pcecal_design_write(d.get(), out.c_str()), "writing design");
            std::cout << "nodes = " << pcecal_design_size(d.get()) << "\ndim = " << pcecal_design_dim(d.get())
                      << "\nfile = " << out << '\n';
        } else if (*run) {
            if (!run_work.empty()) cfg.paths.work_dir = run_work;
            if (!run_command.empty()) cfg.model.command = run_command;
            app.announce("run");
            Space s;
            app.space(s);
            DesignH d;
            check(pcecal_design_read(App::input(run_design, "design").c_str(), d.out()), "reading " + run_design);
            pcecal_external_spec spec;
            pcecal_external_spec_default(&spec);
            const std::string tmpl = unescape(cfg.model.input_template);
            spec.work_dir = cfg.paths.work_dir.c_str();
            spec.input_template = tmpl.c_str();
            spec.input_file = cfg.model.input_file.c_str();
            spec.command = cfg.model.command.c_str();
            spec.output_file = cfg.model.output_file.c_str();
            spec.output_key = cfg.model.output_key.c_str();
            spec.output_column = cfg.model.output_column ? *cfg.model.output_column : -1;
            spec.timeout_seconds = cfg.model.timeout;
            EnsembleH e;
            pcecal_run_summary summary{};
            const auto st = pcecal_run_ensemble(&spec, d.get(), s.get(), e.out(), &summary);
            if (st != PCECAL_OK && st != PCECAL_E_PARTIAL) check(st, "run");
            std::cout << "completed = " << summary.completed << "\npending = " << summary.pending
                      << "\nfailed = " << summary.failed << '\n';
            if (e.get()) {
                const auto out = app.output(run_out);
                check(pcecal_ensemble_write(e.get(), out.c_str()), "writing ensemble");
                std::cout << "file = " << out << '\n';
            }
            if (st == PCECAL_E_PARTIAL) {
                std::cerr << "pcecal run: " << pcecal_last_error() << '\n';
                return exit_partial;
            }
        } else if (*evaluate) {
            if (eval_sigma) cfg.model.noise_sigma = *eval_sigma;
            if (eval_noise_seed) cfg.model.noise_seed = *eval_noise_seed;
            else if (app.seed) cfg.model.noise_seed = *app.seed;
            app.announce("evaluate");
            DesignH d;
            check(pcecal_design_read(App::input(eval_design, "design").c_str(), d.out()), "reading " + eval_design);
            std::vector<double> v(pcecal_design_size(d.get()));
            if (eval_model == "smooth") {
                const double sigma = cfg.model.noise_sigma ? *cfg.model.noise_sigma : pcecal_smooth_model_default_sigma();
                check(pcecal_evaluate_smooth(d.get(), sigma, cfg.model.noise_seed, v.data()), "evaluate");
            } else {
                ExpansionH truth;
                check(pcecal_expansion_read(App::input(eval_truth, "truth coefficients").c_str(), truth.out()),
                      "reading " + eval_truth);
                const double sigma = cfg.model.noise_sigma ? *cfg.model.noise_sigma : 0.0;
                check(pcecal_evaluate_planted(d.get(), truth.get(), sigma, cfg.model.noise_seed, v.data()), "evaluate");
            }
            EnsembleH e;
            check(pcecal_ensemble_create(d.get(), v.data(), e.out()), "ensemble");
            const auto out = app.output(eval_out);
            check(pcecal_ensemble_write(e.get(), out.c_str()), "writing ensemble");
            std::cout << "rows = " << v.size() << "\nfile = " << out << '\n';
        } else if (*fit) {
            if (!fit_method.empty()) cfg.fit.method = fit_method;
            if (fit_order) cfg.fit.order = *fit_order;
            if (fit_delta) cfg.fit.delta = *fit_delta;
            if (fit_folds) cfg.fit.folds = *fit_folds;
            app.announce("fit");
            EnsembleH e;
            check(pcecal_ensemble_read(App::input(fit_ens, "ensemble").c_str(), e.out()), "reading " + fit_ens);
            if (!fit_design.empty()) {
                DesignH d;
                check(pcecal_design_read(App::input(fit_design, "design").c_str(), d.out()), "reading " + fit_design);
                EnsembleH sub;
                check(pcecal_ensemble_restrict(e.get(), d.get(), sub.out()), "restricting ensemble");
                std::swap(e.p, sub.p);
            }
            ExpansionH x;
            ReportH rep;
            if (cfg.fit.method == "nisp") {
                check(pcecal_fit_nisp(e.get(), cfg.fit.order, x.out()), "NISP fit");
            } else {
                pcecal_bpdn_options o;
                pcecal_bpdn_options_default(&o);
                o.has_delta = cfg.fit.delta ? 1 : 0;
                o.delta = cfg.fit.delta.value_or(0.0);
                o.cv_folds = cfg.fit.folds;
                o.delta_grid = cfg.fit.delta_grid.empty() ? nullptr : cfg.fit.delta_grid.data();
                o.n_delta_grid = cfg.fit.delta_grid.size();
                o.max_iters = cfg.fit.max_iters;
                o.opt_tol = cfg.fit.opt_tol;
                o.seed = cfg.fit.seed;
                o.threads = app.threads;
                check(pcecal_fit_bpdn(e.get(), cfg.fit.order, &o, x.out(), rep.out()), "BPDN fit");
            }
            const auto out = app.output(fit_out);
            check(pcecal_expansion_write(x.get(), out.c_str()), "writing coefficients");
            check(pcecal_expansion_write_spectrum(x.get(), (out + ".spectrum").c_str()), "writing spectrum");
            double train_nre = 0.0;
            check(pcecal_expansion_nre(x.get(), e.get(), &train_nre), "training NRE");
            std::vector<double> bands(cfg.fit.order + 1);
            check(pcecal_expansion_band_means(x.get(), bands.data()), "band means");
            std::ostringstream report;
            report << "method = " << cfg.fit.method << "\norder = " << cfg.fit.order
                   << "\nterms = " << pcecal_expansion_size(x.get()) << "\nrows = " << pcecal_ensemble_size(e.get())
                   << "\ntraining_nre = " << fmt(train_nre) << "\nband_means =";
            for (double b : bands) report << ' ' << fmt(b);
            report << '\n';
            if (rep.get()) {
                pcecal_bpdn_summary sm;
                pcecal_bpdn_report_summary(rep.get(), &sm);
                report << "delta = " << fmt(sm.chosen_delta) << "\nresidual_norm = " << fmt(sm.residual_norm)
                       << "\nl1_norm = " << fmt(sm.l1_norm) << "\niterations = " << sm.iterations
                       << "\nconverged = " << (sm.converged ? "yes" : "no") << "\nexit = " << sm.exit_reason
                       << "\ncross_validated = " << (sm.cross_validated ? "yes" : "no") << '\n';
                if (sm.cross_validated) {
                    check(pcecal_bpdn_report_write_cv(rep.get(), (out + ".cv").c_str()), "writing CV table");
                    report << "cv_table = " << out << ".cv\n";
                }
            }
            report << "spectrum = " << out << ".spectrum\nfile = " << out << '\n';
            write_text(out + ".report", report.str());
            std::cout << report.str();
        } else if (*validate) {
            app.announce("validate");
            ExpansionH x;
            EnsembleH e;
            check(pcecal_expansion_read(App::input(val_coeffs, "coefficients").c_str(), x.out()), "reading " + val_coeffs);
            check(pcecal_ensemble_read(App::input(val_ens, "ensemble").c_str(), e.out()), "reading " + val_ens);
            double v = 0.0;
            check(pcecal_expansion_nre(x.get(), e.get(), &v), "NRE");
            std::cout << "rows = " << pcecal_ensemble_size(e.get()) << "\nnre = " << fmt(v) << '\n';
        } else if (*moments) {
            app.announce("moments");
            ExpansionH x;
            check(pcecal_expansion_read(App::input(mom_coeffs, "coefficients").c_str(), x.out()), "reading " + mom_coeffs);
            const double var = pcecal_expansion_variance(x.get());
            std::cout << "mean = " << fmt(pcecal_expansion_mean(x.get())) << "\nvariance = " << fmt(var)
                      << "\nstd = " << fmt(std::sqrt(var)) << '\n';
        } else if (*sobol) {
            app.announce("sobol");
            ExpansionH x;
            check(pcecal_expansion_read(App::input(sob_coeffs, "coefficients").c_str(), x.out()), "reading " + sob_coeffs);
            std::vector<double> t(pcecal_expansion_dim(x.get()));
            check(pcecal_expansion_total_sensitivity(x.get(), t.data()), "total sensitivity");
            for (std::size_t i = 0; i < t.size(); ++i) std::cout << "T[" << app.axis_label(i) << "] = " << fmt(t[i]) << '\n';
        } else if (*response) {
            app.announce("response");
            ExpansionH x;
            check(pcecal_expansion_read(App::input(resp_coeffs, "coefficients").c_str(), x.out()), "reading " + resp_coeffs);
            const std::size_t dim = pcecal_expansion_dim(x.get());
            if (!resp_at.empty() && resp_at.size() != dim) usage_error("--at needs " + std::to_string(dim) + " values");
            const double* fixed = resp_at.empty() ? nullptr : resp_at.data();
            const std::size_t i = app.parse_axis(resp_axis, dim);
            const auto out = app.output(resp_out);
            std::ostringstream os;
            if (resp_axis2.empty()) {
                const std::size_t n = resp_points.value_or(201);
                std::vector<double> xs(n), ys(n);
                check(pcecal_expansion_response_slice(x.get(), i, fixed, n, xs.data(), ys.data()), "response slice");
                os << "# pcecal response-curve\n# axis " << app.axis_label(i) << "\n# columns: xi E\n";
                for (std::size_t a = 0; a < n; ++a) os << fmt(xs[a]) << ' ' << fmt(ys[a]) << '\n';
            } else {
                const std::size_t j = app.parse_axis(resp_axis2, dim);
                const std::size_t n = resp_points.value_or(51);
                std::vector<double> xs(n), ys(n), zs(n * n);
                check(pcecal_expansion_response_surface(x.get(), i, j, fixed, n, xs.data(), ys.data(), zs.data()),
                      "response surface");
                os << "# pcecal response-surface\n# axes " << app.axis_label(i) << ' ' << app.axis_label(j)
                   << "\n# columns: xi_i xi_j E\n";
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) os << fmt(xs[a]) << ' ' << fmt(ys[b]) << ' ' << fmt(zs[a * n + b]) << '\n';
            }
            write_text(out, os.str());
            std::cout << "file = " << out << '\n';
        } else if (*mcmc) {
            auto& k = cfg.calibration;
            if (mc_iters) k.iterations = *mc_iters;
            if (mc_burn) k.burn_in = *mc_burn;
            if (mc_tune) k.tune_iterations = *mc_tune;
            if (mc_fixed) k.fixed_scale = *mc_fixed;
            if (!k.burn_in) k.burn_in = k.iterations / 5;
            app.announce("mcmc");
            Space s;
            app.space(s);
            ExpansionH x;
            check(pcecal_expansion_read(App::input(mc_coeffs, "coefficients").c_str(), x.out()), "reading " + mc_coeffs);
            const std::size_t dim = pcecal_space_dim(s.get());
            std::vector<double> scales = k.proposal_scales;
            if (scales.size() == 1) scales.assign(dim, scales[0]);
            if (!scales.empty() && scales.size() != dim)
                usage_error("proposal_scales needs 1 or " + std::to_string(dim) + " values");
            if (!k.initial.empty() && k.initial.size() != dim)
                usage_error("initial needs " + std::to_string(dim) + " values");
            pcecal_mcmc_options o;
            pcecal_mcmc_options_default(&o);
            o.ke = k.ke;
            o.alpha = k.alpha;
            o.beta = k.beta;
            o.n_iters = k.iterations;
            o.burn_in = *k.burn_in;
            o.proposal_scales = scales.empty() ? nullptr : scales.data();
            o.seed = k.seed;
            o.tune_iters = k.tune_iterations;
            o.has_fixed_scale = k.fixed_scale ? 1 : 0;
            o.fixed_scale = k.fixed_scale.value_or(0.0);
            o.initial = k.initial.empty() ? nullptr : k.initial.data();
            ChainH c;
            check(pcecal_mcmc_run(s.get(), x.get(), &o, c.out()), "MCMC");
            const auto out = app.output(mc_out);
            check(pcecal_chain_write(c.get(), out.c_str()), "writing chain");
            const std::size_t kept = pcecal_chain_size(c.get()) - pcecal_chain_burn_in(c.get());
            std::vector<double> means((dim + 1) * kept);
            check(pcecal_chain_running_mean(c.get(), pcecal_chain_burn_in(c.get()), means.data()), "running mean");
            std::cout << "iterations = " << pcecal_chain_size(c.get()) << "\nburn_in = " << pcecal_chain_burn_in(c.get())
                      << "\nacceptance_rate = " << fmt(pcecal_chain_acceptance_rate(c.get())) << '\n';
            for (std::size_t i = 0; i <= dim; ++i)
                std::cout << "posterior_mean[" << (i < dim ? pcecal_chain_name(c.get(), i) : "S")
                          << "] = " << fmt(means[(kept - 1) * (dim + 1) + i]) << '\n';
            std::cout << "file = " << out << '\n';
        } else if (*kde) {
            app.announce("kde");
            if (kde_chain.empty() == kde_coeffs.empty()) usage_error("give exactly one of --chain or --coeffs");
            if (!kde_coeffs.empty()) {
                ExpansionH x;
                check(pcecal_expansion_read(App::input(kde_coeffs, "coefficients").c_str(), x.out()), "reading " + kde_coeffs);
                DensityH d;
                check(pcecal_expansion_sample_pdf(x.get(), kde_samples.value_or(1'000'000), app.cfg.calibration.seed,
                                                  kde_grid, d.out()),
                      "surrogate pdf");
                const auto out = app.output(kde_out);
                check(pcecal_density_write(d.get(), "E", out.c_str()), "writing density");
                std::cout << "bandwidth = " << fmt(pcecal_density_bandwidth(d.get())) << "\nfile = " << out << '\n';
            } else {
                ChainH c;
                check(pcecal_chain_read(App::input(kde_chain, "chain").c_str(), c.out()), "reading " + kde_chain);
                const std::size_t dim = pcecal_chain_dim(c.get());
                const std::size_t n = pcecal_chain_size(c.get());
                std::vector<double> col(n);
                for (std::size_t i = 0; i <= dim; ++i) {
                    const std::string name = i < dim ? pcecal_chain_name(c.get(), i) : "S";
                    check(pcecal_chain_column(c.get(), i, 0, col.data()), "chain column");
                    DensityH d;
                    check(pcecal_kde(col.data(), n, kde_grid, kde_bw, d.out()), "KDE of " + name);
                    const auto out = app.output(kde_out + "_" + name + ".tsv");
                    check(pcecal_density_write(d.get(), name.c_str(), out.c_str()), "writing density");
                    std::cout << "file[" << name << "] = " << out << '\n';
                }
            }
        }
    } catch (const Failure& f) {
        std::cerr << "pcecal: " << f.message << '\n';
        return f.code;
    } catch (const ConfigError& e) {
        std::cerr << "pcecal: " << e.what() << '\n';
        return exit_usage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "pcecal: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_ok;
}
