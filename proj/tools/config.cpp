#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pcecal_cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    const auto p = s.find('#');
    return p == std::string::npos ? s : s.substr(0, p);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

struct Ctx {
    const std::string& source;
    int line;

    [[noreturn]] void error(const std::string& msg) const {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
    }

    double real(const std::string& s) const {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) error("'" + s + "' is not a finite number");
        return v;
    }

    std::uint64_t uint(const std::string& s) const {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) error("'" + s + "' is not a nonnegative integer");
        return v;
    }

    std::vector<double> reals(const std::string& s) const {
        std::vector<double> out;
        for (const auto& w : words(s)) out.push_back(real(w));
        if (out.empty()) error("expected at least one number");
        return out;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s;
}

using Setter = std::function<void(const Ctx&, const std::string&)>;

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
    Config cfg;
    cfg.source = source;

    std::map<std::string, std::map<std::string, Setter>> keys;
    auto& d = keys["design"];
    d["level"] = [&](const Ctx& c, const std::string& v) { cfg.design.level = static_cast<int>(c.uint(v)); };
    d["random"] = [&](const Ctx& c, const std::string& v) { cfg.design.random = c.uint(v); };
    d["dim"] = [&](const Ctx& c, const std::string& v) { cfg.design.dim = c.uint(v); };
    d["seed"] = [&](const Ctx& c, const std::string& v) { cfg.design.seed = c.uint(v); };
    auto& f = keys["fit"];
    f["method"] = [&](const Ctx& c, const std::string& v) {
        if (v != "nisp" && v != "bpdn") c.error("method must be nisp or bpdn");
        cfg.fit.method = v;
    };
    f["order"] = [&](const Ctx& c, const std::string& v) { cfg.fit.order = static_cast<unsigned>(c.uint(v)); };
    f["delta"] = [&](const Ctx& c, const std::string& v) {
        cfg.fit.delta = c.real(v);
        if (*cfg.fit.delta < 0) c.error("delta must be nonnegative");
    };
    f["folds"] = [&](const Ctx& c, const std::string& v) { cfg.fit.folds = c.uint(v); };
    f["delta_grid"] = [&](const Ctx& c, const std::string& v) { cfg.fit.delta_grid = c.reals(v); };
    f["max_iters"] = [&](const Ctx& c, const std::string& v) { cfg.fit.max_iters = c.uint(v); };
    f["opt_tol"] = [&](const Ctx& c, const std::string& v) { cfg.fit.opt_tol = c.real(v); };
    f["seed"] = [&](const Ctx& c, const std::string& v) { cfg.fit.seed = c.uint(v); };
    auto& k = keys["calibration"];
    k["ke"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.ke = c.real(v); };
    k["alpha"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.alpha = c.real(v); };
    k["beta"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.beta = c.real(v); };
    k["iterations"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.iterations = c.uint(v); };
    k["burn_in"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.burn_in = c.uint(v); };
    k["proposal_scales"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.proposal_scales = c.reals(v); };
    k["tune_iterations"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.tune_iterations = c.uint(v); };
    k["fixed_scale"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.fixed_scale = c.real(v); };
    k["initial"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.initial = c.reals(v); };
    k["seed"] = [&](const Ctx& c, const std::string& v) { cfg.calibration.seed = c.uint(v); };
    auto& m = keys["model"];
    m["command"] = [&](const Ctx&, const std::string& v) { cfg.model.command = v; };
    m["input_template"] = [&](const Ctx&, const std::string& v) { cfg.model.input_template = v; };
    m["input_file"] = [&](const Ctx&, const std::string& v) { cfg.model.input_file = v; };
    m["output_file"] = [&](const Ctx&, const std::string& v) { cfg.model.output_file = v; };
    m["output_key"] = [&](const Ctx&, const std::string& v) { cfg.model.output_key = v; };
    m["output_column"] = [&](const Ctx& c, const std::string& v) { cfg.model.output_column = static_cast<long>(c.uint(v)); };
    m["timeout"] = [&](const Ctx& c, const std::string& v) { cfg.model.timeout = c.real(v); };
    m["noise_sigma"] = [&](const Ctx& c, const std::string& v) { cfg.model.noise_sigma = c.real(v); };
    m["noise_seed"] = [&](const Ctx& c, const std::string& v) { cfg.model.noise_seed = c.uint(v); };
    auto& p = keys["paths"];
    p["work_dir"] = [&](const Ctx&, const std::string& v) { cfg.paths.work_dir = v; };
    p["output_dir"] = [&](const Ctx&, const std::string& v) { cfg.paths.output_dir = v; };

    std::istringstream is(text);
    std::string raw;
    std::string section;
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys;
    std::set<std::string> param_names;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const Ctx c{source, lineno};
        // Templates may legitimately contain '#', so only strip comments outside [model].
        const std::string line = trim(section == "model" && raw.find('=') != std::string::npos ? raw : strip_comment(raw));
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') c.error("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "parameters" && !keys.count(section)) c.error("unknown section [" + section + "]");
            if (!seen_sections.insert(section).second) c.error("duplicate section [" + section + "]");
            continue;
        }
        if (section.empty()) c.error("entry outside of any section");
        if (section == "parameters") {
            const auto w = words(line);
            if (w.size() != 3 && w.size() != 4) c.error("parameter lines are 'name lower upper [default]'");
            Parameter par{w[0], c.real(w[1]), c.real(w[2]), std::nullopt};
            if (w.size() == 4) par.nominal = c.real(w[3]);
            if (!(par.lower < par.upper)) c.error("parameter " + par.name + ": lower bound must be below upper bound");
            if (par.nominal && (*par.nominal < par.lower || *par.nominal > par.upper))
                c.error("parameter " + par.name + ": default outside its bounds");
            if (!param_names.insert(par.name).second) c.error("duplicate parameter " + par.name);
            cfg.parameters.push_back(std::move(par));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) c.error("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        const auto& table = keys.at(section);
        const auto it = table.find(key);
        if (it == table.end()) c.error("unknown key '" + key + "' in [" + section + "]");
        if (!seen_keys.insert(section + "." + key).second) c.error("duplicate key '" + key + "' in [" + section + "]");
        if (value.empty()) c.error("key '" + key + "' has no value");
        it->second(c, value);
    }
    if (cfg.design.level && cfg.design.random)
        throw ConfigError(source + ": [design] takes either level or random, not both");
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string render_config(const Config& c) {
    std::ostringstream os;
    if (!c.parameters.empty()) {
        os << "[parameters]\n";
        for (const auto& p : c.parameters) {
            os << p.name << ' ' << fmt(p.lower) << ' ' << fmt(p.upper);
            if (p.nominal) os << ' ' << fmt(*p.nominal);
            os << '\n';
        }
    }
    os << "[design]\n";
    if (c.design.level) os << "level = " << *c.design.level << '\n';
    if (c.design.random) os << "random = " << *c.design.random << '\n';
    if (c.design.dim) os << "dim = " << *c.design.dim << '\n';
    os << "seed = " << c.design.seed << '\n';
    os << "[fit]\nmethod = " << c.fit.method << "\norder = " << c.fit.order << '\n';
    if (c.fit.delta) os << "delta = " << fmt(*c.fit.delta) << '\n';
    os << "folds = " << c.fit.folds << '\n';
    if (!c.fit.delta_grid.empty()) os << "delta_grid = " << fmt_list(c.fit.delta_grid) << '\n';
    os << "max_iters = " << c.fit.max_iters << "\nopt_tol = " << fmt(c.fit.opt_tol) << "\nseed = " << c.fit.seed << '\n';
    const auto& k = c.calibration;
    os << "[calibration]\nke = " << fmt(k.ke) << "\nalpha = " << fmt(k.alpha) << "\nbeta = " << fmt(k.beta)
       << "\niterations = " << k.iterations << '\n';
    if (k.burn_in) os << "burn_in = " << *k.burn_in << '\n';
    if (!k.proposal_scales.empty()) os << "proposal_scales = " << fmt_list(k.proposal_scales) << '\n';
    os << "tune_iterations = " << k.tune_iterations << '\n';
    if (k.fixed_scale) os << "fixed_scale = " << fmt(*k.fixed_scale) << '\n';
    if (!k.initial.empty()) os << "initial = " << fmt_list(k.initial) << '\n';
    os << "seed = " << k.seed << '\n';
    os << "[model]\n";
    if (!c.model.command.empty()) os << "command = " << c.model.command << '\n';
    if (!c.model.input_template.empty()) os << "input_template = " << c.model.input_template << '\n';
    os << "input_file = " << c.model.input_file << "\noutput_file = " << c.model.output_file << '\n';
    if (!c.model.output_key.empty()) os << "output_key = " << c.model.output_key << '\n';
    if (c.model.output_column) os << "output_column = " << *c.model.output_column << '\n';
    os << "timeout = " << fmt(c.model.timeout) << '\n';
    if (c.model.noise_sigma) os << "noise_sigma = " << fmt(*c.model.noise_sigma) << '\n';
    os << "noise_seed = " << c.model.noise_seed << '\n';
    os << "[paths]\nwork_dir = " << c.paths.work_dir << '\n';
    if (!c.paths.output_dir.empty()) os << "output_dir = " << c.paths.output_dir << '\n';
    return os.str();
}

}  // namespace pcecal_cli
