#include "pcecal/io.hpp"

#include "pcecal/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pcecal::io {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

struct Table {
    std::string kind;
    std::map<std::string, std::string> header;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> row_lines;
};

std::vector<std::string> split(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
}

Table read_table(std::istream& is, const std::string& expected_kind) {
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            const std::string body = trim(s.substr(1));
            if (t.kind.empty()) {
                const auto parts = split(body);
                if (parts.size() != 2 || parts[0] != "pcecal")
                    fail(ErrorCode::parse, "line " + std::to_string(lineno) + ": expected '# pcecal " + expected_kind + "'");
                t.kind = parts[1];
                if (t.kind != expected_kind)
                    fail(ErrorCode::parse, "file holds a '" + t.kind + "', expected '" + expected_kind + "'");
                continue;
            }
            const auto sp = body.find_first_of(" \t");
            const std::string key = body.substr(0, sp);
            const std::string value = sp == std::string::npos ? "" : trim(body.substr(sp));
            if (key == "meta") {
                const auto eq = value.find('=');
                if (eq == std::string::npos)
                    fail(ErrorCode::parse, "line " + std::to_string(lineno) + ": meta line needs 'key = value'");
                t.meta.emplace_back(trim(value.substr(0, eq)), trim(value.substr(eq + 1)));
            } else if (key != "columns:") {
                t.header[key] = value;
            }
            continue;
        }
        if (t.kind.empty()) fail(ErrorCode::parse, "missing '# pcecal " + expected_kind + "' header");
        t.rows.push_back(split(s));
        t.row_lines.push_back(lineno);
    }
    if (t.kind.empty()) fail(ErrorCode::parse, "empty file: expected '# pcecal " + expected_kind + "'");
    return t;
}

const std::string& need(const Table& t, const std::string& key) {
    const auto it = t.header.find(key);
    if (it == t.header.end()) fail(ErrorCode::parse, "missing header field '" + key + "'");
    return it->second;
}

double to_real(const std::string& s, int line) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        // from_chars rejects inf/nan spellings that strtod accepts.
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size())
            fail(ErrorCode::parse, "line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
    return v;
}

long long to_int(const std::string& s, int line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(ErrorCode::parse, "line " + std::to_string(line) + ": '" + s + "' is not an integer");
    return v;
}

std::size_t header_size(const Table& t, const std::string& key) {
    const long long v = to_int(need(t, key), 0);
    if (v < 0) fail(ErrorCode::parse, "header field '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool header_flag(const Table& t, const std::string& key) {
    const auto& v = need(t, key);
    if (v == "yes") return true;
    if (v == "no") return false;
    fail(ErrorCode::parse, "header field '" + key + "' must be yes or no");
}

void check_width(const Table& t, std::size_t r, std::size_t width) {
    if (t.rows[r].size() != width)
        fail(ErrorCode::parse, "line " + std::to_string(t.row_lines[r]) + ": expected " + std::to_string(width) +
                                   " columns, found " + std::to_string(t.rows[r].size()));
}

void check_index(const Table& t, std::size_t r) {
    if (to_int(t.rows[r][0], t.row_lines[r]) != static_cast<long long>(r))
        fail(ErrorCode::parse, "line " + std::to_string(t.row_lines[r]) + ": row index out of sequence");
}

template <class T, class W>
void save_with(const std::filesystem::path& path, const T& value, W&& writer) {
    std::ofstream os(path);
    require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string() + " for writing");
    writer(os, value);
    os.flush();
    require(static_cast<bool>(os), ErrorCode::io, "write to " + path.string() + " failed");
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
    return is;
}

}  // namespace

void write_design(std::ostream& os, const Design& d) {
    os << "# pcecal design\n# dim " << d.dim() << "\n# kind " << d.kind << "\n# level " << d.level << "\n# seed "
       << d.seed << "\n# weights " << (d.weights ? "yes" : "no") << "\n# columns: index";
    for (std::size_t i = 0; i < d.dim(); ++i) os << " xi_" << i + 1;
    if (d.weights) os << " weight";
    os << '\n';
    for (Eigen::Index q = 0; q < d.nodes.rows(); ++q) {
        os << q;
        for (Eigen::Index i = 0; i < d.nodes.cols(); ++i) os << ' ' << format_real(d.nodes(q, i));
        if (d.weights) os << ' ' << format_real((*d.weights)[q]);
        os << '\n';
    }
}

Design read_design(std::istream& is) {
    const Table t = read_table(is, "design");
    Design d;
    const std::size_t m = header_size(t, "dim");
    require(m >= 1, ErrorCode::parse, "design dim must be >= 1");
    const bool weighted = header_flag(t, "weights");
    d.kind = need(t, "kind");
    d.level = static_cast<int>(to_int(need(t, "level"), 0));
    if (t.header.count("seed")) d.seed = static_cast<std::uint64_t>(to_int(t.header.at("seed"), 0));
    const std::size_t n = t.rows.size();
    require(n >= 1, ErrorCode::parse, "design has no rows");
    d.nodes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    Vector w(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        check_width(t, r, 1 + m + (weighted ? 1 : 0));
        check_index(t, r);
        for (std::size_t i = 0; i < m; ++i)
            d.nodes(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = to_real(t.rows[r][1 + i], t.row_lines[r]);
        if (weighted) w[static_cast<Eigen::Index>(r)] = to_real(t.rows[r][1 + m], t.row_lines[r]);
    }
    if (weighted) d.weights = std::move(w);
    return d;
}

void write_ensemble(std::ostream& os, const DesignEnsemble& e) {
    os << "# pcecal ensemble\n# dim " << e.dim() << "\n# weights " << (e.weights() ? "yes" : "no")
       << "\n# columns: index";
    for (std::size_t i = 0; i < e.dim(); ++i) os << " xi_" << i + 1;
    if (e.weights()) os << " weight";
    os << " value tag\n";
    for (Eigen::Index q = 0; q < e.nodes().rows(); ++q) {
        os << q;
        for (Eigen::Index i = 0; i < e.nodes().cols(); ++i) os << ' ' << format_real(e.nodes()(q, i));
        if (e.weights()) os << ' ' << format_real((*e.weights())[q]);
        const auto& tag = e.tags()[static_cast<std::size_t>(q)];
        os << ' ' << format_real(e.values()[q]) << ' ' << (tag.empty() ? "-" : tag) << '\n';
    }
}

DesignEnsemble read_ensemble(std::istream& is) {
    const Table t = read_table(is, "ensemble");
    const std::size_t m = header_size(t, "dim");
    require(m >= 1, ErrorCode::parse, "ensemble dim must be >= 1");
    const bool weighted = header_flag(t, "weights");
    const std::size_t n = t.rows.size();
    require(n >= 1, ErrorCode::parse, "ensemble has no rows");
    RowMatrix nodes(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    Vector values(static_cast<Eigen::Index>(n));
    Vector w(static_cast<Eigen::Index>(n));
    std::vector<std::string> tags;
    const std::size_t width = 1 + m + (weighted ? 1 : 0) + 2;
    for (std::size_t r = 0; r < n; ++r) {
        check_width(t, r, width);
        check_index(t, r);
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t i = 0; i < m; ++i) nodes(row, static_cast<Eigen::Index>(i)) = to_real(t.rows[r][1 + i], t.row_lines[r]);
        std::size_t c = 1 + m;
        if (weighted) w[row] = to_real(t.rows[r][c++], t.row_lines[r]);
        values[row] = to_real(t.rows[r][c++], t.row_lines[r]);
        tags.push_back(t.rows[r][c] == "-" ? "" : t.rows[r][c]);
    }
    std::optional<Vector> weights;
    if (weighted) weights = std::move(w);
    return {std::move(nodes), std::move(values), std::move(weights), std::move(tags)};
}

void write_expansion(std::ostream& os, const PCExpansion& e) {
    const auto& b = e.basis();
    os << "# pcecal coefficients\n# dim " << b.dim() << "\n# order " << b.order()
       << "\n# basis legendre-graded-lex\n# method " << to_string(e.method()) << '\n';
    for (const auto& [k, v] : e.metadata()) os << "# meta " << k << " = " << v << '\n';
    os << "# columns: term";
    for (std::size_t i = 0; i < b.dim(); ++i) os << " alpha_" << i + 1;
    os << " coefficient\n";
    for (std::size_t k = 0; k < b.size(); ++k) {
        os << k;
        for (unsigned a : b.index(k)) os << ' ' << a;
        os << ' ' << format_real(e.coefficients()[static_cast<Eigen::Index>(k)]) << '\n';
    }
}

PCExpansion read_expansion(std::istream& is) {
    const Table t = read_table(is, "coefficients");
    const std::size_t m = header_size(t, "dim");
    require(m >= 1, ErrorCode::parse, "coefficient file dim must be >= 1");
    const std::size_t r = header_size(t, "order");
    if (need(t, "basis") != "legendre-graded-lex")
        fail(ErrorCode::parse, "unsupported basis family '" + t.header.at("basis") + "'");
    const FitMethod method = parse_fit_method(need(t, "method"));
    PCBasis basis(m, static_cast<unsigned>(r));
    require(t.rows.size() == basis.size(), ErrorCode::parse,
            "coefficient file has " + std::to_string(t.rows.size()) + " rows, basis needs " + std::to_string(basis.size()));
    Vector c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) {
        check_width(t, k, 1 + m + 1);
        check_index(t, k);
        const auto alpha = basis.index(k);
        for (std::size_t i = 0; i < m; ++i)
            if (to_int(t.rows[k][1 + i], t.row_lines[k]) != static_cast<long long>(alpha[i]))
                fail(ErrorCode::parse, "line " + std::to_string(t.row_lines[k]) + ": multi-index does not match graded ordering");
        c[static_cast<Eigen::Index>(k)] = to_real(t.rows[k][1 + m], t.row_lines[k]);
    }
    return {std::move(basis), std::move(c), method, t.meta};
}

void write_chain(std::ostream& os, const Chain& c) {
    os << "# pcecal chain\n# dim " << c.dim() << "\n# names";
    for (const auto& n : c.names) os << ' ' << n;
    os << "\n# seed " << c.seed << "\n# burn_in " << c.burn_in << "\n# iterations " << c.size()
       << "\n# acceptance_rate " << format_real(c.acceptance_rate) << "\n# proposal_scales";
    for (double s : c.proposal_scales) os << ' ' << format_real(s);
    os << "\n# columns: iteration";
    for (const auto& n : c.names) os << ' ' << n;
    os << " S log_posterior\n";
    for (std::size_t it = c.burn_in; it < c.size(); ++it) {
        const auto r = static_cast<Eigen::Index>(it);
        os << it;
        for (Eigen::Index i = 0; i < c.p.cols(); ++i) os << ' ' << format_real(c.p(r, i));
        os << ' ' << format_real(c.scale[r]) << ' ' << format_real(c.log_post[r]) << '\n';
    }
}

Chain read_chain(std::istream& is) {
    const Table t = read_table(is, "chain");
    const std::size_t m = header_size(t, "dim");
    Chain c;
    std::istringstream names(need(t, "names"));
    for (std::string n; names >> n;) c.names.push_back(n);
    require(c.names.size() == m, ErrorCode::parse, "chain names do not match dim");
    c.seed = static_cast<std::uint64_t>(to_int(need(t, "seed"), 0));
    c.acceptance_rate = to_real(need(t, "acceptance_rate"), 0);
    if (t.header.count("proposal_scales"))
        for (const auto& s : split(t.header.at("proposal_scales"))) c.proposal_scales.push_back(to_real(s, 0));
    const std::size_t n = t.rows.size();
    c.p.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    c.scale.resize(static_cast<Eigen::Index>(n));
    c.log_post.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        check_width(t, r, m + 3);
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t i = 0; i < m; ++i) c.p(row, static_cast<Eigen::Index>(i)) = to_real(t.rows[r][1 + i], t.row_lines[r]);
        c.scale[row] = to_real(t.rows[r][1 + m], t.row_lines[r]);
        c.log_post[row] = to_real(t.rows[r][2 + m], t.row_lines[r]);
    }
    return c;
}

void write_density(std::ostream& os, const Density& d, const std::string& label) {
    os << "# pcecal density\n";
    if (!label.empty()) os << "# variable " << label << '\n';
    os << "# bandwidth " << format_real(d.bandwidth) << "\n# columns: x density\n";
    for (std::size_t i = 0; i < d.grid.size(); ++i) os << format_real(d.grid[i]) << ' ' << format_real(d.density[i]) << '\n';
}

void write_curve(std::ostream& os, const Curve& c, const std::string& axis_label) {
    os << "# pcecal response-curve\n# axis " << axis_label << "\n# columns: xi E\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) os << format_real(c.x[i]) << ' ' << format_real(c.y[i]) << '\n';
}

void write_surface(std::ostream& os, const Surface& s, const std::string& label_i, const std::string& label_j) {
    os << "# pcecal response-surface\n# axes " << label_i << ' ' << label_j << "\n# columns: xi_i xi_j E\n";
    for (std::size_t a = 0; a < s.x.size(); ++a)
        for (std::size_t b = 0; b < s.y.size(); ++b)
            os << format_real(s.x[a]) << ' ' << format_real(s.y[b]) << ' '
               << format_real(s.z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
}

void write_spectrum(std::ostream& os, const std::vector<SpectrumEntry>& spectrum) {
    os << "# pcecal spectrum\n# columns: term degree abs_ratio\n";
    for (const auto& s : spectrum) os << s.term << ' ' << s.degree << ' ' << format_real(s.ratio) << '\n';
}

void write_cv_table(std::ostream& os, const BpdnReport& r) {
    os << "# pcecal cv\n# folds " << r.cv_errors.rows() << "\n# chosen_delta " << format_real(r.chosen_delta)
       << "\n# columns: delta_rel delta_train mean_validation_residual";
    for (Eigen::Index f = 0; f < r.cv_errors.rows(); ++f) os << " fold_" << f;
    os << '\n';
    for (std::size_t j = 0; j < r.cv_grid.size(); ++j) {
        os << format_real(r.cv_grid[j]) << ' ' << format_real(r.cv_train_deltas[j]) << ' ' << format_real(r.cv_mean_errors[j]);
        for (Eigen::Index f = 0; f < r.cv_errors.rows(); ++f)
            os << ' ' << format_real(r.cv_errors(f, static_cast<Eigen::Index>(j)));
        os << '\n';
    }
}

template <>
void save(const std::filesystem::path& path, const Design& v) { save_with(path, v, [](auto& os, const auto& x) { write_design(os, x); }); }
template <>
void save(const std::filesystem::path& path, const DesignEnsemble& v) { save_with(path, v, [](auto& os, const auto& x) { write_ensemble(os, x); }); }
template <>
void save(const std::filesystem::path& path, const PCExpansion& v) { save_with(path, v, [](auto& os, const auto& x) { write_expansion(os, x); }); }
template <>
void save(const std::filesystem::path& path, const Chain& v) { save_with(path, v, [](auto& os, const auto& x) { write_chain(os, x); }); }
template <>
void save(const std::filesystem::path& path, const Density& v) { save_with(path, v, [](auto& os, const auto& x) { write_density(os, x); }); }

Design load_design(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_design(is);
}
DesignEnsemble load_ensemble(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_ensemble(is);
}
PCExpansion load_expansion(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_expansion(is);
}
Chain load_chain(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_chain(is);
}

}  // namespace pcecal::io
