#pragma once

#include "pcecal/bpdn.hpp"
#include "pcecal/calibration.hpp"
#include "pcecal/ensemble.hpp"
#include "pcecal/kde.hpp"
#include "pcecal/nisp.hpp"
#include "pcecal/surrogate.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

// Self-describing whitespace-delimited text files. Every file starts with a
// "# pcecal <kind>" line, followed by "# key value" header lines and data rows.
// Reals are written with 17 significant digits so files round-trip bitwise.

namespace pcecal::io {

void write_design(std::ostream& os, const Design& design);
[[nodiscard]] Design read_design(std::istream& is);

void write_ensemble(std::ostream& os, const DesignEnsemble& ensemble);
[[nodiscard]] DesignEnsemble read_ensemble(std::istream& is);

/// Header: dim, order, basis legendre-graded-lex, method, "# meta key = value" lines.
/// Rows: term index, multi-index, coefficient.
void write_expansion(std::ostream& os, const PCExpansion& expansion);
[[nodiscard]] PCExpansion read_expansion(std::istream& is);

/// Rows from chain.burn_in on: iteration, physical parameters, S, log-posterior.
void write_chain(std::ostream& os, const Chain& chain);
/// The returned chain holds only the stored rows; burn_in is reset to 0.
[[nodiscard]] Chain read_chain(std::istream& is);

void write_density(std::ostream& os, const Density& density, const std::string& label = "");
void write_curve(std::ostream& os, const Curve& curve, const std::string& axis_label);
void write_surface(std::ostream& os, const Surface& surface, const std::string& label_i, const std::string& label_j);
void write_spectrum(std::ostream& os, const std::vector<SpectrumEntry>& spectrum);
void write_cv_table(std::ostream& os, const BpdnReport& report);

/// Path overloads; failures to open raise ErrorCode::io.
template <class T>
void save(const std::filesystem::path& path, const T& value);
[[nodiscard]] Design load_design(const std::filesystem::path& path);
[[nodiscard]] DesignEnsemble load_ensemble(const std::filesystem::path& path);
[[nodiscard]] PCExpansion load_expansion(const std::filesystem::path& path);
[[nodiscard]] Chain load_chain(const std::filesystem::path& path);

[[nodiscard]] std::string format_real(double v);

}  // namespace pcecal::io
