#pragma once

#include <string>

#include "json.hpp"
#include "qtm/thermo.hpp"
#include "qtm/verify.hpp"

namespace qtm {

// insertion-ordered so emitted documents read in declaration order; dumping
// is deterministic either way, which the rerun-identical contract needs
using json = nlohmann::ordered_json;

// stamped into every emitted document; bump on breaking layout changes
extern const char* const schema_version;

// complex numbers serialize as [re, im], never as strings
json complex_json(cd v);
json coeff_array(const std::vector<cd>& e);

json to_json(const QPolynomial& q);
json to_json(const WronskianSolution& s);
json to_json(const SpectrumRecord& r); // eigenvalues, sectors, residuals; no vectors
json to_json(const RelationReport& r);
json to_json(const ThermoPoint& t);

// write-to-temp-then-rename in the target directory, so readers never see a
// half-written file
void write_text_atomic(const std::string& path, const std::string& text);

// CSV emitters. thermo: one row per Trotter number with the extrapolated
// values repeated, columns N, Re(lambda), Im(lambda), ln_lambda,
// f_extrapolated, fit_residual. spectrum: index, sector, Re, Im, residual.
std::string thermo_csv(const ThermoPoint& t);
std::string spectrum_csv(const SpectrumRecord& r);

} // namespace qtm
