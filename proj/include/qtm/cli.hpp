#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtm/io.hpp"

namespace qtm {

// flag or combination the user got wrong; the message names the flag
struct UsageError : Error {
    using Error::Error;
};

// Everything a run depends on. The record is echoed into every output file,
// so a result can be regenerated from the file alone.
struct RunConfig {
    std::string command;   // spectrum | solve | verify | thermo | symmetry
    int N = 2;
    double gamma = 0.6283185307179586; // pi/5
    double beta = 1.0;
    double h = 0.4;
    double z_re = 1.0;
    double z_im = 0.0;
    std::optional<int> ell;
    std::string relation;  // verify only
    int starts = 256;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int jobs = 1;
    std::string out;       // empty: stdout
    std::string format = "json"; // json | csv (csv: spectrum and thermo only)
    std::vector<int> N_list = {4, 6, 8, 10, 12}; // thermo Trotter sweep
    int verbosity = 0;

    cd z() const { return cd(z_re, z_im); }
};

json run_config_json(const RunConfig& c);

// Parse a command line (without argv[0]). Throws UsageError on bad input.
// A help request returns command = "help" with the text in *help_text.
RunConfig parse_args(const std::vector<std::string>& args,
                     std::string* help_text = nullptr);

// Execute a parsed config: compute, serialize, write (atomically when --out
// is set, else to stdout). Returns the process exit code: 0 all checks
// passed, 1 failure, 2 reportable finding (largest eigenvalue unmatched, or
// a non-real dominant eigenvalue at z = 1).
int run(const RunConfig& c);

} // namespace qtm
