#pragma once

#include <vector>

#include "qtm/transfer.hpp"

namespace qtm {

// Diagnostics of the quadratic fit of ln Lambda_N against 1/N^2.
struct FitDiagnostics {
    std::vector<double> coeffs;   // p(x) = c0 + c1 x + c2 x^2, x = 1/N^2 (real parts)
    double fit_residual = 0.0;    // rms residual of the least-squares fit
    double loo_max_shift = 0.0;   // max |shift of extrapolated ln Lambda| over leave-one-out refits
    bool loo_applicable = false;  // needs at least 4 points, else the fit has no redundancy
    double extrap_imag = 0.0;     // |Im ln Lambda_infty|, should stay below 1e-9
    double max_lambda_imag = 0.0; // max_N |Im lambda_N| / |lambda_N| at z = 1
};

struct ThermoPoint {
    double beta = 1.0;
    double h = 0.0;
    double gamma = 0.0;
    std::vector<int> N_list;
    std::vector<cd> lambda_N;
    double f_extrapolated = 0.0; // -(1/beta) * extrapolated ln Lambda
    FitDiagnostics fit;
};

// Spin-chain Hamiltonian on L sites,
//   (1/2) sum_k [sx sx + sy sy + Delta (sz sz - 1)] - (h/2) sum_k sz,
// with Delta = (q + 1/q)/2. Periodic wraps the bond (L, 1); at L = 2 the
// wrap doubles the single bond, which is what the index convention
// sigma_{L+1} = sigma_1 produces. Throws SizeError above L = 12.
Mat build_hxxz(int L, const ModelParams& p, bool periodic = true);

// Row-to-row six-vertex transfer matrix on L sites,
// Tr_0 R_{0L}(z) ... R_{01}(z), plain auxiliary trace. L <= 10.
Mat classical_t6v(cd z, int L, const ModelParams& p);

// (q - 1/q) t(1)^{-1} z d/dz t(z) at z = 1, the spin-chain Hamiltonian
// generated by the row transfer matrix. Central differences at steps 1e-3
// and 5e-4 combined by one Richardson step; throws ConvergenceError when the
// two step sizes disagree beyond 1e-5 relative (derivative-step failure).
// Requires h = 0: the row matrix carries no field term.
Mat hamiltonian_from_t(const ModelParams& p, int L);

struct PowerIterationLog {
    std::vector<cd> estimates; // Rayleigh quotient per sweep
    int iterations = 0;
    bool dense = false;        // solved by full diagonalization instead
};

// Largest-modulus eigenvalue of the transfer matrix at z. Dense
// diagonalization up to dense_limit(), matrix-free power iteration above.
cd largest_lambda(const ModelParams& p, cd z = cd(1.0, 0.0),
                  PowerIterationLog* log = nullptr);

// Matrix-free path regardless of N: power iteration through apply_qtm with
// ratio convergence 1e-10 held for three consecutive sweeps. Throws
// PowerIterationStall when the estimate keeps moving (degenerate dominant
// pair); the per-sweep estimates land in the log for post-mortems.
cd largest_lambda_power(const ModelParams& p, cd z = cd(1.0, 0.0),
                        PowerIterationLog* log = nullptr);

// Free energy per site: ln Lambda_N over N_list fitted by a quadratic
// polynomial in 1/N^2 and extrapolated to N -> infinity,
// f = -(1/beta) ln Lambda_infty. base.N is ignored; every entry of N_list
// must be even and there must be at least three of them. Throws FitUnstable
// when a leave-one-out refit shifts the extrapolated value by more than
// 1e-4. Independent N points run on up to `jobs` threads.
ThermoPoint free_energy(const ModelParams& base, const std::vector<int>& N_list,
                        int jobs = 1);

// Tr tau(z = 1; w_N)^L, the Trotter side of the partition-function identity.
// The trace closes the product cyclically, so only L - 2 dense products are
// formed.
cd trace_tau_power(const ModelParams& p, int L);

// Direct side: Tr exp(-beta H) at finite L, through the symmetric
// eigendecomposition of the (Hermitian) Hamiltonian.
double partition_direct(int L, const ModelParams& p);

// Polynomial extrapolation of Tr tau^L through the given Trotter numbers,
// evaluated at 1/N = 0. The observed convergence of the full trace is ~1/N
// (slower than the largest eigenvalue), hence the variable 1/N here.
cd trace_tau_extrapolated(int L, const ModelParams& base,
                          const std::vector<int>& N_list);

} // namespace qtm
