#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qtm/polynomial.hpp"

namespace qtm {

struct SolutionFlags {
    bool reciprocal = false; // e_k^{+-} = e_{n-k}^{-+} / e_n^{-+}
    bool conjugate = false;  // e_k^{+-} = conj(e_k^{-+})
    bool cce = false;        // conj(e_k^+) = e_{n-k}^+ / e_n^+ (critical regime)
};

struct WronskianSolution {
    QPolynomial e_plus;
    QPolynomial e_minus;
    // scaled residual |F(u)| / max(1, |u|_inf^2); the scaling keeps the
    // retention test meaningful for solutions with large coefficients, where
    // the evaluation noise floor of F itself grows quadratically
    double residual = 0.0;
    SolutionFlags flags;
    std::uint64_t seed = 0;
    int start_index = -1; // -1: reached by symmetry closure or continuation
};

// Quadratic residual system F(u) with analytic Jacobian (bilinear in the
// unknowns). package() maps a converged unknown vector to a solution record.
// symmetry_image, when set, is an involution on unknown vectors whose images
// are again solutions; the solver closes its solution set under it, which
// reaches solutions whose own basin of attraction is vanishingly small.
struct QuadraticSystem {
    int n_unknowns = 0;
    int n_equations = 0;
    std::function<void(const Vec&, Vec&, Mat*)> eval;
    std::function<WronskianSolution(const Vec&)> package;
    std::function<Vec(const Vec&)> symmetry_image;
    std::vector<double> start_scale;   // per-unknown magnitude for random starts
    std::vector<int> unsupported_m;    // m where the binomial sum outruns the e-sum
    int expected_count = 0;            // algebraic solution count when known, else 0
};

// Full system in sector S_A: unknowns e_1^+..e_{n+}^+, e_1^-..e_{n-}^- with
// n_{+-} = n -+ S_A, equations m = 1..N. Square by construction.
QuadraticSystem assemble_full_system(const ModelParams& p, int sector);

// Reduced (reciprocal-constrained) system in the S_A = 0 sector: unknowns
// e_1^+..e_n^+, equations m = 1..N-1. Overdetermined; solved least-squares.
QuadraticSystem assemble_reduced_system(const ModelParams& p);

struct SolveConfig {
    int n_starts = 256;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int max_iter = 200;
    int jobs = 1;
    // when the system declares expected_count and random starts fall short,
    // top up the set by homotopy continuation (deterministic, no RNG)
    bool complete = true;
};

struct SolveResult {
    std::vector<WronskianSolution> solutions; // deduplicated, sorted
    int n_converged = 0;  // retained before dedup
    int n_failed = 0;     // starts that never reached tol
    int n_degenerate = 0; // degree-drop candidates, reported but not coerced
};

// Damped Gauss-Newton from deterministic pseudo-random starts. Retains
// scaled residual < tol, deduplicates, evaluates flags, closes the set under
// symmetry_image, and (when the system declares its count) tops up by
// continuation. Reproducible given seed and independent of worker count.
SolveResult solve_multistart(const QuadraticSystem& sys, const SolveConfig& cfg);

// Total-degree continuation on the leading square subsystem: start roots of
// u_k^2 = c_k are tracked to t = 1 along a gamma-rotated straight-line
// homotopy (RK2 predictor, hop-guarded Newton corrector, colliding or failed
// paths retracked at smaller steps, fallback gamma ladder). Endpoints are
// polished on the full system and residual-verified, so every returned
// solution is genuine regardless of tracking accidents. Deterministic.
SolveResult solve_homotopy(const QuadraticSystem& sys, const SolveConfig& cfg);

// coefficient-vector clustering at relative distance rel_tol; keeps the
// smallest-residual representative of each cluster
std::vector<WronskianSolution> dedup(std::vector<WronskianSolution> sols,
                                     double rel_tol = 1e-6);

void evaluate_flags(WronskianSolution& s, const ModelParams& p);

} // namespace qtm
