#pragma once

#include <functional>
#include <optional>

#include "qtm/linalg.hpp"
#include "qtm/local_ops.hpp"
#include "qtm/params.hpp"

namespace qtm {

// Dense transfer matrix on the 2^N quantum space: the staggered product of
// R(zw) on even rows and the dual-module factor at w/z on odd rows, traced
// over the two-dimensional auxiliary space with twist weights {t, 1/t}.
Mat build_qtm(cd z, const ModelParams& p);

// Matrix-free action y = tau(z) x, O(N 2^N) time and O(2^N) memory.
void apply_qtm(cd z, const ModelParams& p, const Vec& x, Vec& y);

// Higher-spin transfer matrix with a d-dimensional auxiliary space and twist
// weights t^{d-1-2k}. d = 2 reproduces the transfer matrix up to the scalar
// fused_norm(z); d = 1 gives quantum_det(z) times the identity.
Mat build_fused(cd z, int d, const ModelParams& p);

// quantum determinant, the scalar d = 1 member of the hierarchy
cd quantum_det(cd z, const ModelParams& p);

// normalizer linking the d = 2 fused operator to the transfer matrix:
// build_fused(z, 2) = fused_norm(z) * build_qtm(z)
cd fused_norm(cd z, const ModelParams& p);

// Q-operator: staggered product of the highest-weight Lax pair, traced with
// weights t^{-2k-1}. trunc = 0 selects the exact root-of-unity module of
// dimension ellprime (requires ell set); trunc = K > 0 selects the generic
// truncated module, which needs t > 1 for the trace to converge.
Mat build_q_operator(cd z, cd s, const ModelParams& p, int trunc = 0);

struct SpinReversalReport {
    double reversal;  // conjugation by spin flip times w^{Sz} maps t to 1/t
    double transpose; // transpose relation at inverted arguments
};
SpinReversalReport spin_reversal_residuals(cd z, const ModelParams& p);

// Eigenpairs of a sector-block-diagonal operator, sorted by modulus
// descending (ties by argument). Computed per alternating-spin sector, so
// cross-sector degeneracies keep sector-pure eigenvectors.
struct SpectrumRecord {
    std::vector<cd> eigenvalues;
    std::vector<int> sector;       // S_A per eigenvalue
    std::vector<double> residuals; // ||op v - lambda v||_2, unit v
    Mat vectors;                   // eigenvectors as columns, full space
    cd z{};
    int N = 0;
};

SpectrumRecord eig(const Mat& op, cd z, const ModelParams& p,
                   std::optional<int> sector = std::nullopt);

namespace detail {
// monodromy builders with explicit (q, w, t), needed by the reversal checks
Mat build_qtm_raw(cd z, int N, cd q, cd w, cd t);
// weighted auxiliary trace of the staggered product of two local factors
Mat trace_monodromy(const Mat& Feven, const Mat& Fodd, int N, int daux,
                    const std::vector<cd>& weights);
} // namespace detail

} // namespace qtm
