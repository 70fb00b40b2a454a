#pragma once

#include "qtm/linalg.hpp"
#include "qtm/params.hpp"

namespace qtm {

// Small dense operator on one (aux x site) factor pair. Entries are stored
// with the auxiliary index major: M(m*2 + s, mp*2 + sp).
struct LocalOperator {
    int d_aux = 2;
    int d_site = 2;
    Mat m;
};

// Six-vertex R-matrix with weights a = 1, b = (1-z)q/(1-z q^2),
// c = (1-q^2)/(1-z q^2), c' = c z. Throws PoleError within 1e-12 of z = q^{-2}.
LocalOperator r_matrix(cd z, const ModelParams& p);
LocalOperator r_matrix(cd z, cd q);

// (R(z)^{-1}) transposed in the second factor; equals [R_21(1/z)] transposed
// in the second factor. Used on the odd (conjugate-module) lattice rows.
LocalOperator r_dual(cd z, const ModelParams& p);

// Spin-(d-1)/2 evaluation representation, dimension d:
//   e|k> = [d-k]_q |k-1>,  f|k> = [k+1]_q |k+1>,  q^h|k> = q^{d-2k-1}|k>.
struct SpinRep {
    Mat e, f;
    Eigen::VectorXd hdiag;
};
SpinRep spin_rep(int d, const ModelParams& p);

// Lax operators in the spin-(d-1)/2 representation: the conventional L and
// the dual-module L*. The displayed 2x2 structure indexes the site factor;
// each block acts on the d-dimensional auxiliary space.
std::pair<LocalOperator, LocalOperator> l_ops(cd z, int d, const ModelParams& p);

// Q-operator Lax pair built on the highest-weight evaluation module with
// free parameter s (at r = 1):
//   raise  e0|k> = z|k+1>   (z is the local spectral argument of the factor)
//   lower  e1|k> = c_k|k-1>,  c_k = (s + 1 - q^{2k} - s q^{-2k})/(q - 1/q)^2
// aux_dim is ellprime at a root of unity (the module truncates there) or a
// cutoff K >= 2 at generic q.
std::pair<LocalOperator, LocalOperator> q_l_ops(cd z, cd s, int aux_dim,
                                                const ModelParams& p);

// lowering coefficient of the highest-weight module, c_0 = 0 by construction
cd rho_lower_coeff(int k, cd s, const ModelParams& p);

} // namespace qtm
