#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "qtm/params.hpp"

namespace qtm {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat kron(const Mat& A, const Mat& B);

// transposes within one factor of a (2x2)-factored 4x4 operator
Mat transpose_first4(const Mat& M);
Mat transpose_second4(const Mat& M);

// factor-swap permutation on C^2 x C^2
Mat swap4();

// Embed a local operator F acting on (aux x site_k) into aux x (C^2)^{x N}.
// F is (daux*2) x (daux*2) with index m*2 + s, aux index major. Quantum basis
// is big-endian: site 1 = most significant bit, spin up = 0.
Mat embed(const Mat& F, int k, int N, int daux);

// Weighted partial trace over the auxiliary factor (leading dimension).
Mat trace_aux(const Mat& M, const std::vector<cd>& weights, int N);

// Eigenvalues sorted by modulus descending, ties broken by argument ascending.
std::vector<cd> eig_sorted(const Mat& A);

// ordering predicate behind eig_sorted, exposed for spectrum records
bool eig_order(cd a, cd b);

// (v^dag A v) / (v^dag v)
cd rayleigh(const Mat& A, const Vec& v);

// relative commutator norm ||AB - BA|| / (||A|| ||B||), Frobenius
double comm_rel(const Mat& A, const Mat& B);

// diagonal of the alternating spin S_A = (1/2) sum_k (-1)^k sigma^z_k
Eigen::VectorXd alternating_spin_diag(int N);

// diagonal of the total spin S^z = (1/2) sum_k sigma^z_k
Eigen::VectorXd total_spin_diag(int N);

// basis indices grouped by S_A value
std::map<int, std::vector<int>> sectors(int N);

// dense-size cap on the quantum space; QTM_DENSE_LIMIT overrides the default 12
int dense_limit();

} // namespace qtm
