#pragma once

#include "qtm/linalg.hpp"
#include "qtm/params.hpp"

namespace qtm {

// Chevalley-Serre generators on the staggered quantum space, with the
// alternating signs eps_k = (-1)^k baked in. qh1 is the Cartan element
// q^{H_1} = q^{2 S_A}. E0/F0 carry the spectral weights w^{-+eps_k} of the
// omega-exchanged node.
struct LoopGenerators {
    Mat e1, f1, e0, f0;
    Mat qh1;
};

LoopGenerators loop_generators(int N, cd q, cd w);
LoopGenerators loop_generators(const ModelParams& p);

enum class LoopGen { e1, f1, e0, f0 };

// q-factorial [m]_q! as a stable product of q-integers
cd q_factorial(int m, cd q);

// Divided power X(q')^{ellprime} / [ellprime]_{q'}! at q' = q e^{i eps} for
// each eps in the strictly decreasing eps_list; the caller extrapolates
// eps -> 0. Throws NormOverflow if an intermediate norm exceeds 1e12 (wrong
// ellprime for this root of unity).
std::vector<Mat> divided_power(LoopGen which, int ellprime, const ModelParams& p,
                               const std::vector<double>& eps_list);

} // namespace qtm
