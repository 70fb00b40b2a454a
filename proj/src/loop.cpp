#include "qtm/loop.hpp"

#include <string>

namespace qtm {

namespace {

Mat sigma_plus() {
    Mat m = Mat::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

Mat sigma_minus() {
    Mat m = Mat::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

Mat q_sz(cd q, double c) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = cpow(q, c);
    m(1, 1) = cpow(q, -c);
    return m;
}

int eps_of(int j) { return j % 2 == 0 ? 1 : -1; }

// sum over k of coef_k * (prod of single-site factors); site(j, k) supplies
// the factor at site j for the k-th term
template <typename Coef, typename Site>
Mat staggered_sum(int N, Coef coef, Site site) {
    const long dim = 1L << N;
    Mat tot = Mat::Zero(dim, dim);
    for (int k = 1; k <= N; ++k) {
        Mat term = site(1, k);
        for (int j = 2; j <= N; ++j) term = kron(term, site(j, k));
        tot += coef(k) * term;
    }
    return tot;
}

} // namespace

LoopGenerators loop_generators(int N, cd q, cd w) {
    if (N > dense_limit())
        throw SizeError("loop_generators: N = " + std::to_string(N) +
                        " above the dense limit");
    const Mat id = Mat::Identity(2, 2);
    LoopGenerators g;
    g.e1 = staggered_sum(
        N, [&](int k) { return double(eps_of(k)) * cpow(q, (1 - eps_of(k)) / 2.0); },
        [&](int j, int k) -> Mat {
            if (j < k) return q_sz(q, eps_of(j));
            if (j == k) return eps_of(k) == 1 ? sigma_plus() : sigma_minus();
            return id;
        });
    g.f1 = staggered_sum(
        N, [&](int k) { return double(eps_of(k)) * cpow(q, (eps_of(k) - 1) / 2.0); },
        [&](int j, int k) -> Mat {
            if (j > k) return q_sz(q, -eps_of(j));
            if (j == k) return eps_of(k) == 1 ? sigma_minus() : sigma_plus();
            return id;
        });
    // omega exchange: conjugated q-strings, lowered/raised operators swapped,
    // and the affine node carries the spectral weight w^{-+eps_k}
    g.e0 = staggered_sum(
        N,
        [&](int k) {
            return double(eps_of(k)) * cpow(q, (1 - eps_of(k)) / 2.0) *
                   cpow(w, double(-eps_of(k)));
        },
        [&](int j, int k) -> Mat {
            if (j < k) return q_sz(q, -eps_of(j));
            if (j == k) return eps_of(k) == 1 ? sigma_minus() : sigma_plus();
            return id;
        });
    g.f0 = staggered_sum(
        N,
        [&](int k) {
            return double(eps_of(k)) * cpow(q, (eps_of(k) - 1) / 2.0) *
                   cpow(w, double(eps_of(k)));
        },
        [&](int j, int k) -> Mat {
            if (j > k) return q_sz(q, eps_of(j));
            if (j == k) return eps_of(k) == 1 ? sigma_plus() : sigma_minus();
            return id;
        });
    const Eigen::VectorXd sa = alternating_spin_diag(N);
    g.qh1 = Mat::Zero(1L << N, 1L << N);
    for (long i = 0; i < sa.size(); ++i) g.qh1(i, i) = cpow(q, 2.0 * sa(i));
    return g;
}

LoopGenerators loop_generators(const ModelParams& p) {
    return loop_generators(p.N, p.q, p.w);
}

cd q_factorial(int m, cd q) {
    cd f = 1.0;
    for (int k = 1; k <= m; ++k) f *= (cpow(q, k) - cpow(q, -k)) / (q - 1.0 / q);
    return f;
}

std::vector<Mat> divided_power(LoopGen which, int ellprime, const ModelParams& p,
                               const std::vector<double>& eps_list) {
    if (!p.at_root_of_unity())
        throw Error("divided_power: requires ell (root of unity)");
    if (ellprime < 1) throw Error("divided_power: ellprime must be >= 1");
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (eps_list[i] < 1e-7)
            throw Error("divided_power: eps below the 1e-7 floor");
        if (i > 0 && eps_list[i] >= eps_list[i - 1])
            throw Error("divided_power: eps_list must be strictly decreasing");
    }
    std::vector<Mat> seq;
    seq.reserve(eps_list.size());
    for (double eps : eps_list) {
        const cd qp = p.q * std::exp(cd(0.0, eps));
        LoopGenerators g = loop_generators(p.N, qp, p.w);
        const Mat* X = nullptr;
        switch (which) {
            case LoopGen::e1: X = &g.e1; break;
            case LoopGen::f1: X = &g.f1; break;
            case LoopGen::e0: X = &g.e0; break;
            case LoopGen::f0: X = &g.f0; break;
        }
        Mat P = *X;
        for (int m = 1; m < ellprime; ++m) {
            P = P * (*X);
            if (P.norm() > 1e12)
                throw NormOverflow("divided_power: intermediate norm above 1e12; "
                                   "check ellprime against the root order");
        }
        P /= q_factorial(ellprime, qp);
        if (P.norm() > 1e12)
            throw NormOverflow("divided_power: result norm above 1e12; "
                               "check ellprime against the root order");
        seq.push_back(std::move(P));
    }
    return seq;
}

} // namespace qtm
