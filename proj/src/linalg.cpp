#include "qtm/linalg.hpp"

#include <algorithm>
#include <cstdlib>

namespace qtm {

Mat kron(const Mat& A, const Mat& B) {
    Mat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

Mat transpose_first4(const Mat& M) {
    Mat T(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    T(2 * a + b, 2 * c + d) = M(2 * c + b, 2 * a + d);
    return T;
}

Mat transpose_second4(const Mat& M) {
    Mat T(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    T(2 * a + b, 2 * c + d) = M(2 * a + d, 2 * c + b);
    return T;
}

Mat swap4() {
    Mat P = Mat::Zero(4, 4);
    P(0, 0) = P(3, 3) = 1.0;
    P(1, 2) = P(2, 1) = 1.0;
    return P;
}

Mat embed(const Mat& F, int k, int N, int daux) {
    const long dimq = 1L << N;
    const long dim = daux * dimq;
    Mat M = Mat::Zero(dim, dim);
    const int bp = N - k; // bit position of site k
    for (int m = 0; m < daux; ++m)
        for (int mp = 0; mp < daux; ++mp)
            for (int s = 0; s < 2; ++s)
                for (int sp = 0; sp < 2; ++sp) {
                    const cd val = F(m * 2 + s, mp * 2 + sp);
                    if (val == cd(0.0, 0.0)) continue;
                    for (long rest = 0; rest < (dimq >> 1); ++rest) {
                        const long low = rest & ((1L << bp) - 1);
                        const long high = rest >> bp;
                        const long i = (high << (bp + 1)) | (long(s) << bp) | low;
                        const long ip = (high << (bp + 1)) | (long(sp) << bp) | low;
                        M(m * dimq + i, mp * dimq + ip) += val;
                    }
                }
    return M;
}

Mat trace_aux(const Mat& M, const std::vector<cd>& weights, int N) {
    const long dimq = 1L << N;
    Mat out = Mat::Zero(dimq, dimq);
    for (size_t m = 0; m < weights.size(); ++m)
        out += weights[m] * M.block(m * dimq, m * dimq, dimq, dimq);
    return out;
}

bool eig_order(cd a, cd b) {
    double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-14 * std::max(ma, mb)) return ma > mb;
    return std::arg(a) < std::arg(b);
}

std::vector<cd> eig_sorted(const Mat& A) {
    Eigen::ComplexEigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success)
        throw Error("eigendecomposition failed");
    std::vector<cd> ev(es.eigenvalues().data(),
                       es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), eig_order);
    return ev;
}

cd rayleigh(const Mat& A, const Vec& v) {
    return v.dot(A * v) / v.dot(v);
}

double comm_rel(const Mat& A, const Mat& B) {
    double s = A.norm() * B.norm();
    if (s == 0.0) return 0.0;
    return (A * B - B * A).norm() / s;
}

Eigen::VectorXd alternating_spin_diag(int N) {
    const long dimq = 1L << N;
    Eigen::VectorXd sa(dimq);
    for (long i = 0; i < dimq; ++i) {
        double v = 0.0;
        for (int k = 1; k <= N; ++k) {
            const int bit = int((i >> (N - k)) & 1);
            const int sz = bit == 0 ? 1 : -1;
            v += (k % 2 == 0 ? 1.0 : -1.0) * sz;
        }
        sa(i) = v / 2.0;
    }
    return sa;
}

Eigen::VectorXd total_spin_diag(int N) {
    const long dimq = 1L << N;
    Eigen::VectorXd sz(dimq);
    for (long i = 0; i < dimq; ++i) {
        double v = 0.0;
        for (int k = 0; k < N; ++k) v += ((i >> k) & 1) == 0 ? 1.0 : -1.0;
        sz(i) = v / 2.0;
    }
    return sz;
}

std::map<int, std::vector<int>> sectors(int N) {
    Eigen::VectorXd sa = alternating_spin_diag(N);
    std::map<int, std::vector<int>> out;
    for (long i = 0; i < sa.size(); ++i)
        out[int(std::lround(sa(i)))].push_back(int(i));
    return out;
}

int dense_limit() {
    if (const char* env = std::getenv("QTM_DENSE_LIMIT")) {
        int v = std::atoi(env);
        if (v >= 2) return v;
    }
    return 12;
}

} // namespace qtm
