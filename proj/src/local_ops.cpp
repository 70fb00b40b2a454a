#include "qtm/local_ops.hpp"

namespace qtm {

LocalOperator r_matrix(cd z, cd q) {
    const cd den = 1.0 - z * q * q;
    if (std::abs(den) < 1e-12)
        throw PoleError("r_matrix: z within 1e-12 of the pole at q^{-2}");
    const cd a = 1.0;
    const cd b = (1.0 - z) * q / den;
    const cd c = (1.0 - q * q) / den;
    const cd cp = c * z;
    Mat R = Mat::Zero(4, 4);
    R(0, 0) = a;
    R(3, 3) = a;
    R(1, 1) = b;
    R(2, 2) = b;
    R(1, 2) = c;
    R(2, 1) = cp;
    return {2, 2, R};
}

LocalOperator r_matrix(cd z, const ModelParams& p) { return r_matrix(z, p.q); }

namespace {

// assemble the (aux x site)-ordered matrix from 2x2-of-blocks site structure
Mat from_site_blocks(const Mat& L00, const Mat& L01, const Mat& L10, const Mat& L11) {
    const int d = int(L00.rows());
    Mat M = Mat::Zero(2 * d, 2 * d);
    auto put = [&](int s, int sp, const Mat& blk) {
        for (int m = 0; m < d; ++m)
            for (int mp = 0; mp < d; ++mp)
                M(m * 2 + s, mp * 2 + sp) = blk(m, mp);
    };
    put(0, 0, L00);
    put(0, 1, L01);
    put(1, 0, L10);
    put(1, 1, L11);
    return M;
}

} // namespace

LocalOperator r_dual(cd z, const ModelParams& p) {
    if (std::abs(z) < 1e-14)
        throw PoleError("r_dual: z = 0 has no inverse argument");
    Mat R = r_matrix(z, p).m;
    Eigen::FullPivLU<Mat> lu(R);
    if (!lu.isInvertible())
        throw Error("r_dual: R(z) is singular at this z");
    Mat direct = transpose_second4(lu.inverse());
    // the same operator from the crossing route, kept as a consistency guard
    Mat P = swap4();
    Mat crossed = transpose_second4(P * r_matrix(1.0 / z, p).m * P);
    if ((direct - crossed).norm() > 1e-12 * std::max(1.0, direct.norm()))
        throw Error("r_dual: inversion and crossing routes disagree");
    return {2, 2, direct};
}

SpinRep spin_rep(int d, const ModelParams& p) {
    if (d < 1) throw Error("spin_rep: dimension must be >= 1");
    const cd q = p.q;
    auto qint = [&](int m) { return (cpow(q, m) - cpow(q, -m)) / (q - 1.0 / q); };
    SpinRep r;
    r.e = Mat::Zero(d, d);
    r.f = Mat::Zero(d, d);
    for (int k = 1; k < d; ++k) r.e(k - 1, k) = qint(d - k);
    for (int k = 0; k + 1 < d; ++k) r.f(k + 1, k) = qint(k + 1);
    r.hdiag = Eigen::VectorXd(d);
    for (int k = 0; k < d; ++k) r.hdiag(k) = double(d - 2 * k - 1);
    return r;
}

std::pair<LocalOperator, LocalOperator> l_ops(cd z, int d, const ModelParams& p) {
    SpinRep rep = spin_rep(d, p);
    const cd q = p.q;
    auto qh = [&](double shift, double sign) {
        // diag of q^{sign (h + shift)/2}
        Mat D = Mat::Zero(d, d);
        for (int k = 0; k < d; ++k) D(k, k) = cpow(q, sign * (rep.hdiag(k) + shift) / 2.0);
        return D;
    };
    Mat qhp = qh(1.0, 1.0);   // q^{(h+1)/2}
    Mat qhm = qh(1.0, -1.0);  // q^{-(h+1)/2}
    Mat qhp_m = qh(-1.0, 1.0);  // q^{(h-1)/2}
    Mat qhm_m = qh(-1.0, -1.0); // q^{-(h-1)/2}

    Mat L = from_site_blocks(z * qhp - qhm,
                             z * (q - 1.0 / q) * (qhp * rep.f),
                             (q - 1.0 / q) * (rep.e * qhm),
                             z * qhm_m - qhp_m);
    Mat Ls = from_site_blocks(z * qhm - qhp,
                              (1.0 / q - q) * (rep.e * qhm),
                              z * (1.0 / q - q) * (qhp * rep.f),
                              z * qhp_m - qhm_m);
    return {{d, 2, L}, {d, 2, Ls}};
}

cd rho_lower_coeff(int k, cd s, const ModelParams& p) {
    const cd q = p.q;
    return (s + 1.0 - cpow(q, 2 * k) - s * cpow(q, -2 * k)) / ((q - 1.0 / q) * (q - 1.0 / q));
}

std::pair<LocalOperator, LocalOperator> q_l_ops(cd z, cd s, int aux_dim,
                                                const ModelParams& p) {
    if (aux_dim < 2)
        throw InvalidCutoff("q_l_ops: auxiliary dimension must be >= 2, got " +
                            std::to_string(aux_dim));
    const cd q = p.q;
    const int K = aux_dim;
    Mat L = Mat::Zero(2 * K, 2 * K);
    Mat Ls = Mat::Zero(2 * K, 2 * K);
    for (int k = 0; k < K; ++k) {
        L(2 * k + 0, 2 * k + 0) = z * s * cpow(q, -k) - cpow(q, k);
        L(2 * k + 1, 2 * k + 1) = z * cpow(q, k + 1) - cpow(q, -k - 1);
        Ls(2 * k + 0, 2 * k + 0) = z * cpow(q, k) - cpow(q, -k);
        Ls(2 * k + 1, 2 * k + 1) = z * s * cpow(q, -k - 1) - cpow(q, k + 1);
    }
    // raising (e0) entries carry the factor's own spectral argument z; the
    // module top is simply absent at k = aux_dim - 1, which at a root of
    // unity is the exact truncation of the evaluation module
    for (int k = 0; k + 1 < K; ++k) {
        const cd c = rho_lower_coeff(k + 1, s, p);
        L(2 * (k + 1) + 0, 2 * k + 1) = z * (q - 1.0 / q) * cpow(q, -k - 1);
        L(2 * k + 1, 2 * (k + 1) + 0) = (q - 1.0 / q) * cpow(q, k + 1) * c;
        Ls(2 * k + 0, 2 * (k + 1) + 1) = (1.0 / q - q) * cpow(q, k + 1) * c;
        Ls(2 * (k + 1) + 1, 2 * k + 0) = z * (1.0 / q - q) * cpow(q, -k - 1);
    }
    return {{K, 2, L}, {K, 2, Ls}};
}

} // namespace qtm
