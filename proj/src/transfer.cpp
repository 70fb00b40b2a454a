#include "qtm/transfer.hpp"

#include <cmath>
#include <string>

namespace qtm {

namespace detail {

Mat trace_monodromy(const Mat& Feven, const Mat& Fodd, int N, int daux,
                    const std::vector<cd>& weights) {
    if (int(weights.size()) != daux)
        throw Error("trace_monodromy: weight count must match auxiliary dimension");
    // two generations of daux^2 blocks of size 2^k x 2^k live at once
    const double block_bytes =
        2.0 * double(daux) * double(daux) * std::pow(4.0, N) * 16.0;
    if (block_bytes <= 3.0 * double(1L << 30)) {
        // Grow the monodromy site by site through its auxiliary block
        // structure. P[a][b] is the (a,b) auxiliary block of the product over
        // the first k sites; appending site k+1 contracts one auxiliary index
        // with the 2x2 site block f[a][c] of that site's local factor. Site k
        // enters at the least significant bit, so site 1 ends up most
        // significant after all N steps.
        std::vector<std::vector<Mat>> P(daux, std::vector<Mat>(daux));
        for (int a = 0; a < daux; ++a)
            for (int b = 0; b < daux; ++b)
                P[a][b] = a == b ? Mat(Mat::Identity(1, 1)) : Mat(Mat::Zero(1, 1));
        for (int k = 1; k <= N; ++k) {
            const Mat& F = k % 2 == 0 ? Feven : Fodd;
            const long n = P[0][0].rows();
            std::vector<std::vector<Mat>> Pn(
                daux, std::vector<Mat>(daux, Mat::Zero(2 * n, 2 * n)));
            for (int a = 0; a < daux; ++a)
                for (int c = 0; c < daux; ++c)
                    for (int s = 0; s < 2; ++s)
                        for (int sp = 0; sp < 2; ++sp) {
                            const cd v = F(a * 2 + s, c * 2 + sp);
                            if (v == cd(0.0, 0.0)) continue;
                            for (int b = 0; b < daux; ++b)
                                Pn[a][b](Eigen::seqN(s, n, 2), Eigen::seqN(sp, n, 2)) +=
                                    v * P[c][b];
                        }
            P.swap(Pn);
        }
        Mat out = weights[0] * P[0][0];
        for (int a = 1; a < daux; ++a) out += weights[a] * P[a][a];
        return out;
    }
    // dense-product fallback: wide auxiliary space at small N
    const long dim = long(daux) << N;
    if (dim <= 4096) {
        Mat M = embed(Fodd, 1, N, daux);
        for (int k = 2; k <= N; ++k)
            M = embed(k % 2 == 0 ? Feven : Fodd, k, N, daux) * M;
        return trace_aux(M, weights, N);
    }
    throw SizeError("trace_monodromy: N = " + std::to_string(N) + ", d_aux = " +
                    std::to_string(daux) + " exceeds both dense paths");
}

Mat build_qtm_raw(cd z, int N, cd q, cd w, cd t) {
    const Mat Fe = r_matrix(z * w, q).m;
    const Mat P = swap4();
    const Mat Fo = P * transpose_first4(r_matrix(w / z, q).m) * P;
    return trace_monodromy(Fe, Fo, N, 2, {t, 1.0 / t});
}

} // namespace detail

Mat build_qtm(cd z, const ModelParams& p) {
    if (p.N > dense_limit())
        throw SizeError("build_qtm: N = " + std::to_string(p.N) +
                        " above the dense limit; use apply_qtm");
    return detail::build_qtm_raw(z, p.N, p.q, p.w, cd(p.t));
}

namespace {

// in-place action of a local factor on the (aux=2) x quantum vector
void apply_factor(const cd F[16], int k, int N, Vec& V) {
    const long dimq = 1L << N;
    const int bp = N - k;
    const long bit = 1L << bp;
    for (long rest = 0; rest < (dimq >> 1); ++rest) {
        const long low = rest & (bit - 1);
        const long high = rest >> bp;
        const long i0 = (high << (bp + 1)) | low;
        const long i1 = i0 | bit;
        const cd in[4] = {V(i0), V(i1), V(dimq + i0), V(dimq + i1)};
        cd out[4] = {};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) out[r] += F[r * 4 + c] * in[c];
        V(i0) = out[0];
        V(i1) = out[1];
        V(dimq + i0) = out[2];
        V(dimq + i1) = out[3];
    }
}

} // namespace

void apply_qtm(cd z, const ModelParams& p, const Vec& x, Vec& y) {
    const int N = p.N;
    const long dimq = 1L << N;
    if (x.size() != dimq)
        throw SizeError("apply_qtm: vector length must be 2^N");
    const Mat Re = r_matrix(z * p.w, p.q).m;
    const Mat P = swap4();
    const Mat Ro = P * transpose_first4(r_matrix(p.w / z, p.q).m) * P;
    cd Fe[16], Fo[16];
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            Fe[r * 4 + c] = Re(r, c);
            Fo[r * 4 + c] = Ro(r, c);
        }
    const cd weights[2] = {cd(p.t), cd(1.0 / p.t)};
    y = Vec::Zero(dimq);
    Vec V(2 * dimq);
    for (int b = 0; b < 2; ++b) {
        V.setZero();
        V.segment(b * dimq, dimq) = x;
        for (int k = 1; k <= N; ++k)
            apply_factor(k % 2 == 0 ? Fe : Fo, k, N, V);
        y += weights[b] * V.segment(b * dimq, dimq);
    }
}

Mat build_fused(cd z, int d, const ModelParams& p) {
    if (d < 1) throw Error("build_fused: auxiliary dimension must be >= 1");
    if (p.N > dense_limit())
        throw SizeError("build_fused: N above the dense limit");
    if (d == 1)
        return quantum_det(z, p) * Mat::Identity(1L << p.N, 1L << p.N);
    const Mat Le = l_ops(z * p.w, d, p).first.m;
    const Mat Lo = l_ops(z / p.w, d, p).second.m;
    std::vector<cd> weights(d);
    for (int k = 0; k < d; ++k) weights[k] = std::pow(p.t, double(d - 1 - 2 * k));
    return detail::trace_monodromy(Le, Lo, p.N, d, weights);
}

cd quantum_det(cd z, const ModelParams& p) {
    const cd a = z * p.w * p.q - 1.0;
    const cd b = z / (p.w * p.q) - 1.0;
    return cpow(a, p.n) * cpow(b, p.n);
}

cd fused_norm(cd z, const ModelParams& p) {
    const cd a = z * p.w * p.q - 1.0 / p.q;
    const cd b = z / (p.w * p.q) - p.q;
    return cpow(a, p.n) * cpow(b, p.n);
}

Mat build_q_operator(cd z, cd s, const ModelParams& p, int trunc) {
    if (p.N > dense_limit())
        throw SizeError("build_q_operator: N above the dense limit");
    int K;
    if (trunc == 0) {
        if (!p.at_root_of_unity())
            throw Error("build_q_operator: exact module needs ell; pass a cutoff "
                        "for generic q");
        K = p.ellprime;
    } else {
        K = trunc;
        if (p.t <= 1.0)
            throw RegimeError("build_q_operator: truncated trace needs h > 0 "
                              "so the weights t^{-2k-1} decay");
        const double tail = std::pow(p.t, -2.0 * K);
        if (tail >= 1e-12)
            throw ConvergenceError(
                "build_q_operator: cutoff " + std::to_string(K) +
                " leaves trace tail " + std::to_string(tail) +
                "; raise the cutoff");
    }
    const Mat Lq = q_l_ops(z * p.w, s, K, p).first.m;
    const Mat Lqs = q_l_ops(z / p.w, s, K, p).second.m;
    std::vector<cd> weights(K);
    for (int k = 0; k < K; ++k) weights[k] = std::pow(p.t, double(-2 * k - 1));
    return detail::trace_monodromy(Lq, Lqs, p.N, K, weights);
}

SpinReversalReport spin_reversal_residuals(cd z, const ModelParams& p) {
    if (p.N > dense_limit())
        throw SizeError("spin_reversal_residuals: N above the dense limit");
    const int N = p.N;
    const long dimq = 1L << N;
    const cd q = p.q, w = p.w;
    const cd t = cd(p.t);

    SpinReversalReport rep{};
    const Mat A = detail::build_qtm_raw(z, N, q, w, t);

    // reversal: conjugation by (spin flip) followed by w^{Sz} sends t to 1/t
    {
        const Mat B = detail::build_qtm_raw(z, N, q, w, 1.0 / t);
        const Eigen::VectorXd sz = total_spin_diag(N);
        const long mask = dimq - 1;
        Mat UAU = Mat::Zero(dimq, dimq);
        // U = W F with W = diag(w^{Sz}), F|i> = |~i>; UAU(i,j) =
        // w^{Sz_i} A(~i, ~j) w^{Sz_{~j}} and Sz(~j) = -Sz(j)
        for (long i = 0; i < dimq; ++i)
            for (long j = 0; j < dimq; ++j)
                UAU(i, j) = cpow(w, sz(i)) * A((~i) & mask, (~j) & mask) *
                            cpow(w, -sz(j));
        rep.reversal = (UAU - B).norm() / B.norm();
    }

    // transpose relation: at inverted (z, w, t) the transfer matrix equals its
    // q^{Sz}-conjugated transpose at shifted w, up to scalar b-weights
    {
        const Mat lhs = detail::build_qtm_raw(1.0 / z, N, q, 1.0 / w, 1.0 / t);
        const Mat T = detail::build_qtm_raw(z, N, q, w / (q * q), t);
        auto bwt = [&](cd y) { return (1.0 - y) * q / (1.0 - y * q * q); };
        const cd scale =
            cpow(bwt(z * w / (q * q)), p.n) * cpow(bwt(w / (q * q * z)), p.n);
        const Eigen::VectorXd sz = total_spin_diag(N);
        Mat rhs(dimq, dimq);
        for (long i = 0; i < dimq; ++i)
            for (long j = 0; j < dimq; ++j)
                rhs(i, j) = cpow(q, -sz(i)) * T(j, i) * cpow(q, sz(j)) / scale;
        rep.transpose = (lhs - rhs).norm() / lhs.norm();
    }
    return rep;
}

SpectrumRecord eig(const Mat& op, cd z, const ModelParams& p,
                   std::optional<int> sector) {
    const long dimq = op.rows();
    if (op.cols() != dimq || dimq != (1L << p.N))
        throw SizeError("eig: operator dimension does not match N");
    struct Pair {
        cd lambda;
        int sa;
        double res;
        Vec v;
    };
    std::vector<Pair> pairs;
    for (const auto& [sa, idx] : sectors(p.N)) {
        if (sector && *sector != sa) continue;
        const long m = long(idx.size());
        Mat block(m, m);
        for (long a = 0; a < m; ++a)
            for (long b = 0; b < m; ++b) block(a, b) = op(idx[a], idx[b]);
        Eigen::ComplexEigenSolver<Mat> es(block, true);
        if (es.info() != Eigen::Success)
            throw ConvergenceError("eig: sector " + std::to_string(sa) +
                                   " failed to converge");
        for (long k = 0; k < m; ++k) {
            Pair pr;
            pr.lambda = es.eigenvalues()(k);
            pr.sa = sa;
            pr.v = Vec::Zero(dimq);
            for (long a = 0; a < m; ++a) pr.v(idx[a]) = es.eigenvectors()(a, k);
            pr.v /= pr.v.norm();
            pr.res = (op * pr.v - pr.lambda * pr.v).norm();
            pairs.push_back(std::move(pr));
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return eig_order(a.lambda, b.lambda); });
    SpectrumRecord rec;
    rec.z = z;
    rec.N = p.N;
    rec.vectors = Mat(dimq, long(pairs.size()));
    for (size_t k = 0; k < pairs.size(); ++k) {
        rec.eigenvalues.push_back(pairs[k].lambda);
        rec.sector.push_back(pairs[k].sa);
        rec.residuals.push_back(pairs[k].res);
        rec.vectors.col(long(k)) = pairs[k].v;
    }
    return rec;
}

} // namespace qtm
