#include "qtm/thermo.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace qtm {

Mat build_hxxz(int L, const ModelParams& p, bool periodic) {
    if (L > 12)
        throw SizeError("build_hxxz: L = " + std::to_string(L) + " above 12");
    if (L < 2) throw Error("build_hxxz: need at least two sites");
    const long dim = 1L << L;
    const double Delta = ((p.q + 1.0 / p.q) / 2.0).real();
    Mat H = Mat::Zero(dim, dim);
    const int nbonds = periodic ? L : L - 1;
    for (long i = 0; i < dim; ++i) {
        double diag = 0.0;
        for (int k = 1; k <= nbonds; ++k) {
            const int kp = k % L + 1; // sigma_{L+1} = sigma_1
            const int bk = int(i >> (L - k)) & 1;
            const int bkp = int(i >> (L - kp)) & 1;
            // Delta (sz sz - 1)/2 vanishes on parallel pairs; on antiparallel
            // pairs it contributes -Delta and (sx sx + sy sy)/2 swaps them.
            if (bk == bkp) continue;
            diag -= Delta;
            const long j = i ^ ((1L << (L - k)) | (1L << (L - kp)));
            H(i, j) += 1.0;
        }
        double sz = 0.0;
        for (int k = 1; k <= L; ++k)
            sz += 1.0 - 2.0 * double((i >> (L - k)) & 1);
        H(i, i) += diag - 0.5 * p.h * sz;
    }
    return H;
}

Mat classical_t6v(cd z, int L, const ModelParams& p) {
    if (L > 10)
        throw SizeError("classical_t6v: L = " + std::to_string(L) + " above 10");
    if (L < 1) throw Error("classical_t6v: need at least one site");
    const Mat R = r_matrix(z, p).m;
    return detail::trace_monodromy(R, R, L, 2, {cd(1.0), cd(1.0)});
}

Mat hamiltonian_from_t(const ModelParams& p, int L) {
    if (p.h != 0.0)
        throw RegimeError("hamiltonian_from_t: the row transfer matrix carries "
                          "no field term; set h = 0");
    const Mat t1 = classical_t6v(cd(1.0), L, p);
    const auto lu = t1.partialPivLu();
    auto logder = [&](double s) -> Mat {
        const Mat dp = classical_t6v(cd(1.0 + s), L, p);
        const Mat dm = classical_t6v(cd(1.0 - s), L, p);
        return lu.solve((dp - dm) / (2.0 * s));
    };
    const Mat D1 = logder(1e-3);
    const Mat D2 = logder(5e-4);
    const Mat D = (4.0 * D2 - D1) / 3.0;
    const double disagree = (D2 - D1).norm() / std::max(1.0, D.norm());
    if (disagree > 1e-5)
        throw ConvergenceError(
            "hamiltonian_from_t: derivative steps disagree by " +
            std::to_string(disagree) + "; z = 1 may sit on a pole");
    return (p.q - 1.0 / p.q) * D;
}

cd largest_lambda(const ModelParams& p, cd z, PowerIterationLog* log) {
    if (p.N <= dense_limit()) {
        // the operator is block diagonal over alternating-spin sectors, so
        // diagonalize per block (eigenvalues only; the largest block at
        // N = 12 is 924 x 924, against 4096 for the full space)
        const Mat tau = build_qtm(z, p);
        cd best(0.0);
        for (const auto& [sa, idx] : sectors(p.N)) {
            const long m = long(idx.size());
            Mat block(m, m);
            for (long a = 0; a < m; ++a)
                for (long b = 0; b < m; ++b) block(a, b) = tau(idx[a], idx[b]);
            Eigen::ComplexEigenSolver<Mat> es(block, false);
            if (es.info() != Eigen::Success)
                throw ConvergenceError("largest_lambda: sector " +
                                       std::to_string(sa) + " failed to converge");
            for (long k = 0; k < m; ++k)
                if (eig_order(es.eigenvalues()(k), best)) best = es.eigenvalues()(k);
        }
        if (log) {
            *log = {};
            log->dense = true;
            log->estimates = {best};
        }
        return best;
    }
    return largest_lambda_power(p, z, log);
}

cd largest_lambda_power(const ModelParams& p, cd z, PowerIterationLog* log) {
    const long dim = 1L << p.N;
    // fixed seed: runs must be reproducible artifacts
    std::mt19937_64 rng(0x7c2a90d1b65f34e9ULL);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(dim);
    for (long i = 0; i < dim; ++i) v(i) = cd(g(rng), g(rng));
    v /= v.norm();
    if (log) *log = {};
    Vec Av(dim);
    cd est(0.0);
    int streak = 0;
    const int max_iter = 5000;
    for (int it = 1; it <= max_iter; ++it) {
        apply_qtm(z, p, v, Av);
        const cd next = v.dot(Av); // v has unit norm
        if (log) {
            log->estimates.push_back(next);
            log->iterations = it;
        }
        const double rel = std::abs(next - est) / std::max(1.0, std::abs(next));
        est = next;
        const double nn = Av.norm();
        if (nn == 0.0)
            throw PowerIterationStall("largest_lambda_power: iterate vanished");
        v = Av / nn;
        // three consecutive quiet sweeps, so a slow two-cycle cannot fake it
        streak = rel < 1e-10 ? streak + 1 : 0;
        if (streak >= 3) return est;
    }
    throw PowerIterationStall(
        "largest_lambda_power: no ratio convergence after " +
        std::to_string(max_iter) + " sweeps; dominant pair may be degenerate");
}

ThermoPoint free_energy(const ModelParams& base, const std::vector<int>& N_list,
                        int jobs) {
    const int m = int(N_list.size());
    if (m < 3)
        throw FitUnstable("free_energy: need at least three Trotter numbers, got " +
                          std::to_string(m));
    for (int N : N_list)
        if (N < 2 || N % 2 != 0)
            throw Error("free_energy: Trotter numbers must be positive even, got " +
                        std::to_string(N));

    ThermoPoint tp;
    tp.beta = base.beta;
    tp.h = base.h;
    tp.gamma = base.gamma;
    tp.N_list = N_list;
    tp.lambda_N.assign(m, cd(0.0));

    const int stride = std::max(1, std::min(jobs, m));
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&](int tid) {
        for (int i = tid; i < m; i += stride) {
            try {
                tp.lambda_N[i] = largest_lambda(base.with_N(N_list[i]));
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (stride == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < stride; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);

    Mat A(m, 3);
    Vec y(m);
    for (int i = 0; i < m; ++i) {
        const double x = 1.0 / (double(N_list[i]) * double(N_list[i]));
        A(i, 0) = 1.0;
        A(i, 1) = x;
        A(i, 2) = x * x;
        y(i) = std::log(tp.lambda_N[i]);
        tp.fit.max_lambda_imag =
            std::max(tp.fit.max_lambda_imag,
                     std::abs(tp.lambda_N[i].imag()) / std::abs(tp.lambda_N[i]));
    }
    const Eigen::Vector3cd c = A.colPivHouseholderQr().solve(y);
    tp.fit.coeffs = {c(0).real(), c(1).real(), c(2).real()};
    tp.fit.fit_residual = std::sqrt((A * c - y).squaredNorm() / double(m));
    tp.fit.extrap_imag = std::abs(c(0).imag());
    tp.f_extrapolated = -c(0).real() / base.beta;

    if (m >= 4) {
        tp.fit.loo_applicable = true;
        for (int drop = 0; drop < m; ++drop) {
            Mat Ad(m - 1, 3);
            Vec yd(m - 1);
            int r = 0;
            for (int i = 0; i < m; ++i) {
                if (i == drop) continue;
                Ad.row(r) = A.row(i);
                yd(r) = y(i);
                ++r;
            }
            const Eigen::Vector3cd cdrop = Ad.colPivHouseholderQr().solve(yd);
            tp.fit.loo_max_shift =
                std::max(tp.fit.loo_max_shift, std::abs(cdrop(0) - c(0)));
        }
        if (tp.fit.loo_max_shift > 1e-4)
            throw FitUnstable("free_energy: leave-one-out shift " +
                              std::to_string(tp.fit.loo_max_shift) +
                              " of the extrapolated ln Lambda exceeds 1e-4");
    }
    return tp;
}

cd trace_tau_power(const ModelParams& p, int L) {
    if (L < 1) throw Error("trace_tau_power: L must be positive");
    const Mat tau = build_qtm(cd(1.0), p);
    if (L == 1) return tau.trace();
    Mat M = tau;
    for (int k = 3; k <= L; ++k) M = tau * M;
    // Tr(tau M) without the last product
    return (tau.array() * M.transpose().array()).sum();
}

double partition_direct(int L, const ModelParams& p) {
    const Mat H = build_hxxz(L, p, true);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("partition_direct: eigensolver failed");
    double Z = 0.0;
    for (long i = 0; i < es.eigenvalues().size(); ++i)
        Z += std::exp(-p.beta * es.eigenvalues()(i));
    return Z;
}

cd trace_tau_extrapolated(int L, const ModelParams& base,
                          const std::vector<int>& N_list) {
    const size_t m = N_list.size();
    if (m < 2)
        throw Error("trace_tau_extrapolated: need at least two Trotter numbers");
    std::vector<cd> f(m);
    std::vector<double> x(m);
    for (size_t i = 0; i < m; ++i) {
        x[i] = 1.0 / double(N_list[i]);
        f[i] = trace_tau_power(base.with_N(N_list[i]), L);
    }
    // Neville tableau evaluated at 1/N = 0
    for (size_t j = 1; j < m; ++j)
        for (size_t i = m - 1; i >= j; --i)
            f[i] = (x[i - j] * f[i] - x[i] * f[i - 1]) / (x[i - j] - x[i]);
    return f.back();
}

} // namespace qtm
