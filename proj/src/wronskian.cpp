#include "qtm/wronskian.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

namespace qtm {

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * double(n - i) / double(i + 1);
    return b;
}

// binomial side of the Wronskian system, sum_{k+l=m} C(n,k)C(n,l)(wq)^{k-l}
cd binomial_sum(int m, int n, cd wq) {
    cd b = 0.0;
    for (int k = std::max(0, m - n); k <= std::min(m, n); ++k)
        b += binom(n, k) * binom(n, m - k) * cpow(wq, double(2 * k - m));
    return b;
}

double coeff_scale(const std::vector<cd>& e) {
    double s = 1.0;
    for (const cd& c : e) s = std::max(s, std::abs(c));
    return s;
}

} // namespace

void evaluate_flags(WronskianSolution& s, const ModelParams& p) {
    const int n = p.n;
    const auto& ep = s.e_plus.e;
    const auto& em = s.e_minus.e;
    s.flags = {};
    if (int(ep.size()) != n + 1 || int(em.size()) != n + 1) return;
    const double scale = std::max(coeff_scale(ep), coeff_scale(em));
    double drec = 0.0, dcc = 0.0, dcce = 0.0;
    for (int k = 0; k <= n; ++k) {
        drec = std::max(drec, std::abs(ep[k] - em[n - k] / em[n]));
        drec = std::max(drec, std::abs(em[k] - ep[n - k] / ep[n]));
        dcc = std::max(dcc, std::abs(ep[k] - std::conj(em[k])));
        dcce = std::max(dcce, std::abs(std::conj(ep[k]) - ep[n - k] / ep[n]));
    }
    s.flags.reciprocal = drec <= 1e-8 * scale;
    s.flags.conjugate = dcc <= 1e-8 * scale;
    s.flags.cce = p.regime == Regime::critical && dcce <= 1e-8 * scale;
}

QuadraticSystem assemble_full_system(const ModelParams& p, int sector) {
    if (std::abs(p.t - 1.0) < 1e-14)
        throw RegimeError("full Wronskian system needs t != 1 (h != 0)");
    const int n = p.n;
    const int np = n - sector, nm = n + sector;
    if (np < 0 || nm < 0)
        throw Error("sector |S_A| must be <= n, got " + std::to_string(sector));
    const cd q = p.q;
    const cd x = p.t * cpow(q, double(-sector));
    const cd denom = x - 1.0 / x;
    if (std::abs(denom) < 1e-14)
        throw RegimeError("Wronskian prefactor vanishes: x - 1/x = 0");
    const cd wq = p.w * q;
    const int N = p.N;

    // A(k,l) multiplies e_k^+ e_l^-
    auto A = [=](int k, int l) {
        return (x * cpow(q, double(l - k)) - cpow(q, double(k - l)) / x) / denom;
    };
    std::vector<cd> b(N + 1);
    for (int m = 1; m <= N; ++m) b[m] = binomial_sum(m, n, wq);

    QuadraticSystem sys;
    sys.n_unknowns = np + nm;
    sys.n_equations = N;
    for (int m = 1; m <= N; ++m) {
        // the binomial window [max(0,m-n), min(m,n)] can outrun the
        // e-polynomial support in sectors with S_A != 0; report those m
        if (std::min(m, n) > std::min(m, np) || std::max(0, m - n) < std::max(0, m - nm))
            sys.unsupported_m.push_back(m);
    }
    sys.eval = [=](const Vec& u, Vec& F, Mat* J) {
        std::vector<cd> ep(np + 1), em(nm + 1);
        ep[0] = 1.0;
        em[0] = 1.0;
        for (int k = 1; k <= np; ++k) ep[k] = u(k - 1);
        for (int l = 1; l <= nm; ++l) em[l] = u(np + l - 1);
        F.resize(N);
        if (J) J->setZero(N, np + nm);
        for (int m = 1; m <= N; ++m) {
            cd acc = -b[m];
            for (int k = std::max(0, m - nm); k <= std::min(m, np); ++k)
                acc += A(k, m - k) * ep[k] * em[m - k];
            F(m - 1) = acc;
            if (J) {
                for (int j = 1; j <= np; ++j)
                    if (m - j >= 0 && m - j <= nm)
                        (*J)(m - 1, j - 1) = A(j, m - j) * em[m - j];
                for (int j = 1; j <= nm; ++j)
                    if (m - j >= 0 && m - j <= np)
                        (*J)(m - 1, np + j - 1) += A(m - j, j) * ep[m - j];
            }
        }
    };
    ModelParams pc = p;
    sys.package = [=](const Vec& u) {
        WronskianSolution s;
        s.e_plus.e.assign(np + 1, cd(1.0));
        s.e_minus.e.assign(nm + 1, cd(1.0));
        for (int k = 1; k <= np; ++k) s.e_plus.e[k] = u(k - 1);
        for (int l = 1; l <= nm; ++l) s.e_minus.e[l] = u(np + l - 1);
        s.e_plus.sector = s.e_minus.sector = sector;
        s.e_plus.kind = QKind::plus;
        s.e_minus.kind = QKind::minus;
        evaluate_flags(s, pc);
        return s;
    };
    sys.start_scale.resize(np + nm);
    const double awq = std::abs(wq);
    for (int k = 1; k <= np; ++k)
        sys.start_scale[k - 1] =
            std::max(binom(np, k), 1.0) * std::pow(awq, std::abs(k - np / 2.0));
    for (int l = 1; l <= nm; ++l)
        sys.start_scale[np + l - 1] =
            std::max(binom(nm, l), 1.0) * std::pow(awq, std::abs(l - nm / 2.0));
    if (sector == 0) {
        // conjugation maps the S_A = 0 solution set onto itself:
        // (e^+, e^-) -> (conj(e^-), conj(e^+))
        sys.symmetry_image = [np, nm](const Vec& u) {
            Vec v(np + nm);
            for (int k = 1; k <= np; ++k) v(k - 1) = std::conj(u(np + k - 1));
            for (int k = 1; k <= nm; ++k) v(np + k - 1) = std::conj(u(k - 1));
            return v;
        };
    }
    return sys;
}

QuadraticSystem assemble_reduced_system(const ModelParams& p) {
    if (std::abs(p.t - 1.0) < 1e-14)
        throw RegimeError("reduced Wronskian system needs t != 1 (h != 0)");
    const int n = p.n;
    const int N = p.N;
    const cd q = p.q;
    const cd wq = p.w * q;
    const cd t = p.t;
    const cd logq = std::log(q); // i gamma on the unit circle, gamma for real q
    const cd arg0 = p.beta * p.h / 2.0;

    // coefficient of e_k^+ e_{n-l}^+, both as a sinh ratio and as the
    // t,q-power form; the two must agree identically
    std::vector<cd> Ad(2 * n + 1); // index k-l+n
    for (int d = -n; d <= n; ++d) {
        const cd via_sinh = std::sinh(arg0 - logq * double(d)) / std::sinh(arg0);
        const cd via_pow =
            (t * cpow(q, double(-d)) - cpow(q, double(d)) / t) / (t - 1.0 / t);
        if (std::abs(via_sinh - via_pow) > 1e-12 * std::max(1.0, std::abs(via_pow)))
            throw Error("reduced system: sinh and power coefficient forms disagree");
        Ad[d + n] = via_pow;
    }
    std::vector<cd> b(N);
    for (int m = 1; m <= N - 1; ++m) b[m] = binomial_sum(m, n, wq);

    QuadraticSystem sys;
    sys.n_unknowns = n;
    sys.n_equations = N - 1;
    sys.eval = [=](const Vec& u, Vec& F, Mat* J) {
        std::vector<cd> e(n + 1);
        e[0] = 1.0;
        for (int k = 1; k <= n; ++k) e[k] = u(k - 1);
        F.resize(N - 1);
        if (J) J->setZero(N - 1, n);
        for (int m = 1; m <= N - 1; ++m) {
            cd acc = -e[n] * b[m];
            for (int k = std::max(0, m - n); k <= std::min(m, n); ++k) {
                const int l = m - k;
                acc += Ad[k - l + n] * e[k] * e[n - l];
            }
            F(m - 1) = acc;
            if (J) {
                for (int k = std::max(0, m - n); k <= std::min(m, n); ++k) {
                    const int l = m - k;
                    if (k >= 1) (*J)(m - 1, k - 1) += Ad[k - l + n] * e[n - l];
                    if (n - l >= 1) (*J)(m - 1, n - l - 1) += Ad[k - l + n] * e[k];
                }
                (*J)(m - 1, n - 1) -= b[m];
            }
        }
    };
    ModelParams pc = p;
    sys.package = [=](const Vec& u) {
        WronskianSolution s;
        s.e_plus.e.assign(n + 1, cd(1.0));
        for (int k = 1; k <= n; ++k) s.e_plus.e[k] = u(k - 1);
        s.e_plus.sector = 0;
        s.e_plus.kind = QKind::plus;
        const cd en = s.e_plus.e[n];
        if (std::abs(en) < 1e-8)
            throw DegenerateError("reduced solution has |e_n| = " +
                                  std::to_string(std::abs(en)) +
                                  ": degree-drop candidate");
        // the reciprocal constraint fixes the partner polynomial
        s.e_minus.e.resize(n + 1);
        for (int k = 0; k <= n; ++k) s.e_minus.e[k] = s.e_plus.e[n - k] / en;
        s.e_minus.sector = 0;
        s.e_minus.kind = QKind::minus;
        evaluate_flags(s, pc);
        return s;
    };
    sys.start_scale.resize(n);
    const double awq = std::abs(wq);
    for (int k = 1; k <= n; ++k)
        sys.start_scale[k - 1] =
            std::max(binom(n, k), 1.0) * std::pow(awq, std::abs(k - n / 2.0));
    // conjugation composed with the reciprocal constraint sends e_k to
    // conj(e_{n-k}/e_n), again a solution; closing under this map recovers
    // partners whose basins are too small for random starts
    sys.symmetry_image = [n](const Vec& u) {
        Vec v(n);
        const cd en = u(n - 1);
        for (int k = 1; k < n; ++k) v(k - 1) = std::conj(u(n - k - 1) / en);
        v(n - 1) = std::conj(1.0 / en);
        return v;
    };
    // n quadrics cut out exactly 2^n points here (the count the solver must
    // reproduce), which lets the solver notice an incomplete multistart set
    sys.expected_count = 1 << n;
    return sys;
}

namespace {

// deterministic standard normal pairs from the raw engine stream; avoids the
// library distribution objects whose sequences are not pinned by the standard
cd gaussian(std::mt19937_64& rng) {
    const double u1 = (double(rng() >> 11) + 0.5) * 0x1p-53;
    const double u2 = double(rng() >> 11) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return cd(r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2));
}

// residual scale: the components of F carry products of two unknowns, so the
// evaluation noise floor grows like |u|_inf^2; tolerances are taken relative
// to this scale so large-coefficient solutions remain representable
double res_scale(const Vec& u) {
    const double m = u.cwiseAbs().maxCoeff();
    return std::max(1.0, m * m);
}

// damped Gauss-Newton; returns true when the scaled residual fell below
// cfg.tol and leaves the final iterate and scaled residual in (u, fnorm)
bool newton_iterate(const QuadraticSystem& sys, const SolveConfig& cfg, Vec& u,
                    double& fnorm) {
    const bool square = sys.n_equations == sys.n_unknowns;
    Vec F;
    Mat J;
    sys.eval(u, F, &J);
    double f2 = F.squaredNorm();
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (std::sqrt(f2) < cfg.tol * res_scale(u)) break;
        Vec du = square ? Vec(J.partialPivLu().solve(-F))
                        : Vec(J.colPivHouseholderQr().solve(-F));
        if (!du.allFinite()) return false;
        double s = 1.0;
        bool improved = false;
        Vec Ft;
        for (int halve = 0; halve < 30; ++halve) {
            Vec ut = u + s * du;
            sys.eval(ut, Ft, nullptr);
            const double ft2 = Ft.squaredNorm();
            if (ft2 < f2) {
                u = ut;
                f2 = ft2;
                improved = true;
                break;
            }
            s *= 0.5;
        }
        if (!improved) break;
        sys.eval(u, F, &J);
        f2 = F.squaredNorm();
    }
    fnorm = std::sqrt(f2) / res_scale(u);
    return fnorm < cfg.tol;
}

struct Candidate {
    Vec u;
    WronskianSolution sol;
};

struct StartOutcome {
    bool converged = false;
    bool degenerate = false;
    Vec u;
    WronskianSolution sol;
};

StartOutcome package_point(const QuadraticSystem& sys, const SolveConfig& cfg,
                           const Vec& u, double fnorm, int idx) {
    StartOutcome out;
    out.u = u;
    try {
        out.sol = sys.package(u);
    } catch (const DegenerateError&) {
        out.degenerate = true;
        return out;
    }
    out.sol.residual = fnorm;
    out.sol.seed = cfg.seed;
    out.sol.start_index = idx;
    out.converged = true;
    return out;
}

StartOutcome run_start(const QuadraticSystem& sys, const SolveConfig& cfg,
                       int idx) {
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(idx + 1)));
    Vec u(sys.n_unknowns);
    for (int j = 0; j < sys.n_unknowns; ++j)
        u(j) = sys.start_scale[j] * gaussian(rng) / std::sqrt(2.0);
    double fnorm = 0.0;
    if (!newton_iterate(sys, cfg, u, fnorm)) return {};
    return package_point(sys, cfg, u, fnorm, idx);
}

std::vector<cd> coeff_key(const WronskianSolution& s) {
    std::vector<cd> v(s.e_plus.e.begin() + 1, s.e_plus.e.end());
    v.insert(v.end(), s.e_minus.e.begin() + 1, s.e_minus.e.end());
    return v;
}

bool lex_less(const std::vector<cd>& a, const std::vector<cd>& b) {
    for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return a.size() < b.size();
}

void sort_solutions(std::vector<WronskianSolution>& v) {
    std::sort(v.begin(), v.end(),
              [](const WronskianSolution& a, const WronskianSolution& b) {
                  if (a.residual != b.residual) return a.residual < b.residual;
                  return lex_less(coeff_key(a), coeff_key(b));
              });
}

// greedy cluster keep: sorted by (residual, lex key), a candidate is dropped
// when its coefficient key sits within rel_tol of one already kept
template <class T, class SolOf>
std::vector<T> dedup_by_key(std::vector<T> items, SolOf sol_of, double rel_tol) {
    std::sort(items.begin(), items.end(), [&](const T& a, const T& b) {
        const WronskianSolution& sa = sol_of(a);
        const WronskianSolution& sb = sol_of(b);
        if (sa.residual != sb.residual) return sa.residual < sb.residual;
        return lex_less(coeff_key(sa), coeff_key(sb));
    });
    std::vector<T> kept;
    std::vector<std::vector<cd>> keys;
    for (auto& s : items) {
        auto key = coeff_key(sol_of(s));
        double knorm = 0.0;
        for (const cd& c : key) knorm += std::norm(c);
        knorm = std::sqrt(knorm);
        bool dup = false;
        for (const auto& k : keys) {
            double d = 0.0, on = 0.0;
            for (size_t i = 0; i < k.size(); ++i) {
                d += std::norm(key[i] - k[i]);
                on += std::norm(k[i]);
            }
            if (std::sqrt(d) <= rel_tol * std::max({std::sqrt(on), knorm, 1e-300})) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            keys.push_back(std::move(key));
            kept.push_back(std::move(s));
        }
    }
    return kept;
}

} // namespace

std::vector<WronskianSolution> dedup(std::vector<WronskianSolution> sols,
                                     double rel_tol) {
    return dedup_by_key(
        std::move(sols),
        [](const WronskianSolution& s) -> const WronskianSolution& { return s; },
        rel_tol);
}

namespace {

const WronskianSolution& candidate_sol(const Candidate& c) { return c.sol; }

// Total-degree straight-line homotopy between the gamma-rotated start system
// u_k^2 = c_k and the leading square subsystem (first n_unknowns equations).
// Quadrics in n unknowns give 2^n start roots and 2^n paths; solutions of the
// whole system are solutions of the subsystem, so tracking every path visits
// every solution, including those whose Newton basins are vanishingly small.
struct PathTracker {
    const QuadraticSystem& sys;
    int n;
    cd gamma;
    std::vector<cd> c, sq;

    PathTracker(const QuadraticSystem& s, cd g)
        : sys(s), n(s.n_unknowns), gamma(g) {
        c.resize(n);
        sq.resize(n);
        for (int k = 0; k < n; ++k) {
            // golden-angle phases: deterministic, no aligned start roots
            const double th = 2.399963229728653 * (k + 1);
            const double r = std::max(sys.start_scale[k], 1e-3);
            c[k] = std::polar(r * r, 2.0 * th);
            sq[k] = std::polar(r, th);
        }
    }

    void evalH(const Vec& u, double t, Vec& H, Mat* JH) const {
        Vec F;
        Mat J;
        sys.eval(u, F, JH ? &J : nullptr);
        H = t * F.head(n);
        for (int k = 0; k < n; ++k)
            H(k) += (1.0 - t) * gamma * (u(k) * u(k) - c[k]);
        if (JH) {
            *JH = t * J.topRows(n);
            for (int k = 0; k < n; ++k)
                (*JH)(k, k) += (1.0 - t) * gamma * 2.0 * u(k);
        }
    }

    Vec tangent(const Vec& u, double t, bool& ok) const {
        Vec F;
        Mat J;
        sys.eval(u, F, &J);
        Mat JH = t * J.topRows(n);
        for (int k = 0; k < n; ++k)
            JH(k, k) += (1.0 - t) * gamma * 2.0 * u(k);
        Vec dHdt = F.head(n);
        for (int k = 0; k < n; ++k) dHdt(k) -= gamma * (u(k) * u(k) - c[k]);
        Vec v = JH.partialPivLu().solve(-dHdt);
        ok = v.allFinite();
        return v;
    }

    enum class PathEnd { ok, stalled, diverged };

    // RK2 predictor with a hop-guarded corrector: the corrector may move at
    // most half the predicted step, otherwise the step is rejected; this keeps
    // a path from sliding onto a neighbour when two paths pass close by
    PathEnd track(long mask, double dt0, Vec& out) const {
        Vec u(n);
        for (int k = 0; k < n; ++k) u(k) = (mask >> k) & 1 ? -sq[k] : sq[k];
        double t = 0.0, dt = dt0;
        while (t < 1.0) {
            const double h = std::min(dt, 1.0 - t);
            bool okt = false;
            Vec v1 = tangent(u, t, okt);
            if (!okt) return PathEnd::stalled;
            Vec v2 = tangent(u + 0.5 * h * v1, t + 0.5 * h, okt);
            if (!okt) return PathEnd::stalled;
            Vec up = u + h * v2;
            const double predstep = (up - u).norm();
            bool ok = false;
            Vec H;
            Mat JH;
            double corrmove = 0.0;
            Vec uc = up;
            for (int itc = 0; itc < 4; ++itc) {
                evalH(uc, t + h, H, &JH);
                if (!H.allFinite()) break;
                if (H.norm() < 1e-10 * (1.0 + uc.norm())) {
                    ok = true;
                    break;
                }
                Vec duc = JH.partialPivLu().solve(-H);
                if (!duc.allFinite()) break;
                uc += duc;
                corrmove += duc.norm();
                if (corrmove > 0.5 * predstep + 1e-13 * (1.0 + u.norm())) break;
            }
            if (ok) {
                evalH(uc, t + h, H, nullptr);
                if (H.norm() >= 1e-10 * (1.0 + uc.norm())) ok = false;
            }
            if (ok && uc.norm() < 1e10) {
                u = uc;
                t += h;
                dt = std::min(dt * 1.4, dt0 * 4.0);
            } else {
                if (uc.norm() >= 1e10 || u.norm() >= 1e10)
                    return PathEnd::diverged;
                dt *= 0.4;
                if (dt < 1e-10) return PathEnd::stalled;
            }
        }
        out = u;
        return PathEnd::ok;
    }
};

struct HomotopyOutcome {
    std::vector<Candidate> candidates;
    int n_ok = 0;
    int n_failed = 0;
    int n_degenerate = 0;
};

HomotopyOutcome homotopy_candidates(const QuadraticSystem& sys,
                                    const SolveConfig& cfg) {
    HomotopyOutcome out;
    if (sys.n_unknowns < 1 || sys.n_unknowns > 24 ||
        sys.n_equations < sys.n_unknowns)
        return out;
    const int n = sys.n_unknowns;
    const long npaths = 1L << n;
    const int jobs = std::max(1, cfg.jobs);

    // fixed fallback phases for the gamma trick; each run is complete on its
    // own for generic gamma, the ladder only hedges against an unlucky one
    for (double phase : {0.77, 2.03, -1.19, 1.41}) {
        PathTracker tr(sys, std::polar(1.0, phase));
        std::vector<Vec> ends(npaths);
        std::vector<PathTracker::PathEnd> status(
            npaths, PathTracker::PathEnd::stalled);
        auto sweep = [&](const std::vector<long>& masks, double dt0) {
            auto work = [&](int first) {
                for (size_t i = first; i < masks.size(); i += jobs)
                    status[masks[i]] = tr.track(masks[i], dt0, ends[masks[i]]);
            };
            if (jobs == 1 || masks.size() < 2) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j);
                for (auto& th : pool) th.join();
            }
        };
        std::vector<long> all(npaths);
        for (long m = 0; m < npaths; ++m) all[m] = m;
        sweep(all, 0.01);
        // retrack failed paths and collision groups with finer steps; a
        // collision means at least one of the group hopped paths
        for (double dtr : {0.002, 0.0004}) {
            std::vector<long> redo;
            std::vector<long> reps;
            std::vector<int> repcount;
            std::vector<int> repof(npaths, -1);
            for (long m = 0; m < npaths; ++m) {
                if (status[m] != PathTracker::PathEnd::ok) {
                    redo.push_back(m);
                    continue;
                }
                bool hit = false;
                for (size_t r = 0; r < reps.size(); ++r) {
                    const Vec& er = ends[reps[r]];
                    if ((ends[m] - er).norm() /
                            std::max({ends[m].norm(), er.norm(), 1e-300}) <
                        1e-6) {
                        repof[m] = int(r);
                        ++repcount[r];
                        hit = true;
                        break;
                    }
                }
                if (!hit) {
                    repof[m] = int(reps.size());
                    reps.push_back(m);
                    repcount.push_back(1);
                }
            }
            for (long m = 0; m < npaths; ++m)
                if (status[m] == PathTracker::PathEnd::ok &&
                    repcount[repof[m]] > 1)
                    redo.push_back(m);
            if (redo.empty()) break;
            sweep(redo, dtr);
        }
        int ok = 0;
        for (long m = 0; m < npaths; ++m)
            if (status[m] == PathTracker::PathEnd::ok) ++ok;
        out.n_ok = ok;
        out.n_failed = int(npaths - ok);
        // polish on the full system; only residual-verified points survive
        std::vector<Candidate> cands(npaths);
        std::vector<char> good(npaths, 0), degen(npaths, 0);
        auto polish = [&](int first) {
            for (long m = first; m < npaths; m += jobs) {
                if (status[m] != PathTracker::PathEnd::ok) continue;
                Vec u = ends[m];
                double fnorm = 0.0;
                if (!newton_iterate(sys, cfg, u, fnorm)) continue;
                StartOutcome so = package_point(sys, cfg, u, fnorm, -1);
                if (so.degenerate) {
                    degen[m] = 1;
                    continue;
                }
                if (!so.converged) continue;
                cands[m] = {std::move(so.u), std::move(so.sol)};
                good[m] = 1;
            }
        };
        if (jobs == 1) {
            polish(0);
        } else {
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j) pool.emplace_back(polish, j);
            for (auto& th : pool) th.join();
        }
        for (long m = 0; m < npaths; ++m) {
            if (degen[m]) ++out.n_degenerate;
            if (good[m]) out.candidates.push_back(std::move(cands[m]));
        }
        out.candidates = dedup_by_key(std::move(out.candidates), candidate_sol,
                                      1e-6);
        if (sys.expected_count > 0 &&
            (int)out.candidates.size() >= sys.expected_count)
            break;
        if ((long)out.candidates.size() >= npaths) break;
    }
    return out;
}

} // namespace

SolveResult solve_homotopy(const QuadraticSystem& sys, const SolveConfig& cfg) {
    SolveResult res;
    HomotopyOutcome out = homotopy_candidates(sys, cfg);
    res.n_converged = out.n_ok;
    res.n_failed = out.n_failed;
    res.n_degenerate = out.n_degenerate;
    res.solutions.reserve(out.candidates.size());
    for (auto& c : out.candidates) res.solutions.push_back(std::move(c.sol));
    sort_solutions(res.solutions);
    return res;
}

SolveResult solve_multistart(const QuadraticSystem& sys, const SolveConfig& cfg) {
    const auto sol_of = candidate_sol;
    SolveResult res;
    std::vector<Candidate> found;
    std::mutex mu;
    const int jobs = std::max(1, cfg.jobs);
    auto worker = [&](int first) {
        std::vector<Candidate> local;
        int conv = 0, fail = 0, degen = 0;
        for (int idx = first; idx < cfg.n_starts; idx += jobs) {
            StartOutcome out = run_start(sys, cfg, idx);
            if (out.converged) {
                ++conv;
                local.push_back({std::move(out.u), std::move(out.sol)});
            } else if (out.degenerate) {
                ++degen;
            } else {
                ++fail;
            }
        }
        std::lock_guard<std::mutex> lk(mu);
        res.n_converged += conv;
        res.n_failed += fail;
        res.n_degenerate += degen;
        found.insert(found.end(), std::make_move_iterator(local.begin()),
                     std::make_move_iterator(local.end()));
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
        for (auto& th : pool) th.join();
    }
    found = dedup_by_key(std::move(found), sol_of, 1e-6);
    // close the kept set under the system's discrete symmetry: images of found
    // solutions are polished and admitted, which reaches roots whose own basin
    // of attraction is too small for random starts to hit
    if (sys.symmetry_image) {
        for (int round = 0; round < 4; ++round) {
            const size_t before = found.size();
            std::vector<Candidate> images;
            for (const auto& c : found) {
                Vec ui = sys.symmetry_image(c.u);
                if (!ui.allFinite()) continue;
                Vec F;
                sys.eval(ui, F, nullptr);
                if (!F.allFinite() || F.norm() > 0.1) continue;
                double fnorm = 0.0;
                if (!newton_iterate(sys, cfg, ui, fnorm)) continue;
                StartOutcome out = package_point(sys, cfg, ui, fnorm, -1);
                if (out.degenerate) {
                    ++res.n_degenerate;
                    continue;
                }
                if (!out.converged) continue;
                images.push_back({std::move(out.u), std::move(out.sol)});
            }
            for (auto& im : images) found.push_back(std::move(im));
            found = dedup_by_key(std::move(found), sol_of, 1e-6);
            if (found.size() == before) break;
        }
    }
    // random starts can miss solutions whose basin is vanishingly small even
    // when millions of starts are thrown at the system; when the algebraic
    // count is known and not yet reached, a continuation sweep reaches the
    // remainder deterministically
    if (cfg.complete && sys.expected_count > 0 &&
        (int)found.size() < sys.expected_count) {
        HomotopyOutcome topup = homotopy_candidates(sys, cfg);
        res.n_degenerate += topup.n_degenerate;
        for (auto& c : topup.candidates) found.push_back(std::move(c));
        found = dedup_by_key(std::move(found), sol_of, 1e-6);
    }
    res.solutions.reserve(found.size());
    for (auto& c : found) res.solutions.push_back(std::move(c.sol));
    sort_solutions(res.solutions);
    return res;
}

} // namespace qtm
