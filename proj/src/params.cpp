#include "qtm/params.hpp"

#include <cmath>

namespace qtm {

ModelParams ModelParams::make(int N, double gamma, double beta, double h,
                              std::optional<int> ell, Regime regime) {
    if (N < 2 || N % 2 != 0)
        throw Error("Trotter number must be even and >= 2, got " + std::to_string(N));
    if (beta <= 0.0)
        throw Error("inverse temperature must be positive, got " + std::to_string(beta));

    ModelParams p;
    p.N = N;
    p.gamma = gamma;
    p.beta = beta;
    p.h = h;
    p.regime = regime;
    p.ell = ell;
    p.n = N / 2;

    if (regime == Regime::critical) {
        p.q = std::exp(cd(0.0, gamma));
    } else {
        // massive regime: q real positive, gamma is ln q here
        p.q = std::exp(cd(gamma, 0.0));
        if (std::abs(p.q.real() - 1.0) < 1e-14)
            throw RegimeError("real-q regime requires q != 1");
    }
    p.w = std::exp(-beta * (p.q - 1.0 / p.q) / double(N));
    p.t = std::exp(beta * h / 2.0);

    if (ell) {
        if (*ell < 3)
            throw Error("root-of-unity order must be >= 3, got " + std::to_string(*ell));
        cd qell = cpow(p.q, double(*ell));
        if (std::abs(qell - 1.0) > 1e-10)
            throw Error("gamma and ell conflict: |q^ell - 1| = " +
                        std::to_string(std::abs(qell - 1.0)));
        p.ellprime = (*ell % 2 == 1) ? *ell : *ell / 2;
    }
    return p;
}

} // namespace qtm
