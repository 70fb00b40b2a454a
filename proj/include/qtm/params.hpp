#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace qtm {

using cd = std::complex<double>;

// Error taxonomy. Every throw site puts the offending quantity into the message.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PoleError : Error { using Error::Error; };
struct RegimeError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct InvalidCutoff : Error { using Error::Error; };
struct SeriesPole : Error { using Error::Error; };
struct RootCoincidence : Error { using Error::Error; };
struct PowerIterationStall : Error { using Error::Error; };
struct FitUnstable : Error { using Error::Error; };
struct NormOverflow : Error { using Error::Error; };
// Reportable finding, not a crash: the largest eigenvalue escaped the matched set.
struct UnmatchedLargest : Error { using Error::Error; };

enum class Regime { critical, real_q };

// Principal-branch complex power.
inline cd cpow(cd base, double expo) {
    return std::exp(expo * std::log(base));
}
inline cd cpow(cd base, cd expo) {
    return std::exp(expo * std::log(base));
}

// Full parameter record. Trotter number N = 2n must be even; the auxiliary
// ("temperature") parameter is w = exp(-beta (q - 1/q)/N) and the twist is
// kept as t = exp(beta h / 2), never as the exponent alpha itself: all
// formulas downstream need only integer powers of q times t, which avoids
// picking a log branch.
struct ModelParams {
    int N = 2;
    double gamma = 0.0;
    double beta = 1.0;
    double h = 0.0;
    Regime regime = Regime::critical;
    std::optional<int> ell; // root-of-unity order, explicit input only

    // derived
    cd q;
    cd w;
    double t = 1.0;
    int n = 1;
    int ellprime = 0;

    static ModelParams make(int N, double gamma, double beta, double h,
                            std::optional<int> ell = std::nullopt,
                            Regime regime = Regime::critical);

    // copy with a different Trotter number (w changes with N)
    ModelParams with_N(int N2) const {
        return make(N2, gamma, beta, h, ell, regime);
    }
    bool at_root_of_unity() const { return ell.has_value(); }
};

} // namespace qtm
