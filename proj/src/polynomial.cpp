#include "qtm/polynomial.hpp"

#include <algorithm>

namespace qtm {

cd QPolynomial::eval(cd z) const {
    // Horner in (-z)
    cd acc = 0.0;
    for (auto it = e.rbegin(); it != e.rend(); ++it) acc = acc * (-z) + *it;
    return acc;
}

std::vector<cd> QPolynomial::roots() const {
    const int deg = degree();
    if (deg < 0) throw Error("roots: empty coefficient vector");
    if (deg == 0) return {};
    double emax = 0.0;
    for (const cd& c : e) emax = std::max(emax, std::abs(c));
    if (std::abs(e[deg]) < 1e-8 * emax)
        throw DegenerateError("roots: leading coefficient " +
                              std::to_string(std::abs(e[deg])) +
                              " signals a degree drop");
    // monic reversal p(x) = sum_k (-1)^k e_k x^{deg-k}; companion eigenvalues
    Mat C = Mat::Zero(deg, deg);
    for (int i = 0; i + 1 < deg; ++i) C(i + 1, i) = 1.0;
    for (int i = 0; i < deg; ++i) {
        const int k = deg - i; // coefficient of x^i is (-1)^k e_k
        const double sgn = k % 2 == 0 ? 1.0 : -1.0;
        C(i, deg - 1) = -sgn * e[k] / e[0];
    }
    Eigen::ComplexEigenSolver<Mat> es(C, false);
    if (es.info() != Eigen::Success) throw Error("roots: companion solve failed");
    std::vector<cd> x(es.eigenvalues().data(), es.eigenvalues().data() + deg);
    std::sort(x.begin(), x.end(), [](const cd& a, const cd& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    // re-expand prod (1 - x_k z) and compare
    std::vector<cd> re(1, cd(1.0));
    for (const cd& xk : x) {
        re.push_back(cd(0.0));
        for (int k = int(re.size()) - 1; k >= 1; --k) re[k] += xk * re[k - 1];
    }
    for (int k = 0; k <= deg; ++k)
        if (std::abs(re[k] - e[k] / e[0]) > 1e-8 * std::max(1.0, emax))
            throw FitUnstable("roots: re-expansion mismatch at order " +
                              std::to_string(k));
    return x;
}

} // namespace qtm
