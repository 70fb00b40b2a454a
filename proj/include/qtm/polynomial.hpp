#pragma once

#include <vector>

#include "qtm/linalg.hpp"
#include "qtm/params.hpp"

namespace qtm {

enum class QKind { plus, minus };

// Q(z) = sum_k e_k (-z)^k with e_0 = 1, equivalently prod_k (1 - x_k z) over
// the Bethe roots x_k. The e_k are the elementary symmetric polynomials of
// the roots. degree = n - sector for kind plus, n + sector for kind minus.
struct QPolynomial {
    std::vector<cd> e;
    int sector = 0;
    QKind kind = QKind::plus;

    int degree() const { return int(e.size()) - 1; }
    cd eval(cd z) const;

    // Bethe roots x_k as companion-matrix eigenvalues of the monic reversal
    // prod_k (x - x_k) = sum_k (-1)^k e_k x^{deg-k}. Throws DegenerateError on
    // leading-coefficient underflow (a degree drop is reported, not hidden);
    // the re-expanded product must match the coefficients to 1e-8.
    std::vector<cd> roots() const;
};

} // namespace qtm
