#pragma once

#include <random>

#include "qgcc/qmodel.hpp"

namespace testutil {

using qgcc::CMatrix;
using qgcc::Complex;
using qgcc::Index;

inline CMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix A(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) A(r, c) = Complex(normal(rng), normal(rng));
    return A;
}

inline qgcc::DoubledMatrix random_doubled(Index rows, Index cols, std::mt19937_64& rng) {
    return qgcc::DoubledMatrix::validate(random_complex(rows, cols, rng),
                                         random_complex(rows, cols, rng), qgcc::MatrixKind::General);
}

inline qgcc::DoubledMatrix random_doubled_hermitian(Index n, std::mt19937_64& rng) {
    const CMatrix a = random_complex(n, n, rng);
    const CMatrix b = random_complex(n, n, rng);
    return qgcc::DoubledMatrix::validate(0.5 * (a + a.adjoint()), 0.5 * (b + b.transpose()),
                                         qgcc::MatrixKind::Hermitian);
}

inline CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace testutil
