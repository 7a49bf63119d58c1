#pragma once

#include "desn/reservoir.hpp"
#include "desn/rng.hpp"

#include <cmath>

namespace desn::testing {

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Vector random_vector(Rng& rng, Index n, double lo = -1.0, double hi = 1.0) {
    return random_matrix(rng, n, 1, lo, hi);
}

inline Index random_index(Rng& rng, Index lo, Index hi) {
    return lo + static_cast<Index>(std::floor(rng.uniform01() * static_cast<double>(hi - lo + 1)));
}

inline double relative_error(const Matrix& a, const Matrix& b) {
    const double scale = std::max(b.norm(), 1e-300);
    return (a - b).norm() / scale;
}

inline EsnConfig small_config(Index n, std::uint64_t seed, Activation f = Activation::Tanh) {
    EsnConfig c;
    c.reservoir_size = n;
    c.activation = f;
    c.seed = seed;
    return c;
}

}  // namespace desn::testing
