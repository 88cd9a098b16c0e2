#pragma once

#include "sqrtreg/model.hpp"
#include "sqrtreg/rng.hpp"

namespace sqtest {

using sqrtreg::Dataset;
using sqrtreg::DesignMatrix;
using sqrtreg::GroupStructure;
using sqrtreg::Matrix;
using sqrtreg::Regularizer;
using sqrtreg::Rng;
using sqrtreg::Vector;

inline Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline Dataset random_dataset(Rng& rng, Eigen::Index N, Eigen::Index n) {
    Dataset ds;
    ds.X = DesignMatrix(random_matrix(rng, N, n));
    ds.Y = random_vector(rng, N);
    return ds;
}

// Random contiguous partition with block sizes in [1, 3].
inline Regularizer random_sgl(Rng& rng, Eigen::Index n, double w1) {
    std::vector<int> sizes;
    Eigen::Index left = n;
    while (left > 0) {
        int s = static_cast<int>(rng.uniform_index(3)) + 1;
        s = static_cast<int>(std::min<Eigen::Index>(s, left));
        sizes.push_back(s);
        left -= s;
    }
    return Regularizer::sparse_group(GroupStructure::contiguous(sizes), w1, 1.0 - w1);
}

// Instance with a sparse ground truth and moderate noise; lambda chosen by
// the caller.
inline Dataset planted_dataset(Rng& rng, Eigen::Index N, Eigen::Index n, double noise = 0.5) {
    Dataset ds;
    Matrix X = random_matrix(rng, N, n);
    Vector beta = Vector::Zero(n);
    for (Eigen::Index j = 0; j < std::max<Eigen::Index>(1, n / 5); ++j)
        beta[static_cast<Eigen::Index>(rng.uniform_index(n))] = 2.0 * rng.normal();
    ds.Y = X * beta;
    for (Eigen::Index i = 0; i < N; ++i) ds.Y[i] += noise * rng.normal();
    ds.X = DesignMatrix(std::move(X));
    return ds;
}

} // namespace sqtest
