#pragma once

#include <memory>

#include "sqrtreg/model.hpp"

namespace sqrtreg {

enum class GramSide { NSide, FeatureSide };
// NSide: systems with I + X X^T (size N); FeatureSide: I + X^T X (size n).

/// Solves (I + X^T X) v = rhs and (I + X X^T) w = rhs with one factorization.
/// The smaller Gram is factorized once; the other side goes through the
/// Sherman-Morrison-Woodbury identity. Above the dense threshold both sides
/// fall back to Jacobi-preconditioned CG.
class GramSolver {
public:
    enum class Strategy { DirectSmall, SMW, PCG };

    GramSolver(const DesignMatrix& X, int dense_threshold = 4000);

    Vector solve_feature_side(const Vector& rhs) const; // (I + X^T X)^{-1} rhs
    Vector solve_sample_side(const Vector& rhs) const;  // (I + X X^T)^{-1} rhs

    Strategy strategy(GramSide side) const;

private:
    const DesignMatrix* X_;
    bool use_pcg_ = false;
    bool factored_feature_side_ = false; // which Gram the factorization holds
    Eigen::LLT<Matrix> llt_;
    Vector jacobi_feature_, jacobi_sample_;

    Vector pcg(GramSide side, const Vector& rhs) const;
};

/// One-call interface over GramSolver.
Vector solve_gram_system(const GramSolver& solver, GramSide side, const Vector& rhs);

/// ADMM on the primal reformulation (slack alpha for beta, residual split y).
SolveResult padmm_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg);

/// ADMM on the dual reformulation; beta is recovered from the multiplier
/// sequence.
SolveResult dadmm_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg);

} // namespace sqrtreg
