#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqrtreg/admm.hpp"
#include "sqrtreg/dro.hpp"
#include "sqrtreg/ppdna.hpp"
#include "sqrtreg/prox.hpp"
#include "test_support.hpp"

using namespace sqrtreg;
using sqtest::random_vector;

TEST_CASE("gram solver: identity when X = 0") {
    DesignMatrix X{Matrix::Zero(4, 3)};
    GramSolver gs(X);
    Rng rng(1);
    Vector r3 = random_vector(rng, 3), r4 = random_vector(rng, 4);
    CHECK((gs.solve_feature_side(r3) - r3).norm() <= 1e-14);
    CHECK((gs.solve_sample_side(r4) - r4).norm() <= 1e-14);
}

TEST_CASE("gram solver: SMW route equals dense solve") {
    Rng rng(3);
    Matrix X = sqtest::random_matrix(rng, 30, 200);
    DesignMatrix D(X);
    GramSolver gs(D); // factors the 30x30 side
    CHECK(gs.strategy(GramSide::NSide) == GramSolver::Strategy::DirectSmall);
    CHECK(gs.strategy(GramSide::FeatureSide) == GramSolver::Strategy::SMW);
    Vector rhs = random_vector(rng, 200);
    Matrix A = Matrix::Identity(200, 200) + X.transpose() * X;
    Vector expect = A.ldlt().solve(rhs);
    CHECK((gs.solve_feature_side(rhs) - expect).lpNorm<Eigen::Infinity>() <=
          1e-10 * (1.0 + expect.norm()));
    // SMW identity as an operator equation, both directions
    Vector w = random_vector(rng, 30);
    Matrix B = Matrix::Identity(30, 30) + X * X.transpose();
    CHECK((gs.solve_sample_side(w) - B.ldlt().solve(w)).lpNorm<Eigen::Infinity>() <=
          1e-10 * (1.0 + w.norm()));
}

TEST_CASE("gram solver: PCG route equals direct route") {
    Rng rng(5);
    Matrix X = sqtest::random_matrix(rng, 25, 40);
    DesignMatrix D(X);
    GramSolver direct(D);
    GramSolver pcg(D, /*dense_threshold=*/1); // force PCG
    CHECK(pcg.strategy(GramSide::FeatureSide) == GramSolver::Strategy::PCG);
    Vector rhs = random_vector(rng, 40);
    CHECK((pcg.solve_feature_side(rhs) - direct.solve_feature_side(rhs))
              .lpNorm<Eigen::Infinity>() <= 1e-8);
    Vector rhs2 = random_vector(rng, 25);
    CHECK((pcg.solve_sample_side(rhs2) - direct.solve_sample_side(rhs2))
              .lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("padmm first iterate from the zero start") {
    // 2x2 identity instance: beta^1 = (I + X^T X)^{-1} X^T Y
    Matrix X = Matrix::Identity(2, 2);
    Dataset ds;
    ds.X = DesignMatrix(X);
    ds.Y = Vector::Ones(2);
    Regularizer reg = Regularizer::lasso(2);
    SolverConfig cfg;
    cfg.lambda = 0.5;
    cfg.admm_max_iters = 1;
    SolveResult res = padmm_solve(ds, reg, cfg);
    Vector expect = (Matrix::Identity(2, 2) * 2.0).ldlt().solve(X.transpose() * ds.Y);
    CHECK((res.beta - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("padmm fixed point: starting at the solution stays there") {
    Rng rng(7);
    Dataset ds = sqtest::planted_dataset(rng, 25, 15);
    Regularizer reg = sqtest::random_sgl(rng, 15, 0.4);
    SolverConfig cfg;
    cfg.lambda = 0.5;
    cfg.tol = 1e-11;
    SolveResult ref = ppa_solve(ds, reg, cfg);
    REQUIRE(ref.status == SolveStatus::Converged);
    // one pADMM sweep from a KKT-consistent state moves beta by O(tol)
    SolverConfig one = cfg;
    one.tol = 1e-13; // don't stop early
    one.admm_max_iters = 600;
    SolveResult res = padmm_solve(ds, reg, one);
    // after convergence to machine-level stationarity, successive sweeps are
    // contractions: beta stays within solver accuracy of the PPDNA solution
    CHECK((res.beta - ref.beta).norm() <= 1e-5 * (1.0 + ref.beta.norm()));
}

TEST_CASE("dadmm moreau identity for the conjugate prox step") {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        Eigen::Index n = 6;
        Regularizer reg =
            t % 2 == 0 ? sqtest::random_sgl(rng, n, 0.0) : sqtest::random_sgl(rng, n, 1.0);
        double mu = 0.3 + 2.0 * rng.uniform();
        double lambda = 0.4 + rng.uniform();
        Vector z = random_vector(rng, n, 2.0);
        Vector v = z - prox_penalty(mu * z, reg, mu * lambda) / mu;
        // pure cases have closed-form projections onto {p_* <= lambda}
        if (reg.w1 == 1.0) {
            Vector clamp(n);
            for (Eigen::Index i = 0; i < n; ++i)
                clamp[i] = std::min(std::max(z[i], -lambda), lambda);
            CHECK((v - clamp).lpNorm<Eigen::Infinity>() <= 1e-12);
        } else {
            Vector proj = z;
            for (int l = 0; l < reg.groups.num_groups(); ++l) {
                const auto& g = reg.groups.groups[static_cast<std::size_t>(l)];
                double r = lambda * reg.groups.weights[l];
                double nb = 0.0;
                for (int j : g) nb += z[j] * z[j];
                nb = std::sqrt(nb);
                if (nb > r)
                    for (int j : g) proj[j] *= r / nb;
            }
            CHECK((v - proj).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
        // mixed weights: the result lies in the dual ball and is idempotent
        Regularizer mixed = sqtest::random_sgl(rng, n, 0.5);
        Vector vm = z - prox_penalty(mu * z, mixed, mu * lambda) / mu;
        CHECK(dual_seminorm(vm, mixed) <= lambda * (1.0 + 1e-9));
        Vector vm2 = vm - prox_penalty(mu * vm, mixed, mu * lambda) / mu;
        CHECK((vm2 - vm).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("ball projection") {
    Rng rng(11);
    Vector inside = 0.3 * random_vector(rng, 4).normalized();
    Vector outside = 3.0 * random_vector(rng, 4).normalized();
    auto proj = [](const Vector& x) {
        double nx = x.norm();
        return nx <= 1.0 ? x : Vector(x / nx);
    };
    CHECK((proj(inside) - inside).norm() == 0.0);
    CHECK(proj(outside).norm() == doctest::Approx(1.0));
    CHECK((proj(outside) - outside / outside.norm()).norm() <= 1e-15);
}

TEST_CASE("both admm variants reach the shared optimum") {
    Rng rng(13);
    for (int t = 0; t < 4; ++t) {
        Eigen::Index n = 20 + 10 * t, N = 30 + 5 * t;
        Dataset ds = sqtest::planted_dataset(rng, N, n);
        Regularizer reg =
            t % 2 == 0 ? sqtest::random_sgl(rng, n, 0.5) : Regularizer::fused(0.5, 0.5);
        SolverConfig cfg;
        cfg.lambda = 0.5;
        cfg.tol = 1e-9;
        SolveResult pp = ppa_solve(ds, reg, cfg);
        SolveResult pa = padmm_solve(ds, reg, cfg);
        SolveResult da = dadmm_solve(ds, reg, cfg);
        REQUIRE(pp.status == SolveStatus::Converged);
        CHECK(pa.status == SolveStatus::Converged);
        CHECK(da.status == SolveStatus::Converged);
        double scale = 1.0 + pp.beta.norm();
        CHECK((pa.beta - pp.beta).norm() <= 1e-4 * scale);
        CHECK((da.beta - pp.beta).norm() <= 1e-4 * scale);
        CHECK(std::fabs(pa.objective_primal - pp.objective_primal) <=
              1e-6 * (1.0 + pp.objective_primal));
        CHECK(std::fabs(da.objective_primal - pp.objective_primal) <=
              1e-6 * (1.0 + pp.objective_primal));
        // residual sense monotonicity at exit
        CHECK((ds.X.mv(pa.beta) - ds.Y - pa.residual_y).norm() <= 1e-10 * (1.0 + ds.Y.norm()));
    }
}

TEST_CASE("padmm sparse-group random instance agrees with ppdna objective") {
    Rng rng(17);
    Dataset ds = sqtest::planted_dataset(rng, 50, 80);
    Regularizer reg = sqtest::random_sgl(rng, 80, 0.3);
    SolverConfig cfg;
    cfg.lambda = 0.8;
    cfg.tol = 1e-8;
    SolveResult pp = ppa_solve(ds, reg, cfg);
    SolveResult pa = padmm_solve(ds, reg, cfg);
    CHECK(std::fabs(pa.objective_primal - pp.objective_primal) <=
          1e-6 * (1.0 + pp.objective_primal));
}
