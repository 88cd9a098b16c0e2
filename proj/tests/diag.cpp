// scratch diagnostics (not part of the suite)
#include <cstdio>

#include "sqrtreg/admm.hpp"
#include "sqrtreg/data.hpp"
#include "sqrtreg/dro.hpp"
#include "sqrtreg/ppdna.hpp"
#include "sqrtreg/tuning.hpp"
#include "test_support.hpp"

using namespace sqrtreg;

int main(int argc, char** argv) {
    int mode = argc > 1 ? std::atoi(argv[1]) : 0;
    if (mode == 2) {
        SyntheticInstance inst = generate_example1(1000, 200, 20240801);
        Dataset ds = normalize_columns(inst.ds);
        Regularizer reg = Regularizer::sparse_group(inst.groups, 0.0, 1.0);
        SolverConfig base;
        base.lambda = lambda_bun(ds, reg.groups, 0.05);
        for (double decay : {0.7, 0.5, 0.3, 0.2, 0.1}) {
            for (double floor : {1e-4, 1e-2, 5e-2, 0.2}) {
                SolverConfig cfg = base;
                cfg.prox_decay = decay;
                cfg.sigma_floor = cfg.tau_floor = floor;
                SolveResult r = ppa_solve(ds, reg, cfg);
                auto [nz, gz] = nnz_stats(r.beta, reg);
                std::printf("decay=%.2f floor=%.0e -> outer=%d inner=%d kkt=%.2e nnz=%d|%d %s %.2fs\n",
                            decay, floor, r.outer_iters, r.inner_iters, r.criterion.value, nz,
                            gz, to_string(r.status), r.wall_seconds);
            }
        }
        return 0;
    }
    if (mode == 0) {
        SyntheticInstance inst = generate_example1(1000, 200, 20240801);
        Dataset ds = normalize_columns(inst.ds);
        Regularizer reg = Regularizer::sparse_group(inst.groups, 0.0, 1.0);
        SolverConfig cfg;
        cfg.lambda = lambda_bun(ds, reg.groups, 0.05);
        std::printf("lambda=%.4f\n", cfg.lambda);
        // per-outer profile via increasing caps
        int prev_inner = 0;
        for (int cap = 1; cap <= 40; ++cap) {
            SolverConfig c = cfg;
            c.max_outer = cap;
            SolveResult r = ppa_solve(ds, reg, c);
            std::printf("outer=%2d inner_total=%3d (+%2d) kkt=%.3e status=%s\n", r.outer_iters,
                        r.inner_iters, r.inner_iters - prev_inner, r.criterion.value,
                        to_string(r.status));
            prev_inner = r.inner_iters;
            if (r.status == SolveStatus::Converged) break;
        }
    } else {
        Rng rng(404);
        for (int t = 0; t < 20; ++t) {
            Eigen::Index N = 60 + static_cast<Eigen::Index>(rng.uniform_index(141));
            Eigen::Index n = 30 + static_cast<Eigen::Index>(rng.uniform_index(371));
            Dataset ds = sqtest::planted_dataset(rng, N, n);
            Regularizer reg =
                t % 2 == 0 ? sqtest::random_sgl(rng, n, 0.5) : Regularizer::fused(0.5, 0.5);
            SolverConfig cfg;
            cfg.tol = 1e-9;
            cfg.lambda = 0.3 * ds.X.tmv(ds.Y / ds.Y.norm()).lpNorm<Eigen::Infinity>();
            SolveResult pp = ppa_solve(ds, reg, cfg);
            SolveResult pa = padmm_solve(ds, reg, cfg);
            SolveResult da = dadmm_solve(ds, reg, cfg);
            double scale_b = 1.0 + pp.beta.norm();
            std::printf(
                "t=%2d N=%3ld n=%3ld %s pp[%s kkt=%.1e o=%.9e] pa[%s %.1e d=%.1e o=%+.2e] "
                "da[%s %.1e d=%.1e o=%+.2e] it=%d/%d/%d\n",
                t, N, n, reg.kind == PenaltyKind::Fused ? "fus" : "sgl",
                to_string(pp.status), pp.criterion.value, pp.objective_primal,
                to_string(pa.status), pa.criterion.value, (pa.beta - pp.beta).norm() / scale_b,
                pa.objective_primal - pp.objective_primal, to_string(da.status),
                da.criterion.value, (da.beta - pp.beta).norm() / scale_b,
                da.objective_primal - pp.objective_primal, pp.outer_iters, pa.outer_iters,
                da.outer_iters);
        }
    }
    return 0;
}
