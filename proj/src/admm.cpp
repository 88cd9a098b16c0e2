#include "sqrtreg/admm.hpp"

#include <chrono>
#include <cmath>

#include "sqrtreg/dro.hpp"
#include "sqrtreg/ppdna.hpp"
#include "sqrtreg/prox.hpp"

namespace sqrtreg {

namespace {

Vector row_sqnorms(const DesignMatrix& X) {
    if (!X.is_sparse()) return X.dense().rowwise().squaredNorm();
    Vector out = Vector::Zero(X.rows());
    const SparseMat& S = X.sparse();
    for (Eigen::Index j = 0; j < S.outerSize(); ++j)
        for (SparseMat::InnerIterator it(S, j); it; ++it)
            out[it.row()] += it.value() * it.value();
    return out;
}

Matrix gram(const DesignMatrix& X, bool feature_side) {
    if (!X.is_sparse()) {
        const Matrix& D = X.dense();
        return feature_side ? Matrix(D.transpose() * D) : Matrix(D * D.transpose());
    }
    const SparseMat& S = X.sparse();
    SparseMat G = feature_side ? SparseMat(S.transpose() * S) : SparseMat(S * S.transpose());
    return Matrix(G);
}

} // namespace

GramSolver::GramSolver(const DesignMatrix& X, int dense_threshold) : X_(&X) {
    const Eigen::Index N = X.rows(), n = X.cols();
    if (std::min(N, n) > dense_threshold) {
        use_pcg_ = true;
        jacobi_feature_ = (X.col_sqnorms().array() + 1.0).matrix();
        jacobi_sample_ = (row_sqnorms(X).array() + 1.0).matrix();
        return;
    }
    factored_feature_side_ = n <= N;
    Matrix G = gram(X, factored_feature_side_);
    G.diagonal().array() += 1.0;
    llt_.compute(G);
    if (llt_.info() != Eigen::Success)
        throw FactorizationFailure("I + Gram is not numerically positive definite");
}

GramSolver::Strategy GramSolver::strategy(GramSide side) const {
    if (use_pcg_) return Strategy::PCG;
    bool direct = (side == GramSide::FeatureSide) == factored_feature_side_;
    return direct ? Strategy::DirectSmall : Strategy::SMW;
}

Vector GramSolver::pcg(GramSide side, const Vector& rhs) const {
    const Vector& jd = side == GramSide::FeatureSide ? jacobi_feature_ : jacobi_sample_;
    auto apply = [&](const Vector& v) {
        return side == GramSide::FeatureSide ? Vector(v + X_->tmv(X_->mv(v)))
                                             : Vector(v + X_->mv(X_->tmv(v)));
    };
    Vector x = Vector::Zero(rhs.size());
    Vector r = rhs;
    Vector z = r.cwiseQuotient(jd);
    Vector p = z;
    double rz = r.dot(z);
    const double tol = 1e-12 * std::max(1.0, rhs.norm());
    for (int it = 0; it < 2000; ++it) {
        if (r.norm() <= tol) break;
        Vector Ap = apply(p);
        double alpha = rz / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        z = r.cwiseQuotient(jd);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    return x;
}

Vector GramSolver::solve_feature_side(const Vector& rhs) const {
    if (rhs.size() != X_->cols()) throw DimensionMismatch("feature-side solve");
    if (use_pcg_) return pcg(GramSide::FeatureSide, rhs);
    if (factored_feature_side_) return llt_.solve(rhs);
    // (I + X^T X)^{-1} = I - X^T (I + X X^T)^{-1} X
    return rhs - X_->tmv(llt_.solve(X_->mv(rhs)));
}

Vector GramSolver::solve_sample_side(const Vector& rhs) const {
    if (rhs.size() != X_->rows()) throw DimensionMismatch("sample-side solve");
    if (use_pcg_) return pcg(GramSide::NSide, rhs);
    if (!factored_feature_side_) return llt_.solve(rhs);
    // (I + X X^T)^{-1} = I - X (I + X^T X)^{-1} X^T
    return rhs - X_->mv(llt_.solve(X_->tmv(rhs)));
}

Vector solve_gram_system(const GramSolver& solver, GramSide side, const Vector& rhs) {
    return side == GramSide::FeatureSide ? solver.solve_feature_side(rhs)
                                         : solver.solve_sample_side(rhs);
}

namespace {

double elapsed_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct AdmmTermination {
    bool stop = false;
    SolveStatus status = SolveStatus::Converged;
    KKTReport crit;
};

// Shared section 4.1-style termination check on the current beta.
AdmmTermination check_beta(const Dataset& ds, const Regularizer& reg, double lambda,
                           const Vector& beta, const Vector& beta_prev, const Vector& Xb,
                           const Vector& u, double tol) {
    AdmmTermination t;
    Vector r = Xb - ds.Y;
    double rn = r.norm();
    if (rn <= overfit_threshold(ds.Y)) {
        double obj_p = rn + lambda * penalty_value(reg, beta);
        if (dual_seminorm_supported(reg, ds.n())) {
            double obj_d = dual_objective(ds, reg, lambda, u);
            t.crit = {KKTReport::Kind::PdGap,
                      (obj_p - obj_d) / (1.0 + std::fabs(obj_p) + std::fabs(obj_d))};
        } else {
            t.crit = {KKTReport::Kind::VarGap,
                      (beta - beta_prev).norm() / (1.0 + beta.norm() + beta_prev.norm())};
        }
        t.stop = true;
        t.status = SolveStatus::Overfit;
        return t;
    }
    Vector beta_bar = ds.X.tmv(r / rn);
    Vector prox = prox_penalty(beta - beta_bar, reg, lambda);
    double val = (beta - prox).norm() / (1.0 + beta.norm() + beta_bar.norm());
    t.crit = {KKTReport::Kind::Kkt, val};
    if (val < tol) {
        t.stop = true;
        t.status = SolveStatus::Converged;
    }
    return t;
}

double clamp_mu(double mu) { return std::min(std::max(mu, 1e-4), 1e4); }

} // namespace

SolveResult padmm_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg) {
    cfg.validate();
    reg.validate(ds.n());
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index N = ds.N(), n = ds.n();
    const double lambda = cfg.lambda, rho = cfg.admm_rho;
    double mu = cfg.admm_mu;
    GramSolver gs(ds.X);

    Vector beta = Vector::Zero(n), y = Vector::Zero(N), alpha = Vector::Zero(n);
    Vector u = Vector::Zero(N), xi = Vector::Zero(n);
    Vector beta_prev = beta;
    SolveResult out;

    auto finalize = [&](SolveStatus status, KKTReport crit, int iters) {
        out.beta = beta;
        out.residual_y = ds.X.mv(beta) - ds.Y;
        out.dual_u = Vector();
        out.status = status;
        out.criterion = crit;
        out.outer_iters = iters;
        out.inner_iters = 0;
        out.objective_primal = out.residual_y.norm() + lambda * penalty_value(reg, beta);
        out.objective_dual = dual_objective(ds, reg, lambda, u);
        out.wall_seconds = elapsed_seconds(t0);
        return out;
    };

    KKTReport last_crit{KKTReport::Kind::Kkt, 1.0};
    for (int k = 1; k <= cfg.admm_max_iters; ++k) {
        if (elapsed_seconds(t0) > cfg.max_time_seconds)
            return finalize(SolveStatus::TimeLimit, last_crit, k - 1);

        Vector rhs = ds.X.tmv(ds.Y + y - u / mu) + (alpha - xi / mu);
        beta_prev = beta;
        beta = gs.solve_feature_side(rhs);
        Vector Xb = ds.X.mv(beta);
        Vector y_old = y, alpha_old = alpha;
        y = prox_l2(Xb - ds.Y + u / mu, 1.0 / mu);
        alpha = prox_penalty(beta + xi / mu, reg, lambda / mu);
        u += rho * mu * (Xb - ds.Y - y);
        xi += rho * mu * (beta - alpha);

        AdmmTermination t = check_beta(ds, reg, lambda, beta, beta_prev, Xb, u, cfg.tol);
        last_crit = t.crit;
        if (t.stop) return finalize(t.status, t.crit, k);

        if (k % 50 == 0) { // residual balancing; the factorization is mu-free
            double pri = std::sqrt((Xb - ds.Y - y).squaredNorm() + (beta - alpha).squaredNorm());
            double dua = mu * std::sqrt(ds.X.tmv(y - y_old).squaredNorm() +
                                        (alpha - alpha_old).squaredNorm());
            if (pri > 10.0 * dua)
                mu = clamp_mu(2.0 * mu);
            else if (dua > 10.0 * pri)
                mu = clamp_mu(0.5 * mu);
        }
    }
    return finalize(SolveStatus::MaxIterations, last_crit, cfg.admm_max_iters);
}

SolveResult dadmm_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg) {
    cfg.validate();
    reg.validate(ds.n());
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index N = ds.N(), n = ds.n();
    const double lambda = cfg.lambda, rho = cfg.admm_rho;
    double mu = cfg.admm_mu;
    GramSolver gs(ds.X);

    Vector u = Vector::Zero(N), v = Vector::Zero(n), x = Vector::Zero(N);
    Vector beta = Vector::Zero(n), y = Vector::Zero(N);
    Vector beta_prev = beta;
    SolveResult out;

    auto finalize = [&](SolveStatus status, KKTReport crit, int iters) {
        out.beta = beta;
        out.residual_y = ds.X.mv(beta) - ds.Y;
        out.dual_u = u;
        out.status = status;
        out.criterion = crit;
        out.outer_iters = iters;
        out.inner_iters = 0;
        out.objective_primal = out.residual_y.norm() + lambda * penalty_value(reg, beta);
        out.objective_dual = dual_objective(ds, reg, lambda, u);
        out.wall_seconds = elapsed_seconds(t0);
        return out;
    };

    KKTReport last_crit{KKTReport::Kind::Kkt, 1.0};
    for (int k = 1; k <= cfg.admm_max_iters; ++k) {
        if (elapsed_seconds(t0) > cfg.max_time_seconds)
            return finalize(SolveStatus::TimeLimit, last_crit, k - 1);

        Vector rhs = -ds.Y / mu + ds.X.mv(beta / mu - v) - (y / mu - x);
        u = gs.solve_sample_side(rhs);
        Vector xtu = ds.X.tmv(u);
        Vector v_old = v, x_old = x;
        Vector z = -xtu + beta / mu;
        v = z - prox_penalty(mu * z, reg, mu * lambda) / mu; // Moreau identity
        Vector xb = u + y / mu;
        double xbn = xb.norm();
        x = xbn <= 1.0 ? xb : Vector(xb / xbn); // projection onto the unit ball
        beta_prev = beta;
        beta += rho * mu * (-xtu - v);
        y += rho * mu * (u - x);

        Vector Xb = ds.X.mv(beta);
        AdmmTermination t = check_beta(ds, reg, lambda, beta, beta_prev, Xb, u, cfg.tol);
        last_crit = t.crit;
        if (t.stop) return finalize(t.status, t.crit, k);

        if (k % 50 == 0) {
            double pri = std::sqrt((-xtu - v).squaredNorm() + (u - x).squaredNorm());
            double dua =
                mu * std::sqrt(ds.X.mv(v - v_old).squaredNorm() + (x - x_old).squaredNorm());
            if (pri > 10.0 * dua)
                mu = clamp_mu(2.0 * mu);
            else if (dua > 10.0 * pri)
                mu = clamp_mu(0.5 * mu);
        }
    }
    return finalize(SolveStatus::MaxIterations, last_crit, cfg.admm_max_iters);
}

} // namespace sqrtreg
