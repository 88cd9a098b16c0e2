#include "sqrtreg/ppdna.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>

#include "sqrtreg/dro.hpp"

namespace sqrtreg {

DualSubproblem::DualSubproblem(const Dataset& d, const Regularizer& r, double lam, double sig,
                               double ta, Vector bk, Vector yk)
    : ds(&d), reg(&r), lambda(lam), sigma(sig), tau(ta), beta_k(std::move(bk)),
      y_k(std::move(yk)) {
    rhs_lin = ds->X.mv(beta_k) - y_k - ds->Y;
}

double DualSubproblem::psi_cached(const Vector& u, const Vector& xtu) const {
    Vector beta_tilde = beta_k - xtu / sigma;
    Vector y_tilde = y_k + u / tau;
    double m_pen = moreau_envelope(MoreauTag::Penalty, *reg, beta_tilde, lambda / sigma);
    double m_loss = moreau_envelope(MoreauTag::Loss, *reg, y_tilde, 1.0 / tau);
    return u.squaredNorm() / (2.0 * tau) + xtu.squaredNorm() / (2.0 * sigma) -
           u.dot(rhs_lin) - sigma * m_pen - tau * m_loss;
}

double DualSubproblem::psi(const Vector& u) const { return psi_cached(u, ds->X.tmv(u)); }

double psi_value(const DualSubproblem& sub, const Vector& u) { return sub.psi(u); }

PsiGradient psi_gradient(const DualSubproblem& sub, const Vector& u) {
    PsiGradient out;
    Vector xtu = sub.ds->X.tmv(u);
    out.beta_cand = prox_penalty(sub.beta_k - xtu / sub.sigma, *sub.reg, sub.lambda / sub.sigma);
    out.y_cand = prox_l2(sub.y_k + u / sub.tau, 1.0 / sub.tau);
    out.grad = -sub.ds->X.mv(out.beta_cand) + out.y_cand + sub.ds->Y;
    return out;
}

namespace {

// Damped CG on (H + delta I) d = -g, monitoring the undamped residual
// ||H d + g|| = ||r + delta d||.
Vector cg_direction(const JacobianElement& H, const Vector& g, double delta, double target,
                    int max_iters, Vector d0 = Vector()) {
    const Eigen::Index N = g.size();
    Vector d = d0.size() == N ? d0 : Vector::Zero(N);
    Vector b = -g;
    Vector r = b - (H.apply(d) + delta * d);
    Vector p = r;
    double rs = r.squaredNorm();
    for (int it = 0; it < max_iters; ++it) {
        if ((r + delta * d).norm() <= target) break;
        if (rs <= 1e-30 * std::max(1.0, g.squaredNorm())) break; // damped system solved
        Vector Ap = H.apply(p) + delta * p;
        double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            if (pAp < -1e-12 * p.squaredNorm())
                throw IndefiniteOperator("negative curvature in CG");
            break; // roundoff floor
        }
        double alpha = rs / pAp;
        d += alpha * p;
        r -= alpha * Ap;
        double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    return d;
}

} // namespace

Vector newton_direction(const JacobianElement& H, const Vector& g, const SolverConfig& cfg) {
    const double gn = g.norm();
    if (gn == 0.0) return Vector::Zero(g.size());
    const double target = std::min(cfg.ssn_eta, std::pow(gn, 1.0 + cfg.ssn_varrho));
    // damping proportional to ||g|| keeps the inexact-Newton target reachable
    // as the gradient shrinks
    const double delta = std::max(cfg.damping * std::max(H.trace_estimate(), 1.0), 1e-14) *
                         std::clamp(gn, 1e-8, 1.0);
    if (H.is_zero()) return -g / delta; // scaled gradient step
    if (g.size() <= cfg.newton_dense_threshold) {
        Matrix dense = H.densify();
        dense.diagonal().array() += delta;
        Vector d = Eigen::LDLT<Matrix>(dense).solve(-g);
        if ((H.apply(d) + g).norm() <= std::max(target, 1e-14)) return d;
        return cg_direction(H, g, delta, target, cfg.cg_max_iters, d);
    }
    return cg_direction(H, g, delta, target, cfg.cg_max_iters);
}

SsnResult ssn_solve(const DualSubproblem& sub, const Vector& u0, double inner_tol,
                    const SolverConfig& cfg, int iter_cap) {
    SsnResult res;
    const DesignMatrix& X = sub.ds->X;
    Vector u = u0;
    Vector xtu = X.tmv(u);
    Vector beta_cand, y_cand;
    int j = 0;
    for (;;) {
        Vector beta_tilde = sub.beta_k - xtu / sub.sigma;
        Vector y_tilde = sub.y_k + u / sub.tau;
        beta_cand = prox_penalty(beta_tilde, *sub.reg, sub.lambda / sub.sigma);
        y_cand = prox_l2(y_tilde, 1.0 / sub.tau);
        Vector g = -X.mv(beta_cand) + y_cand + sub.ds->Y;
        res.grad_norm = g.norm();
        if (res.grad_norm <= inner_tol || j >= iter_cap) break;

        JacobianElement H = JacobianElement::build(X, beta_tilde, y_tilde, *sub.reg, sub.lambda,
                                                   sub.sigma, sub.tau);
        Vector d = newton_direction(H, g, cfg);
        double gd = g.dot(d);
        if (!(gd < 0.0)) { // inexact solve lost descent; fall back to -g
            d = -g;
            gd = -g.squaredNorm();
        }
        Vector xtd = X.tmv(d);
        double psi_u = sub.psi_cached(u, xtu);
        double alpha = 1.0;
        bool accepted = false;
        for (int pass = 0; pass < 2 && !accepted; ++pass) {
            while (alpha >= 1e-16) {
                if (sub.psi_cached(u + alpha * d, xtu + alpha * xtd) <=
                    psi_u + cfg.ls_mu * alpha * gd) {
                    accepted = true;
                    break;
                }
                alpha *= cfg.ls_rho;
            }
            if (!accepted && pass == 0) { // line-search stall: damped gradient step
                d = -g;
                gd = -g.squaredNorm();
                xtd = X.tmv(d);
                alpha = 1.0;
            }
        }
        if (!accepted) {
            res.stalled = true;
            break;
        }
        u += alpha * d;
        xtu += alpha * xtd;
        ++j;
    }
    res.u = std::move(u);
    res.beta = std::move(beta_cand);
    res.y = std::move(y_cand);
    res.iters = j;
    return res;
}

double dual_objective(const Dataset& ds, const Regularizer& reg, double lambda, const Vector& u) {
    if (u.size() == 0) return 0.0;
    double scale = std::max(1.0, u.norm());
    if (dual_seminorm_supported(reg, ds.n())) {
        Vector v = ds.X.tmv(u);
        if (reg.kind == PenaltyKind::Fused && reg.w1 == 0.0 && v.size() > 0) {
            // feasibility requires v in Range(B^T) = {sum = 0}; drop the mean
            // component (O(tol) for near-optimal u) before evaluating p_*.
            v.array() -= v.mean();
        }
        double ps = dual_seminorm(v, reg);
        if (std::isfinite(ps)) scale = std::max(scale, ps / lambda);
        else return 0.0;
    }
    return -ds.Y.dot(u) / scale;
}

namespace {

double elapsed_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

SolveResult ppa_solve(const Dataset& ds, const Regularizer& reg, const SolverConfig& cfg) {
    cfg.validate();
    reg.validate(ds.n());
    const auto t0 = std::chrono::steady_clock::now();
    const double lambda = cfg.lambda;

    SolveResult out;
    Vector beta = Vector::Zero(ds.n());
    Vector y = -ds.Y;
    Vector u = Vector::Zero(ds.N());
    double sigma = cfg.sigma0, tau = cfg.tau0;
    int inner_total = 0;

    auto finalize = [&](SolveStatus status, KKTReport crit, int outer) {
        out.beta = beta;
        out.residual_y = ds.X.mv(beta) - ds.Y;
        out.dual_u = u;
        out.status = status;
        out.criterion = crit;
        out.outer_iters = outer;
        out.inner_iters = inner_total;
        out.objective_primal = out.residual_y.norm() + lambda * penalty_value(reg, beta);
        out.objective_dual = dual_objective(ds, reg, lambda, u);
        out.wall_seconds = elapsed_seconds(t0);
        return out;
    };

    double delta_last = kkt_residual(ds, reg, lambda, beta).value;
    if (!std::isfinite(delta_last)) delta_last = 1.0;
    KKTReport last_crit{KKTReport::Kind::Kkt, delta_last};

    for (int k = 0; k < cfg.max_outer; ++k) {
        if (elapsed_seconds(t0) > cfg.max_time_seconds)
            return finalize(SolveStatus::TimeLimit, last_crit, k);
        int cap = std::min(cfg.ssn_max_iters, cfg.max_inner_total - inner_total);
        if (cap <= 0) return finalize(SolveStatus::MaxIterations, last_crit, k);

        double inner_tol =
            std::max(std::min(0.5 * delta_last, std::pow(0.5, k)) * 1e-2, 0.1 * cfg.tol);
        DualSubproblem sub(ds, reg, lambda, sigma, tau, beta, y);
        Vector u0 = cfg.ssn_warm_start ? u : Vector(Vector::Zero(ds.N()));
        SsnResult ssn = ssn_solve(sub, u0, inner_tol, cfg, cap);
        inner_total += ssn.iters;
        u = ssn.u;
        Vector beta_prev = std::move(beta);
        beta = ssn.beta;
        y = ssn.y;

        Vector r = ds.X.mv(beta) - ds.Y;
        double rn = r.norm();
        if (rn <= overfit_threshold(ds.Y)) {
            double obj_p = rn + lambda * penalty_value(reg, beta);
            KKTReport crit;
            if (dual_seminorm_supported(reg, ds.n())) {
                double obj_d = dual_objective(ds, reg, lambda, u);
                crit = {KKTReport::Kind::PdGap,
                        (obj_p - obj_d) / (1.0 + std::fabs(obj_p) + std::fabs(obj_d))};
            } else {
                double num = (beta - beta_prev).norm();
                crit = {KKTReport::Kind::VarGap,
                        num / (1.0 + beta.norm() + beta_prev.norm())};
            }
            out.kkt_history.push_back(crit.value);
            return finalize(SolveStatus::Overfit, crit, k + 1);
        }
        Vector beta_bar = ds.X.tmv(r / rn);
        Vector prox = prox_penalty(beta - beta_bar, reg, lambda);
        delta_last = (beta - prox).norm() / (1.0 + beta.norm() + beta_bar.norm());
        last_crit = {KKTReport::Kind::Kkt, delta_last};
        out.kkt_history.push_back(delta_last);
        if (delta_last < cfg.tol) return finalize(SolveStatus::Converged, last_crit, k + 1);

        sigma = std::max(cfg.prox_decay * sigma, cfg.sigma_floor);
        tau = std::max(cfg.prox_decay * tau, cfg.tau_floor);
    }
    return finalize(SolveStatus::MaxIterations, last_crit, cfg.max_outer);
}

} // namespace sqrtreg
