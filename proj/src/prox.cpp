#include "sqrtreg/prox.hpp"

#include <cmath>

namespace sqrtreg {

Vector prox_l1(const Vector& x, double kappa) {
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double a = std::fabs(x[i]) - kappa;
        out[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
    }
    return out;
}

Vector prox_l2(const Vector& x, double kappa) {
    double nx = x.norm();
    if (nx <= kappa) return Vector::Zero(x.size());
    return (1.0 - kappa / nx) * x;
}

// Direct taut-string scan (Condat's formulation): one left-to-right pass
// maintaining the running bounds of the admissible tube; segment values are
// written once, so ties inside a segment are exact.
Vector prox_tv1d(const Vector& y, double lambda) {
    const Eigen::Index n = y.size();
    Vector x(n);
    if (n == 0) return x;
    if (n == 1 || lambda <= 0.0) {
        x = y;
        return x;
    }
    Eigen::Index k = 0, k0 = 0, kminus = 0, kplus = 0;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;
    double umin = lambda, umax = -lambda;
    const double twolambda = 2.0 * lambda, minlambda = -lambda;
    for (;;) {
        while (k == n - 1) {
            if (umin < 0.0) { // the string must jump down at kminus
                do {
                    x[k0++] = vmin;
                } while (k0 <= kminus);
                k = kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + lambda - vmax;
            } else if (umax > 0.0) { // the string must jump up at kplus
                do {
                    x[k0++] = vmax;
                } while (k0 <= kplus);
                k = kplus = k0;
                vmax = y[k];
                umax = minlambda;
                umin = vmax + minlambda - vmin;
            } else { // last segment absorbs the remaining slack
                vmin += umin / static_cast<double>(k - k0 + 1);
                do {
                    x[k0++] = vmin;
                } while (k0 <= k);
                return x;
            }
            if (k0 > n - 1) return x;
        }
        umin += y[k + 1] - vmin;
        if (umin < minlambda) { // negative jump necessary
            do {
                x[k0++] = vmin;
            } while (k0 <= kminus);
            k = kminus = kplus = k0;
            vmin = y[k];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
            continue;
        }
        umax += y[k + 1] - vmax;
        if (umax > lambda) { // positive jump necessary
            do {
                x[k0++] = vmax;
            } while (k0 <= kplus);
            k = kminus = kplus = k0;
            vmax = y[k];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
            continue;
        }
        // no jump: extend the segment, keep the bounds taut
        ++k;
        if (umin >= lambda) {
            vmin += (umin - lambda) / static_cast<double>(k - k0 + 1);
            umin = lambda;
            kminus = k;
        }
        if (umax <= minlambda) {
            vmax += (umax + lambda) / static_cast<double>(k - k0 + 1);
            umax = minlambda;
            kplus = k;
        }
    }
}

Vector prox_sparse_group(const Vector& x, const Regularizer& reg, double kappa) {
    Vector out(x.size());
    const auto& gs = reg.groups;
    for (int l = 0; l < gs.num_groups(); ++l) {
        const auto& g = gs.groups[static_cast<std::size_t>(l)];
        Vector sub(static_cast<Eigen::Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (g[k] >= x.size()) throw DimensionMismatch("prox_sparse_group");
            sub[static_cast<Eigen::Index>(k)] = x[g[k]];
        }
        Vector z = prox_l2(prox_l1(sub, kappa * reg.w1), kappa * reg.w2 * gs.weights[l]);
        for (std::size_t k = 0; k < g.size(); ++k)
            out[g[k]] = z[static_cast<Eigen::Index>(k)];
    }
    return out;
}

Vector prox_fused(const Vector& x, const Regularizer& reg, double kappa) {
    return prox_l1(prox_tv1d(x, kappa * reg.w2), kappa * reg.w1);
}

Vector prox_penalty(const Vector& x, const Regularizer& reg, double kappa) {
    return reg.kind == PenaltyKind::SparseGroup ? prox_sparse_group(x, reg, kappa)
                                                : prox_fused(x, reg, kappa);
}

double moreau_envelope(MoreauTag tag, const Regularizer& reg, const Vector& x, double kappa) {
    if (tag == MoreauTag::Loss) {
        Vector z = prox_l2(x, kappa);
        return kappa * z.norm() + 0.5 * (x - z).squaredNorm();
    }
    Vector z = prox_penalty(x, reg, kappa);
    return kappa * penalty_value(reg, z) + 0.5 * (x - z).squaredNorm();
}

LossJacobian jac_loss(const Vector& y_tilde, double tau) {
    LossJacobian out;
    const double kappa = 1.0 / tau;
    double ny = y_tilde.norm();
    if (ny <= kappa) return out;
    out.zero = false;
    out.diag_scale = 1.0 - kappa / ny;
    out.rank1_scale = kappa / (ny * ny * ny);
    out.y_tilde = y_tilde;
    return out;
}

Vector LossJacobian::apply(const Vector& w) const {
    if (zero) return Vector::Zero(w.size());
    return diag_scale * w + rank1_scale * y_tilde.dot(w) * y_tilde;
}

JacobianElement JacobianElement::sparse_group(const DesignMatrix& X, const Vector& beta_tilde,
                                              const Vector& y_tilde, const Regularizer& reg,
                                              double lambda, double sigma, double tau) {
    JacobianElement H;
    H.X_ = &X;
    H.kind_ = PenaltyKind::SparseGroup;
    H.inv_sigma_ = 1.0 / sigma;
    const double kappa1 = lambda * reg.w1 / sigma;
    const auto& gs = reg.groups;
    for (int l = 0; l < gs.num_groups(); ++l) {
        const auto& g = gs.groups[static_cast<std::size_t>(l)];
        const double kappa2 = lambda * reg.w2 * gs.weights[l] / sigma;
        double sq = 0.0;
        std::vector<int> active;
        std::vector<double> zvals;
        for (int j : g) {
            double a = std::fabs(beta_tilde[j]) - kappa1;
            if (a > 0.0) {
                double z = beta_tilde[j] > 0.0 ? a : -a;
                active.push_back(j);
                zvals.push_back(z);
                sq += z * z;
            }
        }
        double nz = std::sqrt(sq);
        if (nz <= kappa2 || active.empty()) continue; // V block is zero
        ActiveGroup ag;
        ag.cols = std::move(active);
        ag.diag_scale = 1.0 - kappa2 / nz;
        ag.rank1_scale = kappa2 / (nz * nz * nz);
        ag.z = Eigen::Map<const Vector>(zvals.data(), static_cast<Eigen::Index>(zvals.size()));
        H.groups_.push_back(std::move(ag));
    }
    LossJacobian lj = jac_loss(y_tilde, tau);
    H.loss_zero_ = lj.zero;
    if (!lj.zero) {
        H.loss_diag_ = lj.diag_scale / tau;
        H.loss_rank1_ = lj.rank1_scale / tau;
        H.y_tilde_ = y_tilde;
    }
    // trace estimate for the CG damping scale
    Vector sq = X.col_sqnorms();
    double tr = 0.0;
    for (const auto& ag : H.groups_)
        for (int j : ag.cols) tr += H.inv_sigma_ * sq[j];
    if (!H.loss_zero_) tr += H.loss_diag_ * static_cast<double>(X.rows());
    H.trace_est_ = tr;
    return H;
}

JacobianElement JacobianElement::fused(const DesignMatrix& X, const Vector& beta_tilde,
                                       const Vector& y_tilde, const Regularizer& reg,
                                       double lambda, double sigma, double tau) {
    JacobianElement H;
    H.X_ = &X;
    H.kind_ = PenaltyKind::Fused;
    H.inv_sigma_ = 1.0 / sigma;
    const double kappa1 = lambda * reg.w1 / sigma;
    const double kappa2 = lambda * reg.w2 / sigma;
    const Eigen::Index n = beta_tilde.size();

    Vector z = prox_tv1d(beta_tilde, kappa2);
    // Fused-run partition: i and i+1 belong to one run when (Bz)_i = 0, with
    // an exact-zero test relative to ||z||_inf. z is constant inside each run
    // by construction of the taut-string scan, so the U mask is constant on
    // runs too.
    const double tie_tol = 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>());
    std::vector<std::pair<int, int>> active_runs;
    int begin = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        bool fused_next = (i + 1 < n) && std::fabs(z[i] - z[i + 1]) <= tie_tol;
        if (!fused_next) { // the run [begin, i] ends here
            if (std::fabs(z[begin]) > kappa1)
                active_runs.emplace_back(begin, static_cast<int>(i) + 1);
            begin = static_cast<int>(i) + 1;
        }
    }
    // cache the run column sums unless the memory would be excessive
    bool cache = static_cast<long>(active_runs.size()) * X.rows() <= 20'000'000L;
    H.runs_cached_ = cache;
    for (auto [b, e] : active_runs) {
        ActiveRun r;
        r.begin = b;
        r.end = e;
        if (cache) r.col_sum = X.col_range_sum(b, e);
        H.runs_.push_back(std::move(r));
    }
    LossJacobian lj = jac_loss(y_tilde, tau);
    H.loss_zero_ = lj.zero;
    if (!lj.zero) {
        H.loss_diag_ = lj.diag_scale / tau;
        H.loss_rank1_ = lj.rank1_scale / tau;
        H.y_tilde_ = y_tilde;
    }
    Vector sq = X.col_sqnorms();
    double tr = 0.0;
    for (const auto& r : H.runs_) {
        double m = static_cast<double>(r.end - r.begin);
        for (int j = r.begin; j < r.end; ++j) tr += H.inv_sigma_ * sq[j] / m;
    }
    if (!H.loss_zero_) tr += H.loss_diag_ * static_cast<double>(X.rows());
    H.trace_est_ = tr;
    return H;
}

JacobianElement JacobianElement::build(const DesignMatrix& X, const Vector& beta_tilde,
                                       const Vector& y_tilde, const Regularizer& reg,
                                       double lambda, double sigma, double tau) {
    return reg.kind == PenaltyKind::SparseGroup
               ? sparse_group(X, beta_tilde, y_tilde, reg, lambda, sigma, tau)
               : fused(X, beta_tilde, y_tilde, reg, lambda, sigma, tau);
}

Vector JacobianElement::apply(const Vector& w) const {
    Vector out = Vector::Zero(w.size());
    if (kind_ == PenaltyKind::SparseGroup) {
        for (const auto& ag : groups_) {
            Vector t = X_->gather_dot(ag.cols, w);
            double zdot = ag.z.dot(t);
            Vector s = ag.diag_scale * t + ag.rank1_scale * zdot * ag.z;
            s *= inv_sigma_;
            X_->scatter_add(ag.cols, s, out);
            cols_touched_ += 2 * static_cast<long>(ag.cols.size());
        }
    } else {
        for (const auto& r : runs_) {
            double m = static_cast<double>(r.end - r.begin);
            if (runs_cached_) {
                out += (inv_sigma_ / m) * r.col_sum.dot(w) * r.col_sum;
                cols_touched_ += r.end - r.begin;
            } else {
                Vector cs = X_->col_range_sum(r.begin, r.end);
                out += (inv_sigma_ / m) * cs.dot(w) * cs;
                cols_touched_ += 2L * (r.end - r.begin);
            }
        }
    }
    if (!loss_zero_) out += loss_diag_ * w + loss_rank1_ * y_tilde_.dot(w) * y_tilde_;
    return out;
}

Matrix JacobianElement::densify() const {
    const Eigen::Index N = X_->rows();
    Matrix H = Matrix::Zero(N, N);
    if (kind_ == PenaltyKind::SparseGroup) {
        for (const auto& ag : groups_) {
            Matrix A = X_->gather_cols(ag.cols);
            H.noalias() += (inv_sigma_ * ag.diag_scale) * A * A.transpose();
            Vector az = A * ag.z;
            H.noalias() += (inv_sigma_ * ag.rank1_scale) * az * az.transpose();
        }
    } else {
        for (const auto& r : runs_) {
            double m = static_cast<double>(r.end - r.begin);
            Vector cs = runs_cached_ ? r.col_sum : X_->col_range_sum(r.begin, r.end);
            H.noalias() += (inv_sigma_ / m) * cs * cs.transpose();
        }
    }
    if (!loss_zero_) {
        H.diagonal().array() += loss_diag_;
        H.noalias() += loss_rank1_ * y_tilde_ * y_tilde_.transpose();
    }
    return H;
}

long JacobianElement::active_columns() const {
    long s = 0;
    for (const auto& ag : groups_) s += static_cast<long>(ag.cols.size());
    for (const auto& r : runs_) s += r.end - r.begin;
    return s;
}

} // namespace sqrtreg
