#pragma once

#include "sqrtreg/model.hpp"

namespace sqrtreg {

/// Elementwise soft threshold: prox of kappa ||.||_1.
Vector prox_l1(const Vector& x, double kappa);

/// Block soft threshold: prox of kappa ||.||, zero when ||x|| <= kappa.
Vector prox_l2(const Vector& x, double kappa);

/// prox of kappa ||.|| on R^N (shared with prox_l2; the loss is the Euclidean
/// norm of the residual vector).
inline Vector prox_sqrt_loss(const Vector& x, double kappa) { return prox_l2(x, kappa); }

/// 1-D total variation: argmin_y kappa ||By||_1 + 1/2 ||x - y||^2 by a direct
/// taut-string scan. Output is piecewise constant with exact ties inside each
/// segment.
Vector prox_tv1d(const Vector& x, double kappa);

/// prox of kappa p for the sparse group Lasso penalty: per group,
/// prox_l2(prox_l1(x_G, kappa w1), kappa w2 omega_l).
Vector prox_sparse_group(const Vector& x, const Regularizer& reg, double kappa);

/// prox of kappa p for the fused Lasso penalty: TV step then soft threshold.
Vector prox_fused(const Vector& x, const Regularizer& reg, double kappa);

/// prox of kappa p, dispatching on the penalty kind.
Vector prox_penalty(const Vector& x, const Regularizer& reg, double kappa);

enum class MoreauTag { Penalty, Loss };

/// M_f(x) = f(prox_f(x)) + 1/2 ||x - prox_f(x)||^2 with f = kappa p (Penalty)
/// or f = kappa ||.|| (Loss).
double moreau_envelope(MoreauTag tag, const Regularizer& reg, const Vector& x, double kappa);

/// One explicit element of the generalized Jacobian of the map
///   u -> -X prox_{(lambda/sigma) p}(beta_k - X^T u / sigma)
///        + prox_{(1/tau)||.||}(y_k + u / tau) + Y,
/// i.e. H = sigma^{-1} X U X^T + tau^{-1} V, stored structurally so that
/// applying it touches only active groups / fused runs and the corresponding
/// columns of X.
class JacobianElement {
public:
    struct ActiveGroup {
        std::vector<int> cols;  // global column indices of active coordinates
        double diag_scale;      // 1 - kappa2/||z||
        double rank1_scale;     // kappa2/||z||^3
        Vector z;               // prox_l1 output restricted to cols
    };
    struct ActiveRun {
        int begin, end;         // column range [begin, end)
        Vector col_sum;         // sum of the run's columns of X (cached when small)
    };

    static JacobianElement sparse_group(const DesignMatrix& X, const Vector& beta_tilde,
                                        const Vector& y_tilde, const Regularizer& reg,
                                        double lambda, double sigma, double tau);
    static JacobianElement fused(const DesignMatrix& X, const Vector& beta_tilde,
                                 const Vector& y_tilde, const Regularizer& reg,
                                 double lambda, double sigma, double tau);
    static JacobianElement build(const DesignMatrix& X, const Vector& beta_tilde,
                                 const Vector& y_tilde, const Regularizer& reg,
                                 double lambda, double sigma, double tau);

    Vector apply(const Vector& w) const; // H w
    Matrix densify() const;              // N x N, small N only

    bool is_zero() const { return groups_.empty() && runs_.empty() && loss_zero_; }
    double trace_estimate() const { return trace_est_; }

    /// Number of distinct columns of X an apply touches (second-order
    /// sparsity accounting).
    long active_columns() const;

    /// Columns touched across all apply() calls so far.
    long cols_touched() const { return cols_touched_; }

    bool loss_zero() const { return loss_zero_; }
    double loss_diag_scale() const { return loss_diag_; }   // (1 - kappa/||y~||) / tau
    double loss_rank1_scale() const { return loss_rank1_; } // kappa / (tau ||y~||^3)
    const Vector& loss_vector() const { return y_tilde_; }

    const std::vector<ActiveGroup>& active_groups() const { return groups_; }
    const std::vector<ActiveRun>& active_runs() const { return runs_; }

private:
    const DesignMatrix* X_ = nullptr;
    PenaltyKind kind_ = PenaltyKind::SparseGroup;
    double inv_sigma_ = 0.0;
    std::vector<ActiveGroup> groups_;
    std::vector<ActiveRun> runs_;
    bool runs_cached_ = false;
    bool loss_zero_ = true;
    double loss_diag_ = 0.0;
    double loss_rank1_ = 0.0;
    Vector y_tilde_;
    double trace_est_ = 0.0;
    mutable long cols_touched_ = 0;
};

/// Loss-side record V_{1/tau}(y_tilde) alone (zero flag when ||y~|| <= 1/tau).
struct LossJacobian {
    bool zero = true;
    double diag_scale = 0.0;  // 1 - kappa/||y~||
    double rank1_scale = 0.0; // kappa/||y~||^3
    Vector y_tilde;

    Vector apply(const Vector& w) const;
};

LossJacobian jac_loss(const Vector& y_tilde, double tau);

} // namespace sqrtreg
