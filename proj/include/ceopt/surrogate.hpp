#pragma once

#include <Eigen/Dense>

namespace ceopt {

/// Squared-exponential kernel hyperparameters.
struct KernelParams {
    double variance = 1.0;     // signal variance sigma^2
    double length_scale = 1.0; // characteristic length l
    double noise = 1e-6;       // observation noise sigma_n^2 added to the Gram diagonal

    void validate() const;
};

/// k(x, x') = variance * exp(-|x - x'|^2 / (2 l^2)).
double kernel_se(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params);

/// Log marginal likelihood of targets y under the SE kernel, with analytic
/// gradient in (log variance, log length_scale). Used by the fit optimizer;
/// exposed so the gradient can be checked against finite differences.
struct LmlValueGrad {
    double value;
    double d_log_variance;
    double d_log_length;
};
LmlValueGrad lml_value_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const KernelParams& params);

/// Median of all pairwise Euclidean distances between rows; 0 for n < 2.
/// The usual data-scale heuristic for length scales.
double median_pairwise_distance(const Eigen::MatrixXd& X);

/// Zero-mean Gaussian-process regression with the squared-exponential kernel.
///
/// Targets are standardized internally (mean subtracted, scaled by the
/// standard deviation, floor 1e-12) so the zero-mean prior is centered on the
/// data; predictions are mapped back. Far from all training points the
/// posterior mean reverts to the training-target mean.
///
/// Fitting factors K + noise*I once; on factorization failure the noise is
/// escalated tenfold up to 1e-2 before giving up. With optimize set, the log
/// marginal likelihood is maximized over (log variance, log length_scale) by
/// backtracking gradient ascent restarted from data-scale length scales
/// (100-step budget overall; length_scale clamped to [1e-3, 1e3]).
///
/// Immutable after fit; concurrent predictions are safe.
class GaussianProcess {
public:
    static GaussianProcess fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               KernelParams params, bool optimize);

    /// Posterior mean at each query row: k(Xq, X) alpha, unstandardized.
    Eigen::VectorXd predict_mean(const Eigen::MatrixXd& Xq) const;
    double predict_mean_at(const Eigen::VectorXd& x) const;

    /// Posterior variance at each query row. Diagnostic only; the optimizers
    /// consume point estimates.
    Eigen::VectorXd predict_variance(const Eigen::MatrixXd& Xq) const;

    /// Log marginal likelihood of the (standardized) training targets.
    double log_marginal_likelihood() const { return lml_; }

    const KernelParams& kernel() const { return params_; }
    const Eigen::MatrixXd& train_inputs() const { return X_; }
    const Eigen::VectorXd& train_targets() const { return y_; }
    int dim() const { return static_cast<int>(X_.cols()); }

private:
    GaussianProcess() = default;

    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;      // raw targets
    Eigen::VectorXd alpha_;  // (K + noise I)^-1 y_std
    Eigen::MatrixXd chol_;   // lower factor of K + noise I
    KernelParams params_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    double lml_ = 0.0;
};

} // namespace ceopt
