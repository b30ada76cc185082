#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ceopt/rng.hpp"

namespace ceopt {

/// Dense multivariate Gaussian with a cached Cholesky factor.
///
/// The covariance must be symmetric (max|S - S^T| <= 1e-12) and positive
/// definite; construction throws otherwise. Fitting routines symmetrize and
/// jitter before constructing, so fitted covariances always pass.
/// Immutable after construction; density evaluation is concurrency-safe.
class MultivariateGaussian {
public:
    MultivariateGaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    /// Lower Cholesky factor L with covariance = L L^T.
    const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }

    double pdf(const Eigen::VectorXd& x) const;
    double log_pdf(const Eigen::VectorXd& x) const;

    /// count x dim matrix of draws; x = mean + L z with z iid standard normal,
    /// drawn row by row. Deterministic given the stream state.
    Eigen::MatrixXd sample(RngStream& rng, int count) const;

    /// Maximum likelihood fit: arithmetic mean and the biased (1/n) scatter
    /// matrix, then symmetrized with jitter max(1e-9 tr/d, 1e-12) on the
    /// diagonal so the factorization cannot fail on degenerate point sets.
    /// Throws on an empty sample set.
    static MultivariateGaussian fit_mle(const Eigen::MatrixXd& samples);

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd chol_lower_;
    double log_norm_; // -(d/2) log(2 pi) - sum log L_ii
};

/// Applies the shared symmetrize-plus-jitter policy to a raw scatter matrix.
Eigen::MatrixXd symmetrize_and_jitter(const Eigen::MatrixXd& cov);

/// Weighted mixture of Gaussian components sharing one dimension.
/// Weights are nonnegative and sum to 1 within 1e-12.
class GaussianMixture {
public:
    GaussianMixture(std::vector<MultivariateGaussian> components, Eigen::VectorXd weights);

    int dim() const { return components_.front().dim(); }
    int component_count() const { return static_cast<int>(components_.size()); }
    const std::vector<MultivariateGaussian>& components() const { return components_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    double pdf(const Eigen::VectorXd& x) const;
    double log_pdf(const Eigen::VectorXd& x) const;

    /// Draws a component index from the weights, then samples it.
    Eigen::MatrixXd sample(RngStream& rng, int count) const;

    Eigen::VectorXd mean() const;
    /// Overall covariance by the law of total variance.
    Eigen::MatrixXd covariance() const;

private:
    std::vector<MultivariateGaussian> components_;
    Eigen::VectorXd weights_;
};

struct EmOptions {
    int max_iters = 50;
    double tol = 1e-6; // stop when the log-likelihood gain drops below this
};

struct EmResult {
    GaussianMixture mixture;
    std::vector<double> log_likelihood; // one entry per E-step
    bool converged = false;
};

/// Expectation-maximization for a fixed number of Gaussian components,
/// starting from `init`. Responsibilities are computed in log space; a
/// component whose responsibility mass falls below 1e-8 n keeps its previous
/// mean and covariance for that update. Throws "degenerate responsibilities"
/// when every component underflows on some sample.
EmResult fit_em(const GaussianMixture& init, const Eigen::MatrixXd& samples,
                const EmOptions& options = {});

} // namespace ceopt
