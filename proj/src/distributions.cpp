#include "ceopt/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ceopt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_dim(int have, int want, const char* what) {
    if (have != want) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(have) + " vs " + std::to_string(want) + ")");
    }
}

} // namespace

MultivariateGaussian::MultivariateGaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (d == 0) {
        throw std::invalid_argument("MultivariateGaussian: empty mean");
    }
    if (covariance_.rows() != d || covariance_.cols() != d) {
        throw std::invalid_argument("MultivariateGaussian: covariance shape does not match mean");
    }
    const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12)) {
        throw std::invalid_argument("MultivariateGaussian: covariance not symmetric (max|S - S^T| = " +
                                    std::to_string(asym) + ")");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("MultivariateGaussian: covariance not positive definite");
    }
    chol_lower_ = llt.matrixL();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        log_det_half += std::log(chol_lower_(i, i));
    }
    log_norm_ = -0.5 * static_cast<double>(d) * std::log(kTwoPi) - log_det_half;
}

double MultivariateGaussian::log_pdf(const Eigen::VectorXd& x) const {
    check_dim(static_cast<int>(x.size()), dim(), "log_pdf");
    // Quadratic form via a triangular solve against the cached factor.
    const Eigen::VectorXd u =
        chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
    return log_norm_ - 0.5 * u.squaredNorm();
}

double MultivariateGaussian::pdf(const Eigen::VectorXd& x) const {
    return std::exp(log_pdf(x));
}

Eigen::MatrixXd MultivariateGaussian::sample(RngStream& rng, int count) const {
    if (count < 0) {
        throw std::invalid_argument("sample: negative count");
    }
    const int d = dim();
    Eigen::MatrixXd out(count, d);
    Eigen::VectorXd z(d);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < d; ++j) {
            z(j) = rng.normal();
        }
        out.row(i) = (mean_ + chol_lower_ * z).transpose();
    }
    return out;
}

Eigen::MatrixXd symmetrize_and_jitter(const Eigen::MatrixXd& cov) {
    Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    const double d = static_cast<double>(sym.rows());
    const double jitter = std::max(1e-9 * sym.trace() / d, 1e-12);
    sym.diagonal().array() += jitter;
    return sym;
}

MultivariateGaussian MultivariateGaussian::fit_mle(const Eigen::MatrixXd& samples) {
    const Eigen::Index n = samples.rows();
    if (n == 0) {
        throw std::invalid_argument("fit_mle: empty elite set");
    }
    const Eigen::VectorXd mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
    const Eigen::MatrixXd scatter =
        centered.transpose() * centered / static_cast<double>(n);
    return MultivariateGaussian(mean, symmetrize_and_jitter(scatter));
}

GaussianMixture::GaussianMixture(std::vector<MultivariateGaussian> components,
                                 Eigen::VectorXd weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
    if (components_.empty()) {
        throw std::invalid_argument("GaussianMixture: needs at least one component");
    }
    if (weights_.size() != static_cast<Eigen::Index>(components_.size())) {
        throw std::invalid_argument("GaussianMixture: weight count does not match components");
    }
    const int d = components_.front().dim();
    for (const auto& c : components_) {
        check_dim(c.dim(), d, "GaussianMixture component");
    }
    if ((weights_.array() < 0.0).any()) {
        throw std::invalid_argument("GaussianMixture: negative weight");
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("GaussianMixture: weights sum to " + std::to_string(total));
    }
}

double GaussianMixture::pdf(const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (int i = 0; i < component_count(); ++i) {
        acc += weights_(i) * components_[i].pdf(x);
    }
    return acc;
}

double GaussianMixture::log_pdf(const Eigen::VectorXd& x) const {
    // log-sum-exp over per-component log densities
    const int n = component_count();
    Eigen::VectorXd terms(n);
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        terms(i) = weights_(i) > 0.0
                       ? std::log(weights_(i)) + components_[i].log_pdf(x)
                       : -std::numeric_limits<double>::infinity();
        hi = std::max(hi, terms(i));
    }
    if (!std::isfinite(hi)) {
        return -std::numeric_limits<double>::infinity();
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += std::exp(terms(i) - hi);
    }
    return hi + std::log(acc);
}

Eigen::MatrixXd GaussianMixture::sample(RngStream& rng, int count) const {
    if (count < 0) {
        throw std::invalid_argument("sample: negative count");
    }
    const int d = dim();
    Eigen::MatrixXd out(count, d);
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        double cum = 0.0;
        int pick = component_count() - 1;
        for (int j = 0; j < component_count(); ++j) {
            cum += weights_(j);
            if (u < cum) {
                pick = j;
                break;
            }
        }
        out.row(i) = components_[pick].sample(rng, 1);
    }
    return out;
}

Eigen::VectorXd GaussianMixture::mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
    for (int i = 0; i < component_count(); ++i) {
        m += weights_(i) * components_[i].mean();
    }
    return m;
}

Eigen::MatrixXd GaussianMixture::covariance() const {
    const Eigen::VectorXd m = mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < component_count(); ++i) {
        const Eigen::VectorXd dm = components_[i].mean() - m;
        cov += weights_(i) * (components_[i].covariance() + dm * dm.transpose());
    }
    return cov;
}

EmResult fit_em(const GaussianMixture& init, const Eigen::MatrixXd& samples,
                const EmOptions& options) {
    const Eigen::Index n = samples.rows();
    if (n == 0) {
        throw std::invalid_argument("fit_em: empty sample set");
    }
    check_dim(static_cast<int>(samples.cols()), init.dim(), "fit_em");

    const int k = init.component_count();
    std::vector<MultivariateGaussian> comps = init.components();
    Eigen::VectorXd weights = init.weights();

    std::vector<double> ll_history;
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool converged = false;

    Eigen::MatrixXd resp(n, k);
    for (int iter = 0; iter < options.max_iters; ++iter) {
        // E-step in log space
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd x = samples.row(i).transpose();
            double hi = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double t = weights(j) > 0.0
                                     ? std::log(weights(j)) + comps[j].log_pdf(x)
                                     : -std::numeric_limits<double>::infinity();
                resp(i, j) = t;
                hi = std::max(hi, t);
            }
            if (!std::isfinite(hi)) {
                throw std::runtime_error("fit_em: degenerate responsibilities");
            }
            double row_sum = 0.0;
            for (int j = 0; j < k; ++j) {
                resp(i, j) = std::exp(resp(i, j) - hi);
                row_sum += resp(i, j);
            }
            resp.row(i) /= row_sum;
            ll += hi + std::log(row_sum);
        }
        ll_history.push_back(ll);

        // M-step: weighted MLE per component. Components starved of
        // responsibility mass keep their previous parameters.
        for (int j = 0; j < k; ++j) {
            const double mass = resp.col(j).sum();
            weights(j) = mass / static_cast<double>(n);
            if (mass < 1e-8 * static_cast<double>(n)) {
                continue;
            }
            const Eigen::VectorXd mu = (samples.transpose() * resp.col(j)) / mass;
            const Eigen::MatrixXd centered = samples.rowwise() - mu.transpose();
            const Eigen::MatrixXd scatter =
                centered.transpose() * resp.col(j).asDiagonal() * centered / mass;
            comps[j] = MultivariateGaussian(mu, symmetrize_and_jitter(scatter));
        }
        // Renormalize against drift so the mixture invariant keeps holding.
        weights /= weights.sum();

        if (iter > 0 && ll - prev_ll < options.tol) {
            converged = true;
            prev_ll = ll;
            break;
        }
        prev_ll = ll;
    }

    return EmResult{GaussianMixture(std::move(comps), std::move(weights)),
                    std::move(ll_history), converged};
}

} // namespace ceopt
