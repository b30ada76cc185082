#include "ceopt/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ceopt/kernels.hpp"

namespace ceopt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLengthScaleMin = 1e-3;
constexpr double kLengthScaleMax = 1e3;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * A * B.transpose();
    d2.colwise() += a2;
    d2.rowwise() += b2.transpose();
    return d2.cwiseMax(0.0);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& d2, const KernelParams& p) {
    return p.variance * (-d2 / (2.0 * p.length_scale * p.length_scale)).array().exp().matrix();
}

struct Factorization {
    Eigen::MatrixXd chol;
    Eigen::VectorXd alpha;
    double noise_used;
    double lml;
};

// Factors K + noise I, escalating the noise tenfold on failure up to 1e-2.
Factorization factor_gram(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double noise) {
    const Eigen::Index n = K.rows();
    double jitter = noise;
    while (true) {
        Eigen::MatrixXd Kn = K;
        Kn.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Kn);
        if (llt.info() == Eigen::Success) {
            Factorization f;
            f.chol = llt.matrixL();
            f.alpha = llt.solve(y);
            f.noise_used = jitter;
            double log_det_half = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                log_det_half += std::log(f.chol(i, i));
            }
            f.lml = -0.5 * y.dot(f.alpha) - log_det_half -
                    0.5 * static_cast<double>(n) * std::log(kTwoPi);
            return f;
        }
        const double next = jitter == 0.0 ? 1e-10 : jitter * 10.0;
        if (next > 1e-2) {
            throw std::runtime_error("gp_fit: ill-conditioned Gram matrix");
        }
        jitter = next;
    }
}

} // namespace

void KernelParams::validate() const {
    if (!(std::isfinite(variance) && variance > 0.0)) {
        throw std::invalid_argument("KernelParams: variance must be finite and positive");
    }
    if (!(std::isfinite(length_scale) && length_scale > 0.0)) {
        throw std::invalid_argument("KernelParams: length_scale must be finite and positive");
    }
    if (!(std::isfinite(noise) && noise >= 0.0)) {
        throw std::invalid_argument("KernelParams: noise must be finite and nonnegative");
    }
}

double median_pairwise_distance(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            d.push_back((X.row(i) - X.row(j)).norm());
        }
    }
    if (d.empty()) {
        return 0.0;
    }
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return d[d.size() / 2];
}

double kernel_se(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("kernel_se: dimension mismatch");
    }
    const double d2 = (a - b).squaredNorm();
    return params.variance * std::exp(-d2 / (2.0 * params.length_scale * params.length_scale));
}

LmlValueGrad lml_value_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const KernelParams& params) {
    const Eigen::MatrixXd d2 = squared_distances(X, X);
    const Eigen::MatrixXd Kse = gram(d2, params);
    const Factorization f = factor_gram(Kse, y, params.noise);

    // d LML / d theta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::MatrixXd Kn = Kse;
    Kn.diagonal().array() += f.noise_used;
    llt.compute(Kn);
    const Eigen::MatrixXd Kinv =
        llt.solve(Eigen::MatrixXd::Identity(X.rows(), X.rows()));
    const Eigen::MatrixXd W = f.alpha * f.alpha.transpose() - Kinv;

    // dK/d log variance = Kse; dK/d log length = Kse .* d2 / l^2
    const double l2 = params.length_scale * params.length_scale;
    LmlValueGrad out;
    out.value = f.lml;
    out.d_log_variance = 0.5 * W.cwiseProduct(Kse).sum();
    out.d_log_length = 0.5 * W.cwiseProduct(Kse.cwiseProduct(d2 / l2)).sum();
    return out;
}

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     KernelParams params, bool optimize) {
    params.validate();
    const Eigen::Index n = X.rows();
    if (n == 0) {
        throw std::invalid_argument("gp_fit: empty training set");
    }
    if (y.size() != n) {
        throw std::invalid_argument("gp_fit: target count does not match inputs");
    }

    GaussianProcess gp;
    gp.X_ = X;
    gp.y_ = y;
    gp.y_mean_ = y.mean();
    const double var = (y.array() - gp.y_mean_).square().mean();
    // The std floor is relative to the target magnitude: an absolute floor
    // would flatten genuinely tiny-scale data (far-field objective values) to
    // a constant and blind the surrogate.
    gp.y_scale_ =
        std::max({std::sqrt(var), 1e-12 * std::abs(gp.y_mean_), 1e-300});
    const Eigen::VectorXd z = (y.array() - gp.y_mean_).matrix() / gp.y_scale_;

    if (optimize) {
        // Backtracking ascent on the log marginal likelihood along the
        // normalized gradient direction; step is a bounded move in log
        // hyperparameter space so extreme gradients cannot overflow a trial.
        const auto ascend = [&X, &z](KernelParams start, int max_iters) {
            double log_var = std::log(start.variance);
            double log_len = std::log(start.length_scale);
            LmlValueGrad cur = lml_value_grad(X, z, start);
            double step = 0.5;
            for (int iter = 0; iter < max_iters; ++iter) {
                const double gnorm = std::hypot(cur.d_log_variance, cur.d_log_length);
                if (gnorm < 1e-10) {
                    break;
                }
                bool accepted = false;
                while (step >= 1e-12) {
                    KernelParams trial = start;
                    trial.variance = std::exp(log_var + step * cur.d_log_variance / gnorm);
                    trial.length_scale =
                        std::clamp(std::exp(log_len + step * cur.d_log_length / gnorm),
                                   kLengthScaleMin, kLengthScaleMax);
                    LmlValueGrad next;
                    try {
                        next = lml_value_grad(X, z, trial);
                    } catch (const std::runtime_error&) {
                        step *= 0.5;
                        continue;
                    }
                    if (next.value >= cur.value) {
                        log_var = std::log(trial.variance);
                        log_len = std::log(trial.length_scale);
                        const double gain = next.value - cur.value;
                        start = trial;
                        cur = next;
                        step = std::min(step * 1.5, 2.0);
                        accepted = true;
                        if (gain < 1e-9) {
                            iter = max_iters; // converged
                        }
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) {
                    break;
                }
            }
            return std::pair<KernelParams, double>(start, cur.value);
        };

        // The length-scale gradient underflows when every pairwise distance
        // is far beyond the current length scale, so ascent from a single
        // start can stall at its initialization. Restart from data-scale
        // length scales (median pairwise distance) and keep the best
        // likelihood; the 100-step budget is split across starts.
        std::vector<KernelParams> starts{params};
        const double med = median_pairwise_distance(X);
        if (med > 0.0) {
            for (const double scale : {med, med / 10.0}) {
                KernelParams s = params;
                s.length_scale = std::clamp(scale, kLengthScaleMin, kLengthScaleMax);
                if (std::abs(std::log(s.length_scale / params.length_scale)) > 1e-6) {
                    starts.push_back(s);
                }
            }
        }
        const int per_start = 100 / static_cast<int>(starts.size());
        bool have = false;
        double best_lml = 0.0;
        KernelParams best = params;
        for (const KernelParams& s : starts) {
            try {
                const auto [p, lml] = ascend(s, per_start);
                if (!have || lml > best_lml) {
                    have = true;
                    best_lml = lml;
                    best = p;
                }
            } catch (const std::runtime_error&) {
                // start not factorizable; skip it
            }
        }
        if (have) {
            params = best;
        }
    }

    const Eigen::MatrixXd d2 = squared_distances(X, X);
    const Factorization f = factor_gram(gram(d2, params), z, params.noise);
    params.noise = f.noise_used;
    gp.params_ = params;
    gp.chol_ = f.chol;
    gp.alpha_ = f.alpha;
    gp.lml_ = f.lml;
    return gp;
}

Eigen::VectorXd GaussianProcess::predict_mean(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != X_.cols()) {
        throw std::invalid_argument("predict_mean: dimension mismatch");
    }
    const Eigen::Index q = Xq.rows();
    Eigen::VectorXd out(q);
    if (X_.cols() == 2) {
        // Fast path: one SE term per training point, evaluated by the batch kernel.
        const double inv_l2 = 1.0 / (params_.length_scale * params_.length_scale);
        std::vector<kernels::GaussTerm2> terms(X_.rows());
        for (Eigen::Index i = 0; i < X_.rows(); ++i) {
            terms[i] = {X_(i, 0), X_(i, 1), inv_l2, 0.0, inv_l2,
                        alpha_(i) * params_.variance};
        }
        const Eigen::VectorXd xs = Xq.col(0);
        const Eigen::VectorXd ys = Xq.col(1);
        kernels::weighted_exp_quad2(xs.data(), ys.data(), static_cast<std::size_t>(q),
                                    terms.data(), terms.size(), out.data());
    } else {
        const Eigen::MatrixXd Kq = gram(squared_distances(Xq, X_), params_);
        out = Kq * alpha_;
    }
    return (out.array() * y_scale_ + y_mean_).matrix();
}

double GaussianProcess::predict_mean_at(const Eigen::VectorXd& x) const {
    return predict_mean(x.transpose())(0);
}

Eigen::VectorXd GaussianProcess::predict_variance(const Eigen::MatrixXd& Xq) const {
    if (Xq.cols() != X_.cols()) {
        throw std::invalid_argument("predict_variance: dimension mismatch");
    }
    const Eigen::MatrixXd Kq = gram(squared_distances(Xq, X_), params_);
    const Eigen::MatrixXd V =
        chol_.triangularView<Eigen::Lower>().solve(Kq.transpose());
    const Eigen::VectorXd reduction = V.colwise().squaredNorm();
    const double prior = params_.variance;
    const Eigen::VectorXd var = (prior - reduction.array()).max(0.0).matrix();
    return var * (y_scale_ * y_scale_);
}

} // namespace ceopt
