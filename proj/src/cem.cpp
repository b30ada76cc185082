#include "ceopt/cem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ceopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_point(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x(i);
    }
    os << "]";
    return os.str();
}

Eigen::VectorXd evaluate_all(Objective& objective, const Eigen::MatrixXd& X) {
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        y(i) = objective(X.row(i).transpose());
    }
    return y;
}

Eigen::MatrixXd rows_at(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    }
    return out;
}

struct BestSoFar {
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd point;

    void update(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y(i) < value) {
                value = y(i);
                point = X.row(i).transpose();
            }
        }
    }
};

} // namespace

double Objective::operator()(const Eigen::VectorXd& x) {
    if (x.size() != dim_) {
        throw std::invalid_argument("Objective: dimension mismatch");
    }
    if (x.hasNaN()) {
        throw std::logic_error("Objective: called with NaN input");
    }
    ++evaluations_;
    return fn_(x);
}

Eigen::MatrixXd proposal_sample(const Proposal& p, RngStream& rng, int count) {
    return std::visit([&](const auto& d) { return d.sample(rng, count); }, p);
}

Eigen::VectorXd proposal_mean(const Proposal& p) {
    return std::visit([](const auto& d) -> Eigen::VectorXd { return d.mean(); }, p);
}

Eigen::MatrixXd proposal_covariance(const Proposal& p) {
    return std::visit([](const auto& d) -> Eigen::MatrixXd { return d.covariance(); }, p);
}

int proposal_dim(const Proposal& p) {
    return std::visit([](const auto& d) { return d.dim(); }, p);
}

void CemConfig::validate() const {
    if (m < 1) {
        throw std::invalid_argument("CemConfig: m must be >= 1");
    }
    if (m_elite < 1 || m_elite > m) {
        throw std::invalid_argument("CemConfig: requires 1 <= m_elite <= m");
    }
    if (k_max < 1) {
        throw std::invalid_argument("CemConfig: k_max must be >= 1");
    }
    if (surrogate_sample_factor < 0) {
        throw std::invalid_argument("CemConfig: surrogate_sample_factor must be >= 0");
    }
    schedule.validate();
    if (sub_ce) {
        if (sub_ce->m < 1 || sub_ce->m_elite < 1 || sub_ce->m_elite > sub_ce->m) {
            throw std::invalid_argument("CemConfig: sub_ce requires 1 <= m_elite <= m");
        }
        if (sub_ce->k_max < 0) {
            throw std::invalid_argument("CemConfig: sub_ce.k_max must be >= 0");
        }
    }
    if (em.max_iters < 1 || em.tol < 0.0) {
        throw std::invalid_argument("CemConfig: invalid EM options");
    }
}

std::vector<int> select_elites(const Eigen::VectorXd& values, int m_elite) {
    if (m_elite < 0 || m_elite > values.size()) {
        throw std::invalid_argument("select_elites: m_elite out of range");
    }
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&values](int a, int b) {
        if (values(a) != values(b)) {
            return values(a) < values(b);
        }
        return a < b;
    });
    idx.resize(m_elite);
    return idx;
}

namespace {

void check_values(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (std::isnan(y(i))) {
            throw std::runtime_error("objective returned NaN at x=" +
                                     format_point(X.row(i).transpose()));
        }
    }
}

// Shared loop of CE-surrogate and CE-mixture; the two differ only in the
// refit applied to the augmented elite set.
OptimizationTrace run_surrogate_loop(Objective& objective, const Proposal& init,
                                     const CemConfig& cfg, RngStream& rng,
                                     bool mixture_refit) {
    cfg.validate();
    const int d = proposal_dim(init);
    if (d != objective.dim()) {
        throw std::invalid_argument("ce_surrogate: proposal dimension does not match objective");
    }

    const auto t0 = Clock::now();
    Proposal M = init;
    EvaluationSchedule schedule(cfg.schedule, cfg.m, cfg.m_elite, cfg.k_max);
    BestSoFar best;
    best.point = Eigen::VectorXd::Zero(d);

    OptimizationTrace trace;
    trace.iterations.reserve(cfg.k_max);

    for (int k = 1; k <= cfg.k_max; ++k) {
        const Allocation alloc = schedule.next(k);
        IterationRecord rec;
        rec.k = k;
        rec.m_k = alloc.m;
        rec.m_elite_k = alloc.m_elite;

        if (alloc.m == 0) {
            // Budget exhausted: no true evaluations, no refit.
            rec.samples = Eigen::MatrixXd(0, d);
            rec.values = Eigen::VectorXd(0);
            rec.gamma = std::numeric_limits<double>::quiet_NaN();
            rec.best_value = best.value;
            rec.best_point = best.point;
            rec.cumulative_evals = objective.evaluations();
            rec.elapsed_s = seconds_since(t0);
            trace.iterations.push_back(std::move(rec));
            continue;
        }

        const Eigen::MatrixXd X = proposal_sample(M, rng, alloc.m);
        const Eigen::VectorXd Y = evaluate_all(objective, X);
        check_values(Y, X);

        const std::vector<int> elite_idx = select_elites(Y, alloc.m_elite);
        const Eigen::MatrixXd true_elites = rows_at(X, elite_idx);

        bool gp_fallback = false;
        const Eigen::MatrixXd E =
            model_elite_set(X, Y, M, true_elites, alloc.m, alloc.m_elite, cfg, rng, &gp_fallback);

        if (mixture_refit) {
            const Eigen::MatrixXd cov = symmetrize_and_jitter(proposal_covariance(M));
            std::vector<MultivariateGaussian> comps;
            comps.reserve(true_elites.rows());
            for (Eigen::Index i = 0; i < true_elites.rows(); ++i) {
                comps.emplace_back(true_elites.row(i).transpose(), cov);
            }
            const Eigen::VectorXd w = Eigen::VectorXd::Constant(
                true_elites.rows(), 1.0 / static_cast<double>(true_elites.rows()));
            try {
                M = fit_em(GaussianMixture(std::move(comps), w), E, cfg.em).mixture;
            } catch (const std::runtime_error& err) {
                std::cerr << "ceopt: warning: mixture refit failed (" << err.what()
                          << "); falling back to Gaussian MLE for iteration " << k << "\n";
                M = MultivariateGaussian::fit_mle(E);
            }
        } else {
            M = MultivariateGaussian::fit_mle(E);
        }

        best.update(X, Y);
        rec.samples = X;
        rec.values = Y;
        rec.elite_indices = elite_idx;
        rec.gamma = Y(elite_idx.back());
        rec.fitted = M;
        rec.best_value = best.value;
        rec.best_point = best.point;
        rec.cumulative_evals = objective.evaluations();
        rec.elapsed_s = seconds_since(t0);
        rec.gp_fallback = gp_fallback;
        trace.iterations.push_back(std::move(rec));
    }

    trace.final_distribution = M;
    trace.best_value = best.value;
    trace.best_point = best.point;
    trace.total_evals = objective.evaluations();
    trace.runtime_s = seconds_since(t0);
    return trace;
}

} // namespace

OptimizationTrace cross_entropy_method(Objective& objective, const MultivariateGaussian& init,
                                       const CemConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (init.dim() != objective.dim()) {
        throw std::invalid_argument("cross_entropy_method: proposal dimension does not match objective");
    }

    const auto t0 = Clock::now();
    MultivariateGaussian g = init;
    BestSoFar best;
    best.point = Eigen::VectorXd::Zero(g.dim());

    OptimizationTrace trace;
    trace.iterations.reserve(cfg.k_max);

    for (int k = 1; k <= cfg.k_max; ++k) {
        const Eigen::MatrixXd X = g.sample(rng, cfg.m);
        const Eigen::VectorXd Y = evaluate_all(objective, X);
        check_values(Y, X);

        const std::vector<int> elite_idx = select_elites(Y, cfg.m_elite);
        g = MultivariateGaussian::fit_mle(rows_at(X, elite_idx));

        best.update(X, Y);
        IterationRecord rec;
        rec.k = k;
        rec.m_k = cfg.m;
        rec.m_elite_k = cfg.m_elite;
        rec.samples = X;
        rec.values = Y;
        rec.elite_indices = elite_idx;
        rec.gamma = Y(elite_idx.back());
        rec.fitted = g;
        rec.best_value = best.value;
        rec.best_point = best.point;
        rec.cumulative_evals = objective.evaluations();
        rec.elapsed_s = seconds_since(t0);
        trace.iterations.push_back(std::move(rec));
    }

    trace.final_distribution = g;
    trace.best_value = best.value;
    trace.best_point = best.point;
    trace.total_evals = objective.evaluations();
    trace.runtime_s = seconds_since(t0);
    return trace;
}

OptimizationTrace ce_surrogate(Objective& objective, const Proposal& init,
                               const CemConfig& cfg, RngStream& rng) {
    return run_surrogate_loop(objective, init, cfg, rng, /*mixture_refit=*/false);
}

OptimizationTrace ce_mixture(Objective& objective, const Proposal& init,
                             const CemConfig& cfg, RngStream& rng) {
    return run_surrogate_loop(objective, init, cfg, rng, /*mixture_refit=*/true);
}

Eigen::MatrixXd model_elite_set(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                const Proposal& M, const Eigen::MatrixXd& elites,
                                int m_k, int m_elite_k, const CemConfig& cfg, RngStream& rng,
                                bool* gp_fallback) {
    if (Y.size() < 1) {
        throw std::invalid_argument("model_elite_set: needs at least one evaluation");
    }
    if (gp_fallback != nullptr) {
        *gp_fallback = false;
    }
    const int factor = cfg.surrogate_sample_factor;
    if (factor == 0 && !cfg.sub_ce) {
        return elites; // augmentation fully disabled
    }

    // Surrogate kernel: length scale tied to the spread of this iteration's
    // samples and noise sized against the standardized targets. The noise
    // keeps the posterior mean from erecting a bump at every mediocre
    // observation, which would push the candidate selection outward; the
    // data-scale length makes the ranking a basin around the good
    // observations at every stage of the contraction.
    KernelParams kernel;
    kernel.length_scale = std::max(0.75 * median_pairwise_distance(X), 1e-3);
    kernel.noise = 0.3;

    std::optional<GaussianProcess> gp;
    try {
        gp = GaussianProcess::fit(X, Y, kernel, /*optimize=*/false);
    } catch (const std::runtime_error& err) {
        std::cerr << "ceopt: warning: surrogate fit failed (" << err.what()
                  << "); elite set not augmented\n";
        if (gp_fallback != nullptr) {
            *gp_fallback = true;
        }
        return elites;
    }

    Eigen::MatrixXd model_elites(0, X.cols());
    if (factor > 0) {
        const Eigen::MatrixXd candidates = proposal_sample(M, rng, factor * m_k);
        const Eigen::VectorXd predicted = gp->predict_mean(candidates);
        model_elites = rows_at(candidates, select_elites(predicted, factor * m_elite_k));
    }

    Eigen::MatrixXd sub_elites(0, X.cols());
    if (cfg.sub_ce) {
        sub_elites = sub_elite_set(*gp, M, elites, cfg, rng);
    }

    Eigen::MatrixXd E(elites.rows() + model_elites.rows() + sub_elites.rows(), X.cols());
    E.topRows(elites.rows()) = elites;
    E.middleRows(elites.rows(), model_elites.rows()) = model_elites;
    E.bottomRows(sub_elites.rows()) = sub_elites;
    return E;
}

Eigen::MatrixXd sub_elite_set(const GaussianProcess& surrogate, const Proposal& M,
                              const Eigen::MatrixXd& elites, const CemConfig& cfg,
                              RngStream& rng) {
    if (elites.rows() == 0) {
        throw std::invalid_argument("sub_elite_set: empty elite set");
    }
    if (!cfg.sub_ce) {
        return Eigen::MatrixXd(0, elites.cols());
    }
    const SubCemParams& sub = *cfg.sub_ce;
    if (sub.k_max == 0) {
        return elites; // no refinement
    }

    const Eigen::MatrixXd cov = symmetrize_and_jitter(proposal_covariance(M));
    CemConfig sub_cfg;
    sub_cfg.m = sub.m;
    sub_cfg.m_elite = sub.m_elite;
    sub_cfg.k_max = sub.k_max;
    sub_cfg.sub_ce = std::nullopt;

    Eigen::MatrixXd out(elites.rows(), elites.cols());
    for (Eigen::Index i = 0; i < elites.rows(); ++i) {
        const Eigen::VectorXd seed = elites.row(i).transpose();
        // Local counter; surrogate calls never touch the true-objective counter.
        Objective surrogate_objective(
            [&surrogate](const Eigen::VectorXd& x) { return surrogate.predict_mean_at(x); },
            static_cast<int>(elites.cols()));
        const OptimizationTrace t = cross_entropy_method(
            surrogate_objective, MultivariateGaussian(seed, cov), sub_cfg, rng);
        const double seed_value = surrogate.predict_mean_at(seed);
        out.row(i) = (t.best_value <= seed_value ? t.best_point : seed).transpose();
    }
    return out;
}

} // namespace ceopt
