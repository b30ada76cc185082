#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "ceopt/distributions.hpp"
#include "ceopt/schedule.hpp"
#include "ceopt/surrogate.hpp"

namespace ceopt {

/// Counted true objective. Every call increments the counter by one;
/// surrogate predictions never touch it. Implementations declare whether
/// concurrent calls are safe; a single optimization run is sequential
/// either way.
class Objective {
public:
    using Fn = std::function<double(const Eigen::VectorXd&)>;

    Objective(Fn fn, int dim, bool thread_safe = false)
        : fn_(std::move(fn)), dim_(dim), thread_safe_(thread_safe) {}

    double operator()(const Eigen::VectorXd& x);

    int dim() const { return dim_; }
    bool thread_safe() const { return thread_safe_; }
    long long evaluations() const { return evaluations_; }

private:
    Fn fn_;
    int dim_;
    bool thread_safe_;
    long long evaluations_ = 0;
};

/// Proposal distribution: a plain Gaussian, or the mixture CE-mixture
/// maintains between iterations.
using Proposal = std::variant<MultivariateGaussian, GaussianMixture>;

Eigen::MatrixXd proposal_sample(const Proposal& p, RngStream& rng, int count);
Eigen::VectorXd proposal_mean(const Proposal& p);
Eigen::MatrixXd proposal_covariance(const Proposal& p);
int proposal_dim(const Proposal& p);

/// Parameters of the inner CE refinement run on the surrogate.
struct SubCemParams {
    int m = 10;
    int m_elite = 5;
    int k_max = 2; // 0 skips refinement and returns the seed elites unchanged
};

struct CemConfig {
    int m = 10;
    int m_elite = 5;
    int k_max = 10;
    ScheduleSpec schedule{};            // consumed by ce_surrogate / ce_mixture
    int surrogate_sample_factor = 10;   // candidate pool = factor * m_k, 0 disables
    std::optional<SubCemParams> sub_ce = SubCemParams{}; // nullopt disables
    EmOptions em{};

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    int m_k = 0;
    int m_elite_k = 0;
    Eigen::MatrixXd samples;          // m_k x d
    Eigen::VectorXd values;           // true objective values
    std::vector<int> elite_indices;   // into samples, ascending by (value, index)
    double gamma = 0.0;               // worst elite value; NaN for empty iterations
    std::optional<Proposal> fitted;   // refit result; empty iterations perform none
    double best_value = 0.0;          // best-so-far true value
    Eigen::VectorXd best_point;
    long long cumulative_evals = 0;
    double elapsed_s = 0.0;           // since run start; never serialized
    bool gp_fallback = false;         // surrogate fit failed, elite set degraded to e
};

struct OptimizationTrace {
    std::vector<IterationRecord> iterations;
    std::optional<Proposal> final_distribution;
    double best_value = 0.0;
    Eigen::VectorXd best_point;
    long long total_evals = 0;
    double runtime_s = 0.0;
};

/// Indices of the `m_elite` smallest values, ties broken by sample index.
std::vector<int> select_elites(const Eigen::VectorXd& values, int m_elite);

/// Plain cross-entropy method: sample m, evaluate, refit the Gaussian to the
/// m_elite best samples, repeat k_max times.
OptimizationTrace cross_entropy_method(Objective& objective, const MultivariateGaussian& init,
                                       const CemConfig& cfg, RngStream& rng);

/// CE with a per-iteration surrogate: the schedule reallocates the m * k_max
/// evaluation budget, and the elite set is augmented with surrogate-selected
/// points before the refit. Iterations whose allocation is zero perform no
/// true evaluations and no refit.
OptimizationTrace ce_surrogate(Objective& objective, const Proposal& init,
                               const CemConfig& cfg, RngStream& rng);

/// CE-surrogate with the refit replaced by an EM mixture fit whose components
/// start at the true-elites. Falls back to the Gaussian MLE refit for an
/// iteration when EM degenerates.
OptimizationTrace ce_mixture(Objective& objective, const Proposal& init,
                             const CemConfig& cfg, RngStream& rng);

/// Augmented elite set: true-elites, the best surrogate predictions from a
/// factor*m_k candidate pool, and the per-elite refinement points. Returns
/// points only, stacked row-wise. On surrogate-fit failure returns the
/// true-elites and sets *gp_fallback.
Eigen::MatrixXd model_elite_set(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                                const Proposal& M, const Eigen::MatrixXd& elites,
                                int m_k, int m_elite_k, const CemConfig& cfg, RngStream& rng,
                                bool* gp_fallback = nullptr);

/// One refined point per elite: CE on the surrogate from N(elite, cov(M)),
/// keeping the best surrogate value seen (the seed elite is a candidate, so
/// refinement never regresses it).
Eigen::MatrixXd sub_elite_set(const GaussianProcess& surrogate, const Proposal& M,
                              const Eigen::MatrixXd& elites, const CemConfig& cfg,
                              RngStream& rng);

} // namespace ceopt
