#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "ceopt/cem.hpp"
#include "ceopt/distributions.hpp"
#include "ceopt/kernels.hpp"

namespace ceopt {

/// Parameters of the sierra test objective. The defaults reproduce the
/// standard surface: 48 clustered local minima fanned around the center in an
/// "s" shape, plus one dominant global minimum at the center.
struct SierraParams {
    Eigen::Vector2d center{0.0, 0.0}; // global minimum location
    double sigma = 3.0;               // common scale; base covariance is sigma * I
    double delta = 2.0;               // cluster offset distance
    double eta = 6.0;                 // spread rate; larger = tighter minima
    bool decay = true;                // widen clusters with their fan-out index

    void validate() const;
};

/// 2-D multimodal objective built from a 49-component uniform Gaussian
/// mixture; S(x) is the negative mixture density, so every local density
/// peak is a local minimum and the center component is the global minimum.
/// Immutable after construction; evaluation is pure and concurrency-safe.
class SierraFunction {
public:
    explicit SierraFunction(const SierraParams& params = {});

    const SierraParams& params() const { return params_; }
    const GaussianMixture& mixture() const { return mixture_; }

    double operator()(const Eigen::Vector2d& x) const;

    /// Batch evaluation of S over n points.
    void evaluate(const double* xs, const double* ys, std::size_t n, double* out) const;

    /// Counted objective bound to a shared copy of this function.
    static Objective make_objective(const SierraParams& params = {});

private:
    SierraParams params_;
    GaussianMixture mixture_;
    std::vector<kernels::GaussTerm2> terms_; // precomputed density terms
};

/// Row-major grid evaluation with x1 varying fastest. Values are laid out as
/// rows (x1, x2, S); row count is the product of the per-axis step counts.
struct SierraGrid {
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> value;
    std::size_t nx = 0;
    std::size_t ny = 0;

    std::size_t rows() const { return value.size(); }
    /// Index of the smallest value (first occurrence).
    std::size_t argmin() const;
};

/// Evaluates f over [lo, hi] with the given step on both axes.
/// Throws "grid too large" beyond 1e7 points.
SierraGrid sierra_grid(const SierraFunction& f, const Eigen::Vector2d& lo,
                       const Eigen::Vector2d& hi, double step);

} // namespace ceopt
