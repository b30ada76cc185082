#include "ceopt/sierra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ceopt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

GaussianMixture build_mixture(const SierraParams& p) {
    p.validate();
    // Cluster offsets, fan-out points and the +/- direction pair. The fan-out
    // index i (1-based) widens later clusters when decay is on.
    const Eigen::Vector2d G[] = {
        {p.delta, p.delta}, {p.delta, -p.delta}, {-p.delta, p.delta}, {-p.delta, -p.delta}};
    const Eigen::Vector2d P[] = {{0, 0}, {1, 1}, {2, 0}, {3, 1}, {0, 2}, {1, 3}};
    const double s[] = {p.sigma, -p.sigma};

    const Eigen::Matrix2d base = p.sigma * Eigen::Matrix2d::Identity();
    std::vector<MultivariateGaussian> comps;
    comps.reserve(49);
    for (const auto& g : G) {
        for (std::size_t pi = 0; pi < 6; ++pi) {
            const double widen = p.decay ? static_cast<double>(pi + 1) : 1.0;
            const Eigen::Matrix2d cov = base * widen / p.eta;
            for (const double sv : s) {
                comps.emplace_back(g + sv * P[pi] + p.center, cov);
            }
        }
    }
    // Global minimum component, tighter than the locals.
    comps.emplace_back(p.center, base / (p.sigma * p.eta));

    const Eigen::VectorXd weights =
        Eigen::VectorXd::Constant(49, 1.0 / 49.0);
    return GaussianMixture(std::move(comps), weights);
}

} // namespace

void SierraParams::validate() const {
    if (!(std::isfinite(sigma) && sigma > 0.0)) {
        throw std::invalid_argument("SierraParams: sigma must be finite and positive");
    }
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("SierraParams: eta must be finite and positive");
    }
    if (!std::isfinite(delta) || !center.allFinite()) {
        throw std::invalid_argument("SierraParams: parameters must be finite");
    }
}

SierraFunction::SierraFunction(const SierraParams& params)
    : params_(params), mixture_(build_mixture(params_)) {
    // Precompute density terms: each component contributes
    // weight / (2 pi sqrt(det)) * exp(-0.5 quadform); covariances here are
    // diagonal so the quadratic form coefficients are the inverse variances.
    terms_.reserve(49);
    const double w = 1.0 / 49.0;
    for (const auto& c : mixture_.components()) {
        const double v0 = c.covariance()(0, 0);
        const double v1 = c.covariance()(1, 1);
        const double norm = w / (kTwoPi * std::sqrt(v0 * v1));
        terms_.push_back({c.mean()(0), c.mean()(1), 1.0 / v0, 0.0, 1.0 / v1, norm});
    }
}

double SierraFunction::operator()(const Eigen::Vector2d& x) const {
    double density = 0.0;
    kernels::weighted_exp_quad2(&x.x(), &x.y(), 1, terms_.data(), terms_.size(), &density);
    return -density;
}

void SierraFunction::evaluate(const double* xs, const double* ys, std::size_t n,
                              double* out) const {
    kernels::weighted_exp_quad2(xs, ys, n, terms_.data(), terms_.size(), out);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = -out[i];
    }
}

Objective SierraFunction::make_objective(const SierraParams& params) {
    auto fn = std::make_shared<SierraFunction>(params);
    return Objective(
        [fn](const Eigen::VectorXd& x) { return (*fn)(Eigen::Vector2d(x(0), x(1))); },
        /*dim=*/2, /*thread_safe=*/true);
}

std::size_t SierraGrid::argmin() const {
    return static_cast<std::size_t>(
        std::min_element(value.begin(), value.end()) - value.begin());
}

SierraGrid sierra_grid(const SierraFunction& f, const Eigen::Vector2d& lo,
                       const Eigen::Vector2d& hi, double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("sierra_grid: step must be positive");
    }
    if (!(lo(0) <= hi(0) && lo(1) <= hi(1))) {
        throw std::invalid_argument("sierra_grid: lo must not exceed hi");
    }
    // Count = floor((hi - lo) / step) + 1, with a tolerance for spans that
    // are an exact multiple of the step.
    const auto axis_count = [step](double a, double b) {
        return static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    };
    const std::size_t nx = axis_count(lo(0), hi(0));
    const std::size_t ny = axis_count(lo(1), hi(1));
    if (nx * ny > std::size_t{10'000'000}) {
        throw std::runtime_error("sierra_grid: grid too large");
    }

    SierraGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    const std::size_t total = nx * ny;
    grid.x1.resize(total);
    grid.x2.resize(total);
    grid.value.resize(total);
    std::size_t at = 0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = lo(1) + static_cast<double>(j) * step;
        for (std::size_t i = 0; i < nx; ++i, ++at) {
            grid.x1[at] = lo(0) + static_cast<double>(i) * step;
            grid.x2[at] = y;
        }
    }
    f.evaluate(grid.x1.data(), grid.x2.data(), total, grid.value.data());
    return grid;
}

} // namespace ceopt
