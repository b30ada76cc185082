#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ceopt/distributions.hpp"
#include "oracles.hpp"

using namespace ceopt;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MultivariateGaussian standard_2d() {
    return {Vector2d(0, 0), Eigen::Matrix2d::Identity()};
}

} // namespace

TEST_CASE("rng streams are deterministic and splittable") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.normal() == b.normal());
    }
    RngStream c = a.substream(1);
    RngStream d = RngStream(42).substream(1);
    CHECK(c.normal() == d.normal());
    // different keys produce different streams
    CHECK(RngStream(42).substream(1).next_u64() != RngStream(42).substream(2).next_u64());
}

TEST_CASE("mvn pdf analytic spot values") {
    const MultivariateGaussian g = standard_2d();
    CHECK(g.pdf(Vector2d(0, 0)) == doctest::Approx(1.0 / oracles::kTwoPi).epsilon(1e-12));
    CHECK(g.pdf(Vector2d(1, 0)) ==
          doctest::Approx(std::exp(-0.5) / oracles::kTwoPi).epsilon(1e-12));
}

TEST_CASE("mvn pdf matches the dense-formula oracle") {
    const MultivariateGaussian g(Vector2d(1, 2), 3.0 * Eigen::Matrix2d::Identity());
    CHECK(g.pdf(Vector2d(0, 0)) ==
          doctest::Approx(oracles::mvn_pdf_dense(g.mean(), g.covariance(), Vector2d(0, 0)))
              .epsilon(1e-12));

    RngStream rng(5);
    const MatrixXd pts = g.sample(rng, 20);
    for (int i = 0; i < pts.rows(); ++i) {
        const VectorXd x = pts.row(i).transpose();
        CHECK(g.pdf(x) ==
              doctest::Approx(oracles::mvn_pdf_dense(g.mean(), g.covariance(), x)).epsilon(1e-12));
    }
}

TEST_CASE("mvn pdf integrates to one on a wide grid") {
    const MultivariateGaussian g(Vector2d(0.5, -0.25),
                                 (Eigen::Matrix2d() << 1.5, 0.4, 0.4, 0.8).finished());
    const double sigma = std::sqrt(1.5);
    const double mass = oracles::trapezoid_2d(
        [&g](double x, double y) { return g.pdf(Vector2d(x, y)); }, -8.0 * sigma, 8.0 * sigma,
        sigma / 20.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("mvn construction validates inputs") {
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0.2, 1;
    CHECK_THROWS_AS(MultivariateGaussian(Vector2d(0, 0), asym), std::invalid_argument);
    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(MultivariateGaussian(Vector2d(0, 0), indefinite), std::invalid_argument);
    CHECK_THROWS_AS(standard_2d().pdf(Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("mvn sampling: empty, degenerate width, determinism") {
    const MultivariateGaussian g = standard_2d();
    RngStream rng(1);
    CHECK(g.sample(rng, 0).rows() == 0);

    const MultivariateGaussian tight(Vector2d(3, -4), 1e-12 * Eigen::Matrix2d::Identity());
    const MatrixXd pts = tight.sample(rng, 5);
    for (int i = 0; i < pts.rows(); ++i) {
        CHECK((pts.row(i).transpose() - tight.mean()).norm() < 1e-5);
    }

    RngStream r1(99), r2(99);
    const MatrixXd a = g.sample(r1, 32);
    const MatrixXd b = g.sample(r2, 32);
    CHECK((a.array() == b.array()).all()); // bit-identical
}

TEST_CASE("mvn sampling moments at 1e5 samples") {
    Eigen::Matrix2d cov;
    cov << 4, 1, 1, 2;
    const MultivariateGaussian g(Vector2d(0, 0), cov);
    RngStream rng(2024);
    const MatrixXd s = g.sample(rng, 100000);
    const auto ms = oracles::mean_scatter_two_pass(s);
    CHECK(ms.mean.norm() < 0.05);
    CHECK((ms.scatter - cov).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("mle fit: symmetric four-point cloud") {
    MatrixXd s(4, 2);
    s << 0, 0, 2, 0, 0, 2, 2, 2;
    const MultivariateGaussian g = MultivariateGaussian::fit_mle(s);
    CHECK(g.mean().isApprox(Vector2d(1, 1), 1e-14));
    CHECK((g.covariance() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("mle fit: single point gets the jitter floor") {
    MatrixXd s(1, 2);
    s << 3, 5;
    const MultivariateGaussian g = MultivariateGaussian::fit_mle(s);
    CHECK((g.mean().array() == Vector2d(3, 5).array()).all());
    CHECK(g.covariance().isApprox(1e-12 * Eigen::Matrix2d::Identity(), 1e-6));
}

TEST_CASE("mle fit matches the two-pass oracle") {
    RngStream rng(7);
    const MultivariateGaussian src(Vector2d((1.0), -2.0),
                                   (Eigen::Matrix2d() << 2.0, 0.7, 0.7, 1.2).finished());
    const MatrixXd s = src.sample(rng, 12);
    const MultivariateGaussian g = MultivariateGaussian::fit_mle(s);
    const auto ms = oracles::mean_scatter_two_pass(s);
    CHECK((g.mean() - ms.mean).cwiseAbs().maxCoeff() < 1e-10);
    // fitted covariance = oracle scatter + diagonal jitter
    Eigen::MatrixXd expected = 0.5 * (ms.scatter + ms.scatter.transpose());
    expected.diagonal().array() += std::max(1e-9 * expected.trace() / 2.0, 1e-12);
    CHECK((g.covariance() - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mle fit rejects an empty sample set") {
    CHECK_THROWS_WITH_AS(MultivariateGaussian::fit_mle(MatrixXd(0, 2)),
                         "fit_mle: empty elite set", std::invalid_argument);
}

TEST_CASE("mle then sampling round-trips a known gaussian") {
    Eigen::Matrix2d cov;
    cov << 3, -0.8, -0.8, 1.5;
    const MultivariateGaussian truth(Vector2d(2, -1), cov);
    RngStream rng(31);
    const MultivariateGaussian fitted = MultivariateGaussian::fit_mle(truth.sample(rng, 100000));
    CHECK((fitted.mean() - truth.mean()).cwiseAbs().maxCoeff() < 0.05);
    CHECK((fitted.covariance() - cov).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("gmm pdf reductions and oracle equality") {
    const MultivariateGaussian c0(Vector2d(0, 0), Eigen::Matrix2d::Identity());
    const MultivariateGaussian c1(Vector2d(4, 1), 2.0 * Eigen::Matrix2d::Identity());
    const MultivariateGaussian c2(Vector2d(-3, 2),
                                  (Eigen::Matrix2d() << 1.0, 0.3, 0.3, 0.7).finished());

    const GaussianMixture single({c0}, VectorXd::Ones(1));
    CHECK(single.pdf(Vector2d(0.3, -0.4)) ==
          doctest::Approx(c0.pdf(Vector2d(0.3, -0.4))).epsilon(1e-14));

    const GaussianMixture duplicated({c1, c1}, VectorXd::Constant(2, 0.5));
    CHECK(duplicated.pdf(Vector2d(1, 1)) ==
          doctest::Approx(c1.pdf(Vector2d(1, 1))).epsilon(1e-14));

    const GaussianMixture mix({c0, c1, c2}, (VectorXd(3) << 0.2, 0.5, 0.3).finished());
    RngStream rng(17);
    for (int i = 0; i < 5; ++i) {
        const Vector2d x(5.0 * rng.normal(), 5.0 * rng.normal());
        CHECK(std::abs(mix.pdf(x) - oracles::gmm_pdf_sum(mix, x)) <= 1e-12 * mix.pdf(x));
    }
}

TEST_CASE("gmm validates weights and dimensions") {
    const MultivariateGaussian c0 = standard_2d();
    CHECK_THROWS_AS(GaussianMixture({c0}, (VectorXd(1) << 0.5).finished()),
                    std::invalid_argument);
    CHECK_THROWS_AS(GaussianMixture({c0, c0}, (VectorXd(2) << 1.2, -0.2).finished()),
                    std::invalid_argument);
    const GaussianMixture mix({c0}, VectorXd::Ones(1));
    CHECK_THROWS_AS(mix.pdf(Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("gmm sampling: degenerate weights, empty, frequencies") {
    const MultivariateGaussian near(Vector2d(-10, 0), Eigen::Matrix2d::Identity());
    const MultivariateGaussian far(Vector2d(10, 0), Eigen::Matrix2d::Identity());

    RngStream rng(3);
    const GaussianMixture all_first({near, far}, (VectorXd(2) << 1.0, 0.0).finished());
    const MatrixXd s = all_first.sample(rng, 100);
    for (int i = 0; i < s.rows(); ++i) {
        CHECK(s(i, 0) < 0.0); // every draw from the first component
    }
    CHECK(all_first.sample(rng, 0).rows() == 0);

    const GaussianMixture even({near, far}, VectorXd::Constant(2, 0.5));
    const MatrixXd t = even.sample(rng, 10000);
    int first = 0;
    for (int i = 0; i < t.rows(); ++i) {
        const double d_near = (t.row(i).transpose() - near.mean()).norm();
        const double d_far = (t.row(i).transpose() - far.mean()).norm();
        if (d_near < d_far) {
            ++first;
        }
    }
    CHECK(std::abs(first / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("em with one component collapses to the gaussian mle") {
    RngStream rng(8);
    const MultivariateGaussian src(Vector2d(1, 1), 2.0 * Eigen::Matrix2d::Identity());
    const MatrixXd s = src.sample(rng, 40);
    const GaussianMixture init({standard_2d()}, VectorXd::Ones(1));
    const EmResult res = fit_em(init, s);
    const MultivariateGaussian mle = MultivariateGaussian::fit_mle(s);
    CHECK(res.mixture.weights()(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((res.mixture.components()[0].mean() - mle.mean()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((res.mixture.components()[0].covariance() - mle.covariance()).cwiseAbs().maxCoeff() <
          1e-9);
}

TEST_CASE("em recovers a planted two-component mixture") {
    RngStream rng(12);
    const MultivariateGaussian a(Vector2d(-10, 0), Eigen::Matrix2d::Identity());
    const MultivariateGaussian b(Vector2d(10, 0), Eigen::Matrix2d::Identity());
    MatrixXd s(400, 2);
    for (int i = 0; i < 200; ++i) {
        s.row(i) = a.sample(rng, 1);
        s.row(200 + i) = b.sample(rng, 1);
    }
    const GaussianMixture init(
        {MultivariateGaussian(Vector2d(-8, 0), Eigen::Matrix2d::Identity()),
         MultivariateGaussian(Vector2d(8, 0), Eigen::Matrix2d::Identity())},
        VectorXd::Constant(2, 0.5));
    const EmResult res = fit_em(init, s);
    CHECK((res.mixture.components()[0].mean() - a.mean()).norm() < 0.5);
    CHECK((res.mixture.components()[1].mean() - b.mean()).norm() < 0.5);
    CHECK(std::abs(res.mixture.weights()(0) - 0.5) < 0.1);
    CHECK(std::abs(res.mixture.weights()(1) - 0.5) < 0.1);
}

TEST_CASE("em log-likelihood is monotone non-decreasing") {
    RngStream rng(44);
    // awkward initialization on blob data, several repeats
    for (int rep = 0; rep < 5; ++rep) {
        const MultivariateGaussian src(Vector2d(2.0 * rng.normal(), 2.0 * rng.normal()),
                                       (Eigen::Matrix2d() << 2.0, 0.5, 0.5, 1.0).finished());
        const MatrixXd s = src.sample(rng, 60);
        const GaussianMixture init(
            {MultivariateGaussian(Vector2d(-5, -5), Eigen::Matrix2d::Identity()),
             MultivariateGaussian(Vector2d(5, 5), 4.0 * Eigen::Matrix2d::Identity()),
             MultivariateGaussian(Vector2d(0, 0), 0.5 * Eigen::Matrix2d::Identity())},
            VectorXd::Constant(3, 1.0 / 3.0));
        const EmResult res = fit_em(init, s);
        REQUIRE(res.log_likelihood.size() >= 2);
        for (std::size_t i = 1; i < res.log_likelihood.size(); ++i) {
            CHECK(res.log_likelihood[i] >= res.log_likelihood[i - 1] - 1e-9);
        }
    }
}

TEST_CASE("em reports degenerate responsibilities") {
    const GaussianMixture init({standard_2d()}, VectorXd::Ones(1));
    MatrixXd s(1, 2);
    s << 1e200, 1e200; // quadratic form overflows, all components underflow
    CHECK_THROWS_WITH_AS(fit_em(init, s), "fit_em: degenerate responsibilities",
                         std::runtime_error);
}

TEST_CASE("mixture mean and covariance follow the law of total variance") {
    const MultivariateGaussian a(Vector2d(-1, 0), Eigen::Matrix2d::Identity());
    const MultivariateGaussian b(Vector2d(3, 2), 2.0 * Eigen::Matrix2d::Identity());
    const GaussianMixture mix({a, b}, (VectorXd(2) << 0.25, 0.75).finished());
    const Vector2d mean = 0.25 * a.mean() + 0.75 * b.mean();
    CHECK(mix.mean().isApprox(mean, 1e-14));
    Eigen::Matrix2d expected = 0.25 * a.covariance() + 0.75 * b.covariance();
    expected += 0.25 * (a.mean() - mean) * (a.mean() - mean).transpose();
    expected += 0.75 * (b.mean() - mean) * (b.mean() - mean).transpose();
    CHECK(mix.covariance().isApprox(expected, 1e-12));
}
