#include "plantcap/numeric.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace plantcap;

TEST_SUITE_BEGIN("numeric");

TEST_CASE("transform round trip is the identity on the interior") {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const double p = rng.uniform(1e-6, 1.0 - 1e-6);
        CHECK(to_natural(to_unconstrained(p, Scale::logit_prob), Scale::logit_prob) ==
              doctest::Approx(p).epsilon(1e-10));
        const double h = std::exp(rng.uniform(std::log(1e-3), std::log(1e9)));
        CHECK(to_natural(to_unconstrained(h, Scale::log_count), Scale::log_count) ==
              doctest::Approx(h).epsilon(1e-10));
    }
}

TEST_CASE("nelder-mead finds the quadratic bowl optimum") {
    const Objective f = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s -= (v - 3.0) * (v - 3.0);
        return s;
    };
    const OptimResult r = nelder_mead(f, {0.0, 0.0, 0.0});
    REQUIRE(r.converged);
    for (double v : r.x) CHECK(v == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("nelder-mead on a constant objective converges at the start") {
    const Objective f = [](const std::vector<double>&) { return 4.25; };
    const OptimResult r = nelder_mead(f, {1.0, -2.0});
    CHECK(r.converged);
    CHECK(r.fmax == 4.25);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("nelder-mead rejects a non-finite start") {
    const Objective f = [](const std::vector<double>&) {
        return -std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(nelder_mead(f, {0.0}), Error);
}

TEST_CASE("nelder-mead reports exhaustion without converging") {
    // a valley that keeps descending, so the simplex never collapses
    const Objective f = [](const std::vector<double>& x) { return x[0]; };
    NelderMeadOptions opt;
    opt.max_iters = 25;
    const OptimResult r = nelder_mead(f, {0.0, 0.0}, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.fmax > 0.0); // made progress anyway
}

TEST_CASE("optimizer marks coordinates that drift past the boundary threshold") {
    const Objective f = [](const std::vector<double>& x) {
        return -(x[0] - 20.0) * (x[0] - 20.0) - x[1] * x[1];
    };
    const OptimResult r = nelder_mead(f, {0.0, 0.0});
    REQUIRE(r.boundary_flags.size() == 2);
    CHECK(r.boundary_flags[0]);
    CHECK_FALSE(r.boundary_flags[1]);
}

TEST_CASE("richardson hessian is exact on quadratics") {
    const Objective f = [](const std::vector<double>& x) {
        return -(x[0] * x[0] + 3.0 * x[1] * x[1]);
    };
    const Eigen::MatrixXd h = hessian_richardson(f, {0.7, -1.3});
    CHECK(h(0, 0) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(h(1, 1) == doctest::Approx(-6.0).epsilon(1e-6));
    CHECK(h(0, 1) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("richardson hessian recovers the binomial information") {
    // log-likelihood of 70 successes in 100 trials, in logit(p)
    const Objective f = [](const std::vector<double>& g) {
        return 70.0 * g[0] - 100.0 * std::log1p(std::exp(g[0]));
    };
    const std::vector<double> at{logit(0.7)};
    const Eigen::MatrixXd h = hessian_richardson(f, at);
    CHECK(h(0, 0) == doctest::Approx(-21.0).epsilon(1e-4));
}

TEST_CASE("richardson hessian reports probes that leave the support") {
    const Objective f = [](const std::vector<double>& x) {
        return x[0] < 0.005 ? std::log(1.0 + x[0]) : -std::numeric_limits<double>::infinity();
    };
    try {
        hessian_richardson(f, {0.0});
        FAIL("expected non_finite_evaluation");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_finite_evaluation);
    }
}

TEST_CASE("delta method maps variances to the natural scale") {
    Eigen::MatrixXd cov(2, 2);
    cov << 0.01, 0.0, 0.0, 0.04;
    const std::vector<double> gamma{std::log(100.0), logit(0.5)};
    const auto sds = delta_method(gamma, cov, {Scale::log_count, Scale::logit_prob});
    CHECK(sds[0] == doctest::Approx(10.0));
    CHECK(sds[1] == doctest::Approx(0.05));

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    CHECK(delta_method({0.0}, zero, {Scale::logit_prob})[0] == 0.0);

    Eigen::MatrixXd neg(1, 1);
    neg << -1e-4;
    CHECK_THROWS_AS(delta_method({0.0}, neg, {Scale::logit_prob}), Error);
}

TEST_CASE("wald intervals and their domain guarantee") {
    const auto [lo, hi] = wald_interval(0.0, 1.0, Scale::logit_prob);
    CHECK(lo == doctest::Approx(0.12345).epsilon(1e-3));
    CHECK(hi == doctest::Approx(0.87655).epsilon(1e-3));

    const auto [l2, h2] = wald_interval(std::log(150.0), 0.2, Scale::log_count);
    CHECK(l2 == doctest::Approx(101.36).epsilon(1e-3));
    CHECK(h2 == doctest::Approx(221.99).epsilon(1e-3));

    const auto [l3, h3] = wald_interval(2.0, 0.0, Scale::logit_prob);
    CHECK(l3 == h3); // degenerate point interval

    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double g = rng.uniform(-30.0, 30.0);
        const double sd = rng.uniform(0.0, 10.0);
        const auto [a, b] = wald_interval(g, sd, Scale::logit_prob);
        CHECK(a >= 0.0);
        CHECK(b <= 1.0);
        CHECK(a <= b);
        const auto [c, d] = wald_interval(rng.uniform(-5.0, 20.0), sd, Scale::log_count);
        CHECK(c >= 0.0);
        CHECK(c <= d);
    }
}

TEST_CASE("covariance clamps a non-positive-definite information matrix") {
    Eigen::MatrixXd hess(2, 2);
    hess << -2.0, 0.0, 0.0, 1e-14; // second direction carries no curvature
    const Covariance cov = covariance_from_hessian(hess);
    CHECK(cov.clamped);
    CHECK(cov.cov(0, 0) == doctest::Approx(0.5));
    CHECK(cov.cov(1, 1) >= 1e9);

    Eigen::MatrixXd good(2, 2);
    good << -4.0, 0.0, 0.0, -2.0;
    const Covariance ok = covariance_from_hessian(good);
    CHECK_FALSE(ok.clamped);
    CHECK(ok.cov(0, 0) == doctest::Approx(0.25));
    CHECK(ok.cov(1, 1) == doctest::Approx(0.5));
}

TEST_SUITE_END();
