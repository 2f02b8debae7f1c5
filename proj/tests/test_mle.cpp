#include "plantcap/mle.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/prob_kernel.hpp"
#include "plantcap/rng.hpp"
#include "plantcap/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace plantcap;

TEST_SUITE_BEGIN("mle");

TEST_CASE("closed forms on a textbook example") {
    const FitResult fit = mle_basic_closed(BasicCounts{6, 5, 6, 50});
    CHECK(fit.params[1].estimate == doctest::Approx(0.5));
    CHECK(fit.params[2].estimate == doctest::Approx(5.0 / 17.0));
    CHECK(fit.h_continuous == doctest::Approx(83.0));
    CHECK(fit.h_rounded == 83);
    CHECK(fit.params[1].sd > 0.0);
    CHECK(fit.h_total.ci_lo < 83.0);
    CHECK(fit.h_total.ci_hi > 83.0);
}

TEST_CASE("perfect capture pins every coordinate") {
    const FitResult fit = mle_basic_closed(BasicCounts{5, 0, 0, 5});
    CHECK(fit.params[1].estimate == 1.0);
    CHECK(fit.params[1].boundary);
    CHECK(fit.h_rounded == 0);
    CHECK(fit.h_total.estimate == 0.0);
    CHECK(fit.params[2].estimate == 0.0); // no "maybe" plants at all
}

TEST_CASE("degenerate plant patterns are reported as errors") {
    try {
        mle_basic_closed(BasicCounts{0, 5, 6, 11});
        FAIL("expected no_certain_captures");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_certain_captures);
    }
    try {
        mle_basic_closed(BasicCounts{0, 7, 0, 11});
        FAIL("expected no_certain_plants");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_certain_plants);
    }
}

TEST_CASE("closed-form h grows strictly with the census") {
    std::int64_t prev = -1;
    for (std::int64_t y = 10; y < 60; y += 7) {
        const FitResult fit = mle_basic_closed(BasicCounts{4, 3, 4, y});
        CHECK(fit.h_continuous > static_cast<double>(prev));
        prev = static_cast<std::int64_t>(fit.h_continuous);
    }
}

TEST_CASE("numeric optimizer agrees with the closed forms") {
    SimTruth truth;
    truth.model = Model::basic;
    truth.labels = {"all"};
    Rng rng(2024);
    int done = 0;
    while (done < 30) {
        truth.h_total = rng.uniform(30.0, 900.0);
        truth.p_c = {rng.uniform(0.3, 0.85)};
        truth.p_mb = rng.uniform(0.05, 0.5);
        const std::int64_t m = rng.uniform_int(12, 80);
        Rng gen = Rng::derive(77, static_cast<std::uint64_t>(done));
        const ClassedCounts data = generate(truth, m, gen);
        const IdCounts& d = data.single();
        if (d.m_yes == 0 || d.m_no == 0) continue;
        const BasicCounts b = as_basic(d);
        const FitResult closed = mle_basic_closed(b);
        if (closed.h_continuous <= 1.0) continue;
        const FitResult numeric = mle_numeric(Model::basic, data);
        ++done;
        CHECK(numeric.h_continuous ==
              doctest::Approx(closed.h_continuous).epsilon(1e-3));
        CHECK(numeric.params[1].estimate ==
              doctest::Approx(closed.params[1].estimate).epsilon(1e-3));
        CHECK(numeric.params[2].estimate ==
              doctest::Approx(closed.params[2].estimate).epsilon(1e-3));
    }
}

TEST_CASE("closed-form and numeric fits report the same uncertainty") {
    const BasicCounts d{9, 4, 6, 80};
    const FitResult closed = mle_basic_closed(d);
    const FitResult numeric = mle_numeric(Model::basic, wrap_single(as_id(d)));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(numeric.params[j].estimate ==
              doctest::Approx(closed.params[j].estimate).epsilon(1e-4));
        CHECK(numeric.params[j].sd == doctest::Approx(closed.params[j].sd).epsilon(1e-3));
    }
    CHECK(numeric.h_total.ci_lo == doctest::Approx(closed.h_total.ci_lo).epsilon(1e-3));
    CHECK(numeric.h_total.ci_hi == doctest::Approx(closed.h_total.ci_hi).epsilon(1e-3));
}

TEST_CASE("street survey, New Orleans") {
    const FitResult fit = mle_numeric(Model::id, wrap_single(snight_city("new_orleans")));
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.h_rounded - 69) <= 1);
    CHECK(fit.find("p_c")->estimate == doctest::Approx(0.86).epsilon(0.015));
    CHECK(fit.find("p_i_c")->estimate == doctest::Approx(0.83).epsilon(0.015));
    CHECK(fit.find("p_mb_ni")->estimate == doctest::Approx(0.29).epsilon(0.04));
    CHECK(fit.h_total.sd == doctest::Approx(6.0).epsilon(0.2));
    CHECK(fit.h_total.ci_lo == doctest::Approx(58.0).epsilon(0.05));
    CHECK(fit.h_total.ci_hi == doctest::Approx(82.0).epsilon(0.05));
}

TEST_CASE("street survey, Chicago: identification probability sits on the edge") {
    const FitResult fit = mle_numeric(Model::id, wrap_single(snight_city("chicago")));
    CHECK(std::abs(fit.h_rounded - 54) <= 1);
    const ParamEstimate* pic = fit.find("p_i_c");
    REQUIRE(pic != nullptr);
    CHECK(pic->boundary);
    CHECK(pic->estimate == 1.0);
    CHECK(pic->sd == 0.0);
    CHECK(pic->ci_lo == 1.0);
    CHECK(pic->ci_hi == 1.0);
    CHECK(fit.find("p_c")->estimate == doctest::Approx(0.16).epsilon(0.07));
    CHECK(fit.find("p_mb_ni")->estimate == doctest::Approx(5.0 / 11.0).epsilon(0.01));
}

TEST_CASE("likelihood at the mode dominates nearby perturbations") {
    const ClassedCounts data = wrap_single(snight_city("phoenix"));
    const FitResult fit = mle_numeric(Model::id, data);
    const IdCounts& d = data.single();

    std::vector<double> gamma;
    gamma.push_back(std::log(fit.params[0].estimate));
    for (std::size_t j = 1; j < 4; ++j) {
        double p = fit.params[j].estimate;
        p = std::min(1.0 - 1e-9, std::max(1e-9, p));
        gamma.push_back(logit(p));
    }
    auto value = [&](const std::vector<double>& g) {
        return loglik_id({std::exp(g[0]), expit(g[1]), expit(g[2]), expit(g[3])}, d);
    };
    const double at_mode = value(gamma);
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        auto g = gamma;
        for (auto& v : g) v += rng.uniform(-0.1, 0.1);
        CHECK(value(g) <= at_mode + 1e-9);
    }
}

TEST_CASE("class model on a two-class survey") {
    SimTruth truth;
    truth.model = Model::classed;
    truth.h_total = 600;
    truth.p_c = {0.9, 0.4};
    truth.weights = {0.6, 0.4};
    truth.labels = {"easy", "hard"};
    Rng rng(5150);
    const ClassedCounts data = generate(truth, 60, rng);
    const FitResult fit = mle_numeric(Model::classed, data);
    REQUIRE(fit.converged);
    CHECK(fit.find("H[easy]") != nullptr);
    CHECK(fit.find("p_c[hard]") != nullptr);
    CHECK(fit.h_total.estimate ==
          doctest::Approx(fit.find("H[easy]")->estimate + fit.find("H[hard]")->estimate));
    CHECK(fit.h_total.sd > 0.0);
    CHECK(fit.h_total.ci_lo < fit.h_total.estimate);
    CHECK(fit.h_total.estimate < fit.h_total.ci_hi);
    // pooled estimate lands in a plausible band around the truth
    CHECK(fit.h_total.estimate > 300.0);
    CHECK(fit.h_total.estimate < 1200.0);
}

TEST_SUITE_END();
