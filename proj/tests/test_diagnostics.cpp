#include "plantcap/diagnostics.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace plantcap;

namespace {

std::vector<std::span<const double>> spans(const std::vector<std::vector<double>>& chains) {
    std::vector<std::span<const double>> out;
    for (const auto& c : chains) out.emplace_back(c.data(), c.size());
    return out;
}

} // namespace

TEST_SUITE_BEGIN("diagnostics");

TEST_CASE("identical constant chains are degenerate with rhat one") {
    std::vector<std::vector<double>> chains(2, std::vector<double>(500, 3.25));
    const ParamDiag d = split_rhat_ess(spans(chains));
    CHECK(d.degenerate);
    CHECK(d.rhat == 1.0);
}

TEST_CASE("independent draws look converged with full effective size") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed * 77 + 5);
        std::vector<std::vector<double>> chains(2, std::vector<double>(2000));
        for (auto& c : chains)
            for (auto& v : c) v = rng.normal();
        const ParamDiag d = split_rhat_ess(spans(chains));
        CHECK(d.rhat > 0.99);
        CHECK(d.rhat < 1.01);
        CHECK(d.ess > 0.8 * 4000);
        CHECK(d.ess < 1.2 * 4000);
    }
}

TEST_CASE("a shifted chain blows the scale reduction up") {
    Rng rng(4);
    std::vector<std::vector<double>> chains(2, std::vector<double>(1000));
    for (auto& v : chains[0]) v = rng.normal();
    for (auto& v : chains[1]) v = rng.normal() + 5.0;
    const ParamDiag d = split_rhat_ess(spans(chains));
    CHECK(d.rhat > 1.5);
}

TEST_CASE("too little material is an error, not a guess") {
    std::vector<std::vector<double>> one(1, std::vector<double>(1000, 0.0));
    CHECK_THROWS_AS(split_rhat_ess(spans(one)), Error);
    std::vector<std::vector<double>> thin(2, std::vector<double>(50, 0.0));
    try {
        split_rhat_ess(spans(thin));
        FAIL("expected insufficient_draws");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::insufficient_draws);
    }
}

TEST_CASE("correlated chains lose effective draws") {
    Rng rng(9);
    std::vector<std::vector<double>> chains(2, std::vector<double>(4000));
    for (auto& c : chains) {
        double x = 0.0;
        for (auto& v : c) {
            x = 0.9 * x + std::sqrt(1.0 - 0.81) * rng.normal();
            v = x;
        }
    }
    const ParamDiag d = split_rhat_ess(spans(chains));
    // AR(1) with rho=0.9 has tau = (1+rho)/(1-rho) = 19
    CHECK(d.ess < 8000 / 10.0);
    CHECK(d.ess > 8000 / 40.0);
}

TEST_CASE("posterior summaries from pooled draws") {
    std::vector<double> draws;
    Rng rng(31);
    for (int i = 0; i < 20000; ++i) draws.push_back(rng.normal(10.0, 2.0));
    const PosteriorSummary s = summarize_draws(draws);
    CHECK(s.median == doctest::Approx(10.0).epsilon(0.01));
    CHECK(s.sd == doctest::Approx(2.0).epsilon(0.03));
    CHECK(s.q025 == doctest::Approx(10.0 - 1.96 * 2.0).epsilon(0.02));
    CHECK(s.q975 == doctest::Approx(10.0 + 1.96 * 2.0).epsilon(0.02));
    CHECK(s.q025 <= s.median);
    CHECK(s.median <= s.q975);
}

TEST_CASE("normal quantile function round trip") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-5));
}

TEST_SUITE_END();
