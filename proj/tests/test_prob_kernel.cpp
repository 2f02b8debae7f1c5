#include "plantcap/prob_kernel.hpp"

#include "plantcap/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace plantcap;

namespace {

// test-side density arithmetic, kept independent of the library's log-space path
double binom_pmf(std::int64_t k, double n, double p) {
    if (k < 0 || static_cast<double>(k) > n + 1e-12) return 0.0;
    const double lc = std::lgamma(n + 1) - std::lgamma(static_cast<double>(k) + 1) -
                      std::lgamma(n - static_cast<double>(k) + 1);
    return std::exp(lc) * std::pow(p, static_cast<double>(k)) *
           std::pow(1.0 - p, n - static_cast<double>(k));
}

double multinom_pmf(std::vector<std::int64_t> counts, std::vector<double> probs) {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    double v = std::tgamma(static_cast<double>(n) + 1);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        v /= std::tgamma(static_cast<double>(counts[j]) + 1);
        v *= std::pow(probs[j], static_cast<double>(counts[j]));
    }
    return v;
}

// exhaustive joint-density oracle for the identification design
double lik_id_brute(const IdParams& p, const IdCounts& d) {
    const CellProbs t = theta_id(p);
    const double mult = multinom_pmf({d.m_i, d.m_yes, d.m_mb, d.m_no}, {t[0], t[1], t[2], t[3]});
    const double pcm = p.p_c * (1 - p.p_i_c) / (p.p_c * (1 - p.p_i_c) + (1 - p.p_c));
    double s = 0.0;
    for (std::int64_t z = 0; z <= d.m_mb; ++z) {
        const std::int64_t h_c = d.y - d.m_i - d.m_yes - z;
        if (h_c < 0 || static_cast<double>(h_c) > p.h) continue;
        double term = binom_pmf(z, static_cast<double>(d.m_mb), pcm) *
                      binom_pmf(h_c, p.h, p.p_c);
        if (d.h_i) term *= binom_pmf(*d.h_i, static_cast<double>(h_c), p.p_i_c);
        s += term;
    }
    return mult * s;
}

} // namespace

TEST_SUITE_BEGIN("probkernel");

TEST_CASE("cell probabilities, basic design") {
    const CellProbs t = theta_basic({150, 0.7, 0.2});
    CHECK(t[0] == doctest::Approx(0.56));
    CHECK(t[1] == doctest::Approx(0.20));
    CHECK(t[2] == doctest::Approx(0.24));

    const CellProbs s = theta_basic({10, 0.5, 0.5});
    CHECK(s[0] == doctest::Approx(0.25));
    CHECK(s[1] == doctest::Approx(0.50));
    CHECK(s[2] == doctest::Approx(0.25));
}

TEST_CASE("cell probabilities, identification design") {
    const CellProbs t = theta_id(0.7, 0.8, 0.2);
    CHECK(t[0] == doctest::Approx(0.560));
    CHECK(t[1] == doctest::Approx(0.112));
    CHECK(t[2] == doctest::Approx(0.088));
    CHECK(t[3] == doctest::Approx(0.240));

    // identification certainty empties the non-identified "yes" cell
    const CellProbs u = theta_id(0.7, 1.0 - 1e-12, 0.2);
    CHECK(u[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(u[2] == doctest::Approx(0.3 * 0.2));
}

TEST_CASE("cells always sum to one") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double pc = rng.uniform(1e-6, 1 - 1e-6);
        const double pic = rng.uniform(1e-6, 1 - 1e-6);
        const double pmb = rng.uniform(1e-6, 1 - 1e-6);
        CHECK(std::abs(theta_basic({1, pc, pmb}).sum() - 1.0) < 1e-12);
        CHECK(std::abs(theta_id(pc, pic, pmb).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("conditional capture among the non-identified") {
    CHECK(conditional_capture_ni(0.7, 0.8) == doctest::Approx(0.14 / 0.44));
    CHECK(conditional_capture_ni(0.3, 0.0) == doctest::Approx(0.3)); // MAR reduction
    CHECK(conditional_capture_ni(0.5, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("latent bounds on the New Orleans counts") {
    const IdCounts no{41, 6, 5, 6, 109, std::nullopt};
    const LatentBounds b70 = latent_bounds(no, 70);
    CHECK(b70.lo == 0);
    CHECK(b70.hi == 5);
    const LatentBounds b58 = latent_bounds(no, 58);
    CHECK(b58.lo == 4);
    CHECK(b58.hi == 5);
    const LatentBounds b40 = latent_bounds(no, 40);
    CHECK(b40.lo == 22);
    CHECK(b40.hi == 5);
    CHECK_FALSE(b40.feasible());
}

TEST_CASE("latent bounds: members give valid splits, outsiders violate support") {
    for (std::int64_t m_mb : {0, 3, 7})
        for (std::int64_t base_extra : {0, 2, 9})
            for (std::int64_t h : {0, 1, 4, 12})
                for (std::int64_t h_i : {-1, 0, 2}) {
                    IdCounts d;
                    d.m_i = 2;
                    d.m_yes = 1;
                    d.m_mb = m_mb;
                    d.m_no = 1;
                    d.y = d.m_i + d.m_yes + base_extra;
                    if (h_i >= 0) d.h_i = h_i;
                    const LatentBounds b = latent_bounds(d, static_cast<double>(h));
                    const std::int64_t lo_check = h_i >= 0 ? h_i : 0;
                    for (std::int64_t z = -1; z <= d.m_mb + 1; ++z) {
                        const std::int64_t h_c = base_extra - z;
                        const bool valid =
                            z >= 0 && z <= d.m_mb && h_c >= lo_check && h_c <= h;
                        const bool inside = b.feasible() && z >= b.lo && z <= b.hi;
                        CHECK(valid == inside);
                    }
                }
}

TEST_CASE("basic likelihood equals the direct density formula") {
    const BasicParams p{150, 0.7, 0.2};
    const BasicCounts d{8, 3, 4, 110};
    const double expected = std::log(multinom_pmf({8, 3, 4}, {0.56, 0.2, 0.24})) +
                            std::log(binom_pmf(102, 153.0, 0.7));
    CHECK(loglik_basic(p, d) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("basic likelihood support edges") {
    // empty target population, all captures accounted for by plants
    const BasicCounts d{5, 0, 2, 5};
    const double only_mult = std::log(multinom_pmf({5, 0, 2}, {0.56, 0.2, 0.24}));
    CHECK(loglik_basic({0, 0.7, 0.2}, d) == doctest::Approx(only_mult).epsilon(1e-10));
    // more captures than individuals that can be captured
    CHECK(loglik_basic({3, 0.7, 0.2}, BasicCounts{2, 1, 1, 10}) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("marginal likelihood with a one-point latent range") {
    // h_i pins h_c: y - m_i - m_yes - z = h_c >= h_i forces z <= 1, h small forces z >= 1
    IdCounts d{3, 2, 4, 1, 9, std::nullopt};
    d.h_i = 3;
    const IdParams p{3.0, 0.6, 0.5, 0.3};
    const LatentBounds b = latent_bounds(d, p.h);
    REQUIRE(b.lo == b.hi); // z = 1
    const double pcm = conditional_capture_ni(p.p_c, p.p_i_c);
    const CellProbs t = theta_id(p);
    const double expected =
        std::log(multinom_pmf({3, 2, 4, 1}, {t[0], t[1], t[2], t[3]})) +
        std::log(binom_pmf(b.lo, 4.0, pcm) * binom_pmf(9 - 3 - 2 - b.lo, p.h, p.p_c) *
                 binom_pmf(3, static_cast<double>(9 - 3 - 2 - b.lo), p.p_i_c));
    CHECK(loglik_id(p, d) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("marginal likelihood matches exhaustive enumeration") {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        IdCounts d;
        d.m_i = rng.uniform_int(0, 4);
        d.m_yes = rng.uniform_int(0, 4);
        d.m_mb = rng.uniform_int(0, 6);
        d.m_no = rng.uniform_int(0, 4);
        d.y = d.m_i + d.m_yes + rng.uniform_int(0, 12);
        if (rng.uniform() < 0.5) d.h_i = rng.uniform_int(0, 6);
        IdParams p;
        p.h = rng.uniform(0.5, 25.0);
        p.p_c = rng.uniform(0.1, 0.9);
        p.p_i_c = rng.uniform(0.1, 0.9);
        p.p_mb_ni = rng.uniform(0.1, 0.9);
        const double brute = lik_id_brute(p, d);
        const double marginal = loglik_id(p, d);
        if (brute <= 0.0) {
            CHECK(marginal == -std::numeric_limits<double>::infinity());
        } else {
            CHECK(marginal == doctest::Approx(std::log(brute)).epsilon(1e-8));
        }
    }
}

TEST_CASE("class likelihood: single class reduces to the id likelihood") {
    const IdCounts d{5, 3, 4, 2, 40, 11};
    const ClassParams cp{{60.0}, {0.55}, 0.7, 0.25};
    const IdParams ip{60.0, 0.55, 0.7, 0.25};
    CHECK(loglik_class(cp, wrap_single(d)) == doctest::Approx(loglik_id(ip, d)));
}

TEST_CASE("class likelihood adds across classes and matches double enumeration") {
    ClassedCounts data;
    data.classes.push_back({"easy", {3, 2, 3, 1, 25, 10}});
    data.classes.push_back({"hard", {1, 1, 4, 3, 12, 2}});
    const ClassParams p{{30.0, 18.0}, {0.8, 0.35}, 0.6, 0.3};

    const double sum = loglik_id({30.0, 0.8, 0.6, 0.3}, data.classes[0].counts) +
                       loglik_id({18.0, 0.35, 0.6, 0.3}, data.classes[1].counts);
    CHECK(loglik_class(p, data) == doctest::Approx(sum).epsilon(1e-12));

    // brute force as the product over classes of exhaustive sums
    const double brute = lik_id_brute({30.0, 0.8, 0.6, 0.3}, data.classes[0].counts) *
                         lik_id_brute({18.0, 0.35, 0.6, 0.3}, data.classes[1].counts);
    CHECK(loglik_class(p, data) == doctest::Approx(std::log(brute)).epsilon(1e-8));
}

TEST_CASE("total probability over the observable support is one") {
    // basic design: enumerate plant splits and census values
    {
        const std::int64_t m = 4, h = 12;
        const BasicParams p{static_cast<double>(h), 0.6, 0.3};
        double total = 0.0;
        for (std::int64_t myes = 0; myes <= m; ++myes)
            for (std::int64_t mmb = 0; mmb + myes <= m; ++mmb) {
                const std::int64_t mno = m - myes - mmb;
                for (std::int64_t y = myes; y <= myes + mmb + h; ++y) {
                    const double ll = loglik_basic(p, BasicCounts{myes, mmb, mno, y});
                    if (std::isfinite(ll)) total += std::exp(ll);
                }
            }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
    // identification design: also enumerate the identified-target count
    {
        const std::int64_t m = 3, h = 6;
        const IdParams p{static_cast<double>(h), 0.55, 0.7, 0.35};
        double total = 0.0;
        for (std::int64_t mi = 0; mi <= m; ++mi)
            for (std::int64_t myes = 0; mi + myes <= m; ++myes)
                for (std::int64_t mmb = 0; mi + myes + mmb <= m; ++mmb) {
                    const std::int64_t mno = m - mi - myes - mmb;
                    for (std::int64_t y = mi + myes; y <= mi + myes + mmb + h; ++y)
                        for (std::int64_t hi = 0; hi <= y - mi - myes; ++hi) {
                            IdCounts d{mi, myes, mmb, mno, y, hi};
                            const double ll = loglik_id(p, d);
                            if (std::isfinite(ll)) total += std::exp(ll);
                        }
                }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("identification likelihood converges to the basic one as p_i_c vanishes") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        BasicCounts b;
        b.m_yes = rng.uniform_int(0, 10);
        b.m_mb = rng.uniform_int(0, 10);
        b.m_no = rng.uniform_int(0, 10);
        b.y = b.m_yes + rng.uniform_int(0, 40);
        // integer h: the z-marginal collapses to the combined binomial exactly
        const double h = static_cast<double>(rng.uniform_int(1, 80));
        const double pc = rng.uniform(0.15, 0.85);
        const double pmb = rng.uniform(0.15, 0.85);
        const double basic = loglik_basic({h, pc, pmb}, b);
        const double id = loglik_id({h, pc, 1e-8, pmb}, as_id(b));
        if (std::isfinite(basic))
            CHECK(id == doctest::Approx(basic).epsilon(1e-6));
        else
            CHECK(id == basic);
    }
}

TEST_SUITE_END();
