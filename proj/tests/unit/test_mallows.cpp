#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numeric>

#include "hetcorr/copula.hpp"
#include "hetcorr/mallows.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/random.hpp"
#include "support/oracles.hpp"

using namespace hetcorr;
using Catch::Approx;

namespace {

double mallows_loglik_direct(double phi, std::int64_t d, std::size_t n) {
    return -phi * static_cast<double>(d) - log_normalizer(phi, n);
}

// v_k drawn from the truncated geometric law with weights e^{-theta j}.
int draw_stage(Rng& rng, double theta, std::size_t k) {
    std::vector<double> w(k + 1);
    for (std::size_t j = 0; j <= k; ++j) w[j] = std::exp(-theta * static_cast<double>(j));
    double u = rng.uniform() * std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t j = 0; j <= k; ++j) {
        if ((u -= w[j]) <= 0.0) return static_cast<int>(j);
    }
    return static_cast<int>(k);
}

}  // namespace

TEST_CASE("log_normalizer", "[mallows]") {
    CHECK(log_normalizer(0.0, 4) == Approx(std::log(24.0)).epsilon(1e-14));
    CHECK(log_normalizer(1.0, 2) == Approx(std::log1p(std::exp(-1.0))).epsilon(1e-14));
    for (double phi : {0.0, 0.2, 1.0, 3.0}) {
        CHECK(log_normalizer(phi, 3) == Approx(oracle::log_normalizer_enum(phi, 3)).margin(1e-12));
    }
    double fact = 1.0;
    for (std::size_t n = 2; n <= 10; ++n) {
        fact *= static_cast<double>(n);
        CHECK(log_normalizer(0.0, n) == Approx(std::log(fact)).epsilon(1e-13));
    }
}

TEST_CASE("expected_distance", "[mallows]") {
    CHECK(expected_distance(1e-8, 10) == Approx(22.5).margin(1e-5));
    CHECK(expected_distance(50.0, 10) < 1e-10);
    CHECK(expected_distance(0.7, 4) == Approx(oracle::expected_distance_enum(0.7, 4)).margin(1e-10));
    CHECK_THROWS(expected_distance(0.0, 10));
    CHECK_THROWS(expected_distance(-1.0, 10));

    Rng rng(21);
    for (std::size_t n = 2; n <= 7; ++n) {
        for (int t = 0; t < 20; ++t) {
            const double phi = 0.01 + 4.0 * rng.uniform();
            REQUIRE(expected_distance(phi, n) ==
                    Approx(oracle::expected_distance_enum(phi, n)).margin(1e-10));
        }
    }
    double prev = 1e300;
    for (double phi = 0.001; phi < 10.0; phi *= 1.3) {
        const double e = expected_distance(phi, 50);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("stage_expected_v", "[mallows]") {
    CHECK(stage_expected_v(1e-9, 7) == Approx(3.5).margin(1e-6));
    CHECK(stage_expected_v(50.0, 7) == Approx(0.0).margin(1e-15));
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= 3; ++j) {
        num += j * std::exp(-j);
        den += std::exp(-j);
    }
    CHECK(stage_expected_v(1.0, 3) == Approx(num / den).margin(1e-12));
    CHECK_THROWS(stage_expected_v(0.0, 3));
    double prev = 1e9;
    for (double th = 1e-4; th < 40.0; th *= 1.5) {
        const double e = stage_expected_v(th, 12);
        CHECK(e < prev);
        prev = e;
    }
    CHECK(stage_log_normalizer(0.0, 4) == Approx(std::log(5.0)));
}

TEST_CASE("sample_mallows", "[mallows]") {
    std::map<std::vector<int>, int> freq;
    for (int r = 0; r < 10000; ++r) freq[sample_mallows(0.0, 4, derive_seed(1, r)).values()]++;
    CHECK(freq.size() == 24);
    for (const auto& [p, c] : freq) CHECK(std::abs(c / 10000.0 - 1.0 / 24.0) < 0.01);

    int hits = 0;
    for (int r = 0; r < 5000; ++r) hits += sample_mallows(50.0, 10, derive_seed(2, r)) == Ranking::identity(10);
    CHECK(hits > 0.999 * 5000);

    std::vector<double> ds(10000);
    for (int r = 0; r < 10000; ++r) {
        ds[r] = static_cast<double>(kendall_distance(Ranking::identity(100), sample_mallows(0.5, 100, derive_seed(3, r))));
    }
    const auto m = moments(ds);
    CHECK(std::abs(m.mean - expected_distance(0.5, 100)) < 3.0 * m.sd / 100.0);

    CHECK_THROWS(sample_mallows(-0.1, 5, 1));
    CHECK(sample_mallows(0.3, 40, 9) == sample_mallows(0.3, 40, 9));
}

TEST_CASE("Mallows distance is approximately normal at the Frank scale", "[mallows][property]") {
    const std::size_t n = 1000;
    const double phi = phi_from_theta(3.0, n);
    std::vector<double> ds(10000);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        ds[r] = static_cast<double>(kendall_distance(Ranking::identity(n), sample_mallows(phi, n, derive_seed(4, r))));
    }
    CHECK(std::abs(moments(ds).skewness) < 0.1);
}

TEST_CASE("mallows_mle", "[mallows]") {
    const auto d1 = static_cast<std::int64_t>(std::llround(expected_distance(1.0, 100)));
    const auto f = mallows_mle(d1, 100);
    CHECK(f.phi_hat == Approx(1.0).margin(0.01));
    CHECK(f.log_likelihood == Approx(mallows_loglik_direct(f.phi_hat, d1, 100)).epsilon(1e-12));
    CHECK(expected_distance(f.phi_hat, 100) == Approx(static_cast<double>(d1)).epsilon(1e-6));
    CHECK_FALSE(f.saturated);
    CHECK_FALSE(f.boundary);

    const auto b = mallows_mle(3, 4);  // n(n-1)/4 = 3
    CHECK(b.phi_hat == 0.0);
    CHECK(b.boundary);
    CHECK(b.log_likelihood == Approx(-std::log(24.0)));

    const auto s = mallows_mle(0, 50);
    CHECK(s.saturated);
    CHECK(s.phi_hat == kScaleCap);

    CHECK_THROWS(mallows_mle(-1, 10));
    CHECK_THROWS(mallows_mle(46, 10));

    // Sampler as oracle: n = 1000, phi = 0.003.
    std::vector<double> phis(200);
    for (std::size_t r = 0; r < phis.size(); ++r) {
        const auto p = sample_mallows(0.003, 1000, derive_seed(5, r));
        phis[r] = mallows_mle(kendall_distance(Ranking::identity(1000), p), 1000).phi_hat;
    }
    const auto m = moments(phis);
    CHECK(std::abs(m.mean - 0.003) < 3.0 * m.sd / std::sqrt(200.0));
}

TEST_CASE("multistage_decompose", "[mallows]") {
    const auto z = multistage_decompose(Ranking::identity(6), Ranking::identity(6));
    CHECK(z.values() == std::vector<int>(5, 0));
    const auto r = multistage_decompose(Ranking::identity(4), Ranking(std::vector<int>{4, 3, 2, 1}));
    CHECK(r.values() == std::vector<int>{1, 2, 3});
    CHECK(r.total() == 6);
    CHECK_THROWS(multistage_decompose(Ranking::identity(4), Ranking::identity(5)));

    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.below(60);
        std::vector<int> a(n), b(n);
        std::iota(a.begin(), a.end(), 1);
        std::iota(b.begin(), b.end(), 1);
        rng.shuffle(a.begin(), a.end());
        rng.shuffle(b.begin(), b.end());
        const auto v = multistage_decompose(Ranking(a), Ranking(b));
        REQUIRE(v.size() == n - 1);
        REQUIRE(v.total() == kendall_distance(Ranking(a), Ranking(b)));
        for (std::size_t k = 1; k < n; ++k) {
            int brute = 0;
            for (std::size_t j = 0; j < k; ++j) brute += (a[j] - a[k]) * (b[j] - b[k]) < 0;
            REQUIRE(v[k - 1] == brute);
        }
    }
}

TEST_CASE("ranking_from_stages inverts the decomposition", "[mallows][property]") {
    Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + rng.below(80);
        std::vector<int> v(n - 1);
        for (std::size_t k = 1; k < n; ++k) v[k - 1] = static_cast<int>(rng.below(k + 1));
        const StageVector sv(v);
        const auto nu = ranking_from_stages(sv);
        REQUIRE(multistage_decompose(Ranking::identity(n), nu).values() == v);
        REQUIRE(kendall_distance(Ranking::identity(n), nu) == sv.total());
    }
    CHECK_THROWS(StageVector(std::vector<int>{2}));
    CHECK_THROWS(StageVector(std::vector<int>{-1, 0}));
}

TEST_CASE("multistage_fit_smooth", "[mallows]") {
    CHECK_THROWS(multistage_fit_smooth(StageVector{}, 1));
    CHECK_THROWS(multistage_fit_smooth(StageVector(std::vector<int>{0, 1}), 0));
    CHECK_THROWS(multistage_fit_smooth(StageVector(std::vector<int>{0, 1}), 3));

    // block_count = 1 reproduces the Mallows fit.
    const StageVector v(std::vector<int>{1, 0, 2, 1, 3, 0, 2});
    const auto one = multistage_fit_smooth(v, 1);
    const auto mal = mallows_mle(v.total(), 8);
    CHECK(one.log_likelihood == Approx(mal.log_likelihood).margin(1e-9));
    for (double th : one.theta) CHECK(th == one.theta.front());

    // Fully concordant data saturates every block.
    const StageVector zero(std::vector<int>(20, 0));
    const auto sat = multistage_fit_smooth(zero, 20);
    CHECK(sat.saturated_blocks == 20);
    for (double th : sat.theta) CHECK(th == kScaleCap);
    CHECK(sat.log_likelihood <= 0.0);
    CHECK(sat.log_likelihood > -1e-12);

    // Blocks partition the stages.
    const auto fit = multistage_fit_smooth(StageVector(std::vector<int>(30, 0)), 7);
    CHECK(fit.blocks.size() == 7);
    CHECK(fit.blocks.front().first == 1);
    CHECK(fit.blocks.back().second == 30);
    for (std::size_t b = 1; b < fit.blocks.size(); ++b) {
        CHECK(fit.blocks[b].first == fit.blocks[b - 1].second + 1);
        const auto len = fit.blocks[b].second - fit.blocks[b].first + 1;
        CHECK((len == 4 || len == 5));
    }
    CHECK(default_block_count(1000) == 32);
    CHECK(default_block_count(101) == 10);
}

TEST_CASE("multistage fit tracks a two-regime profile", "[mallows]") {
    Rng rng(8);
    const std::size_t stages = 400;
    std::vector<int> v(stages);
    for (std::size_t k = 1; k <= stages; ++k) {
        v[k - 1] = draw_stage(rng, k <= stages * 4 / 10 ? 2.0 : 1e-6, k);
    }
    const auto fit = multistage_fit_smooth(StageVector(v), 20);
    double front = 0.0, back = 0.0;
    for (std::size_t b = 0; b < 8; ++b) front += fit.block_theta[b] / 8.0;
    for (std::size_t b = 8; b < 20; ++b) back += fit.block_theta[b] / 12.0;
    CHECK(front > back);
    CHECK(front > 1.0);
    CHECK(back < 0.05);
}

TEST_CASE("multistage log likelihood nests Mallows", "[mallows][property]") {
    Rng rng(9);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 3 + rng.below(120);
        std::vector<int> v(n - 1);
        const double theta = rng.uniform() < 0.5 ? 0.0 : 3.0 * rng.uniform();
        for (std::size_t k = 1; k < n; ++k) v[k - 1] = draw_stage(rng, theta, k);
        const StageVector sv(v);
        const auto mal = mallows_mle(sv.total(), n);
        const auto blocks = 1 + rng.below(n - 1);
        REQUIRE(multistage_fit_smooth(sv, blocks).log_likelihood >= mal.log_likelihood - 1e-7);
        REQUIRE(multistage_fit_smooth(sv, 1).log_likelihood == Approx(mal.log_likelihood).margin(1e-9));
    }
}
