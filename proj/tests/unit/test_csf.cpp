#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hetcorr/copula.hpp"
#include "hetcorr/csf.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/random.hpp"
#include "hetcorr/simulation.hpp"

using namespace hetcorr;
using Catch::Approx;

namespace {

const CalibrationTable& table() {
    static const CalibrationTable t = calibrate_beta_curve(default_rho_grid(), 5000, 40, 2024, 2);
    return t;
}

RankedSample gaussian(double rho, std::size_t n, std::uint64_t seed) {
    return to_ranked_sample(sample_gaussian_copula(rho, n, seed));
}

}  // namespace

TEST_CASE("csf_statistic", "[csf]") {
    CHECK(csf_statistic(make_ranked_sample(Ranking::identity(150), Ranking::identity(150))) == 150);
    std::vector<int> rev(10);
    for (int i = 0; i < 10; ++i) rev[i] = 10 - i;
    CHECK(csf_statistic(make_ranked_sample(Ranking::identity(10), Ranking(rev)), 0.2) == 2);
    const auto ind = to_ranked_sample(sample_independent(10000, 1));
    CHECK(csf_statistic(ind) / 10000.0 == Approx(0.36).margin(0.02));
    CHECK_THROWS(csf_statistic(ind, 0.0));
    CHECK_THROWS(csf_statistic(ind, 1.0));
}

TEST_CASE("beta_mle", "[csf]") {
    CHECK(beta_mle(std::vector<double>{0.5}) == Approx(1.0 / std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS(beta_mle(std::vector<double>{0.0, 0.0}));
    CHECK_THROWS(beta_mle(std::vector<double>{}));

    Rng rng(2);
    std::vector<double> s(100000);
    for (auto& x : s) x = 1.0 - std::sqrt(1.0 - rng.uniform());  // Beta(1, 2)
    CHECK(beta_mle(s) == Approx(2.0).margin(0.02));

    const auto mix = to_ranked_sample(gen_gaussian_mixture(10000, 0.5, 0.6, 3));
    CHECK(beta_mle(footrule_components(mix.pi, mix.nu).scaled) == Approx(2.65).margin(0.15));
}

TEST_CASE("independent footrule components follow Beta(1,2)", "[csf][property]") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const auto s = to_ranked_sample(sample_independent(10000, seed));
        const auto fc = footrule_components(s.pi, s.nu);
        CHECK(ks_statistic(fc.scaled, [](double x) { return 1.0 - (1.0 - x) * (1.0 - x); }) < 0.02);
    }
}

TEST_CASE("calibrate_beta_curve", "[csf]") {
    const auto& t = table();
    REQUIRE(t.rho_grid.size() == 20);
    CHECK(t.rho_grid.front() == 0.0);
    CHECK(t.max_rho() == Approx(0.95));
    CHECK(t.beta_values.front() == Approx(2.0).margin(0.02));
    for (std::size_t i = 1; i < t.beta_values.size(); ++i) CHECK(t.beta_values[i] > t.beta_values[i - 1]);

    const double b02 = lookup_beta(t, 0.2);
    const auto s = gaussian(0.2, 10000, 99);
    const auto fc = footrule_components(s.pi, s.nu);
    CHECK(ks_statistic(fc.scaled, [&](double x) { return 1.0 - std::pow(1.0 - x, b02); }) < 0.02);

    CHECK_THROWS(calibrate_beta_curve({0.1, 0.2}, 1000, 2, 1));
    CHECK_THROWS(calibrate_beta_curve({0.0, 0.3, 0.2}, 1000, 2, 1));
}

TEST_CASE("calibration does not depend on worker count", "[csf]") {
    const std::vector<double> grid{0.0, 0.3, 0.6};
    const auto a = calibrate_beta_curve(grid, 1000, 6, 5, 1);
    const auto b = calibrate_beta_curve(grid, 1000, 6, 5, 4);
    CHECK(a.beta_values == b.beta_values);
}

TEST_CASE("calibration file round trip", "[csf]") {
    std::stringstream ss;
    write_calibration(table(), ss);
    const auto text = ss.str();
    CHECK(text.rfind("hetcorr-beta-calibration v1\n", 0) == 0);
    CHECK(text.find("n_cal=5000") != std::string::npos);
    CHECK(text.find("reps=40") != std::string::npos);
    CHECK(text.find("seed=2024") != std::string::npos);
    const auto back = read_calibration(ss);
    CHECK(back.rho_grid == table().rho_grid);
    CHECK(back.beta_values == table().beta_values);
    CHECK(back.n_cal == 5000);
    CHECK(back.reps == 40);
    CHECK(back.master_seed == 2024);

    std::stringstream bad("something else\n");
    CHECK_THROWS(read_calibration(bad));
    CHECK_THROWS(load_calibration("/nonexistent/calibration.txt"));
}

TEST_CASE("lookup_beta", "[csf]") {
    CalibrationTable t;
    t.rho_grid = {0.0, 0.5, 1.0 - 0.05};
    t.beta_values = {2.0, 3.0, 9.0};
    CHECK(lookup_beta(t, 0.5) == 3.0);
    CHECK(lookup_beta(t, 0.0) == 2.0);
    CHECK(lookup_beta(t, 0.25) == Approx(2.5));
    CHECK_THROWS_AS(lookup_beta(t, -0.01), std::out_of_range);
    CHECK_THROWS_AS(lookup_beta(t, 0.96), std::out_of_range);
    CHECK(lookup_beta(table(), 0.0) == Approx(2.0).margin(0.02));
}

TEST_CASE("csf_test analytic mode", "[csf]") {
    const auto conc = make_ranked_sample(Ranking::identity(1000), Ranking::identity(1000));
    const auto r = csf_test(conc, &table());
    CHECK(r.p_value < 1e-10);
    CHECK(r.method == Method::csf);
    CHECK(r.mode == Mode::analytic);
    CHECK(r.null_params.count("beta") == 1);

    CHECK_THROWS(csf_test(gaussian(0.2, 1000, 1), nullptr));
    CHECK_THROWS(csf_test(gaussian(0.2, 99, 1), &table()));
    const auto small = csf_test(gaussian(0.2, 200, 1), &table());
    CHECK_FALSE(small.warnings.empty());

    // Negative association: rho_hat clamps to 0.
    const auto neg = csf_test(gaussian(-0.5, 1000, 2), &table());
    CHECK(neg.rho_hat == 0.0);
    CHECK(neg.tau_hat < 0.0);

    // p is the binomial tail at the reported statistic, hence monotone in T_S.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rep = csf_test(gaussian(0.3, 1000, 100 + seed), &table());
        const double p = 1.0 - std::pow(0.8, std::stod(rep.null_params.at("beta")));
        const auto ts = static_cast<long>(rep.statistic);
        CHECK(rep.p_value == Approx(binomial_upper_tail(1000, p, ts)).epsilon(1e-12));
        CHECK(binomial_upper_tail(1000, p, ts + 1) <= rep.p_value);
        CHECK(rep.p_value >= 0.0);
        CHECK(rep.p_value <= 1.0);
    }
}

TEST_CASE("csf_test is invariant under monotone transformations", "[csf][property]") {
    const auto s = sample_gaussian_copula(0.4, 1000, 7);
    std::vector<double> x = s.u, y = s.v;
    const auto a = csf_test(make_ranked_sample(x, y), &table());
    for (auto& v : x) v = std::exp(3.0 * v);
    for (auto& v : y) v = std::pow(v, 3.0) - 7.0;
    const auto b = csf_test(make_ranked_sample(x, y), &table());
    CHECK(a.p_value == b.p_value);
    CHECK(a.statistic == b.statistic);
}

TEST_CASE("csf_test analytic and simulated modes agree", "[csf][property]") {
    CsfOptions sim;
    sim.mode = Mode::simulated;
    sim.alpha_sims = 1000;
    sim.workers = 2;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto s = gaussian(0.3, 1000, derive_seed(31, r));
        sim.seed = derive_seed(32, r);
        const double pa = csf_test(s, &table()).p_value;
        const double ps = csf_test(s, nullptr, sim).p_value;
        const double se = std::sqrt(ps * (1.0 - ps) / 1000.0);
        CHECK(std::abs(pa - ps) < 0.05 + 3.0 * se);
    }
}

TEST_CASE("csf_test simulated mode is reproducible", "[csf]") {
    CsfOptions o;
    o.mode = Mode::simulated;
    o.alpha_sims = 200;
    o.seed = 9;
    const auto s = gaussian(0.2, 500, 3);
    o.workers = 1;
    const auto a = csf_test(s, nullptr, o);
    o.workers = 3;
    const auto b = csf_test(s, nullptr, o);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("csf_test Pearson option", "[csf]") {
    CsfOptions o;
    o.rho_estimator = RhoEstimator::pearson;
    const auto s = gaussian(0.5, 1000, 4);
    const auto r = csf_test(s, &table(), o);
    CHECK(r.null_params.at("rho_estimator") == "pearson");
    CHECK(r.rho_hat == Approx(pearson_correlation(s.x, s.y)));
}
