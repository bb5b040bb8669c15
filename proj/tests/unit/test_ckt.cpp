#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>

#include "hetcorr/ckt.hpp"
#include "hetcorr/copula.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/random.hpp"
#include "support/oracles.hpp"

using namespace hetcorr;
using Catch::Approx;

namespace {

double tau_of(const RankedSample& s, const std::vector<std::size_t>& idx) {
    std::vector<int> a, b;
    for (auto i : idx) {
        a.push_back(s.pi[i]);
        b.push_back(s.nu[i]);
    }
    const double m = static_cast<double>(idx.size());
    return 1.0 - 4.0 * static_cast<double>(oracle::kendall_brute(a, b)) / (m * (m - 1.0));
}

// Greedy elimination recomputing tau from scratch (ties: largest x first);
// returns prefix taus for k = 2..n.
std::vector<double> greedy_prefix_taus(const RankedSample& s) {
    const std::size_t n = s.size();
    std::vector<std::size_t> alive(n);
    std::iota(alive.begin(), alive.end(), 0);
    std::vector<double> prefix(n - 1);
    while (alive.size() >= 2) {
        prefix[alive.size() - 2] = tau_of(s, alive);
        if (alive.size() == 2) break;
        std::size_t best_pos = 0;
        double best_tau = -2.0;
        for (std::size_t p = 0; p < alive.size(); ++p) {
            auto rest = alive;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(p));
            const double t = tau_of(s, rest);
            const bool better = t > best_tau + 1e-12 ||
                                (t > best_tau - 1e-12 && s.pi[alive[p]] < s.pi[alive[best_pos]]);
            if (better) {
                best_tau = t;
                best_pos = p;
            }
        }
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    return prefix;
}

RankedSample frank(double tau, std::size_t n, std::uint64_t seed) {
    return to_ranked_sample(sample_frank_copula(theta_from_tau(tau), n, seed));
}

}  // namespace

TEST_CASE("taupath on a concordant sample", "[ckt]") {
    const auto s = make_ranked_sample(Ranking::identity(30), Ranking::identity(30));
    const auto t = taupath_reorder(s);
    for (double x : t.prefix_tau) CHECK(x == 1.0);
    CHECK_THROWS(taupath_reorder(make_ranked_sample(Ranking::identity(2), Ranking::identity(2))));
}

TEST_CASE("taupath matches a brute-force greedy oracle", "[ckt]") {
    Rng rng(1);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 3 + rng.below(10);
        std::vector<int> a(n), b(n);
        std::iota(a.begin(), a.end(), 1);
        std::iota(b.begin(), b.end(), 1);
        rng.shuffle(a.begin(), a.end());
        rng.shuffle(b.begin(), b.end());
        const auto s = make_ranked_sample(Ranking(a), Ranking(b));
        const auto path = taupath_reorder(s);
        const auto oracle_prefix = greedy_prefix_taus(s);
        for (std::size_t k = 0; k < oracle_prefix.size(); ++k) {
            REQUIRE(path.prefix_tau[k] == Approx(oracle_prefix[k]).margin(1e-12));
        }
        // Prefix taus are those of the reported order.
        for (std::size_t k = 2; k <= n; ++k) {
            const std::vector<std::size_t> head(path.order.begin(), path.order.begin() + k);
            REQUIRE(path.prefix_tau[k - 2] == Approx(tau_of(s, head)).margin(1e-12));
        }
        REQUIRE(std::set<std::size_t>(path.order.begin(), path.order.end()).size() == n);
        REQUIRE(path.prefix_tau.back() == Approx(kendall_tau(s)).margin(1e-12));
    }
}

TEST_CASE("taupath puts the concordant half first", "[ckt]") {
    Rng rng(2);
    const std::size_t n = 200;
    std::vector<double> x(n), y(n);
    std::vector<bool> conc(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform();
        conc[i] = i % 2 == 0;
        y[i] = conc[i] ? x[i] : 1.0 - x[i];
    }
    const auto path = taupath_reorder(make_ranked_sample(x, y));
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n / 2; ++k) hits += conc[path.order[k]];
    CHECK(hits >= 90);
}

TEST_CASE("ckt_llr basics", "[ckt]") {
    const auto s = frank(0.2, 300, 3);
    const auto one = ckt_llr(s, 1);
    CHECK(one.llr == 0.0);
    const auto r = ckt_llr(s);
    CHECK(r.llr >= 0.0);
    CHECK(r.block_count == default_block_count(300));
    CHECK(r.tau_hat == Approx(kendall_tau(s)));
    CHECK(r.z == Approx(analytic_z(r.llr, r.tau_hat, 300)));
    CHECK_THROWS(ckt_llr(frank(0.2, 99, 3)));

    Rng rng(4);
    for (int t = 0; t < 30; ++t) {
        const auto q = frank(0.05 + 0.5 * rng.uniform(), 100 + rng.below(200), rng.next());
        CHECK(ckt_llr(q, 1 + rng.below(20)).llr >= 0.0);
    }
}

TEST_CASE("ckt_llr is invariant under monotone transformations", "[ckt][property]") {
    const auto base = sample_frank_copula(2.0, 400, 5);
    std::vector<double> x = base.u, y = base.v;
    const double a = ckt_llr(make_ranked_sample(x, y)).llr;
    for (auto& v : x) v = std::log(v);
    for (auto& v : y) v = 5.0 + v * v * v;
    CHECK(ckt_llr(make_ranked_sample(x, y)).llr == a);
}

TEST_CASE("ckt_llr is invariant under reordering of observations", "[ckt][property]") {
    const auto base = sample_frank_copula(2.0, 400, 6);
    const double a = ckt_llr(to_ranked_sample(base)).llr;
    Rng rng(7);
    std::vector<std::size_t> perm(base.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<double> x, y;
    for (auto i : perm) {
        x.push_back(base.u[i]);
        y.push_back(base.v[i]);
    }
    CHECK(ckt_llr(make_ranked_sample(x, y)).llr == Approx(a).epsilon(1e-9));
}

TEST_CASE("discordance within a subset depends only on relative ranks", "[ckt][property]") {
    Rng rng(8);
    const auto s = sample_gaussian_copula(0.4, 200, 9);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> xs, ys, ux, uy;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (rng.uniform() < 0.3) {
                ux.push_back(s.u[i]);
                uy.push_back(s.v[i]);
            }
        }
        const auto rx = rank_vector(ux);
        const auto ry = rank_vector(uy);
        for (std::size_t i = 0; i < ux.size(); ++i) {
            for (std::size_t j = i + 1; j < ux.size(); ++j) {
                const bool raw = (ux[i] - ux[j]) * (uy[i] - uy[j]) < 0;
                const bool rel = (rx[i] - rx[j]) * (ry[i] - ry[j]) < 0;
                REQUIRE(raw == rel);
            }
        }
    }
}

TEST_CASE("analytic Z", "[ckt]") {
    const double tau = 0.2;
    const std::size_t n = 1000;
    CHECK(analytic_null_mean(tau, n) == Approx(860.6));
    CHECK(analytic_null_sd(n) == Approx(27.0));
    CHECK(analytic_z(860.6, tau, n) == Approx(0.0).margin(1e-12));
    CHECK(normal_sf(analytic_z(860.6, tau, n)) == Approx(0.5));
    CHECK(analytic_z(900.0, tau, n) > analytic_z(890.0, tau, n));
    CHECK(analytic_z(900.0, 0.25, n) > analytic_z(900.0, 0.2, n));
    CHECK(analytic_window(0.2, 1000));
    CHECK_FALSE(analytic_window(0.1, 1000));
    CHECK_FALSE(analytic_window(0.2, 500));
    CHECK_FALSE(analytic_window(0.35, 1000));
}

TEST_CASE("ckt_test modes", "[ckt]") {
    const auto s = frank(0.2, 1000, 10);
    CktOptions o;
    o.mode = Mode::analytic;
    const auto a = ckt_test(s, o);
    CHECK(a.mode == Mode::analytic);
    const auto r = ckt_llr(s);
    CHECK(a.statistic == r.llr);
    CHECK(a.p_value == Approx(normal_sf(r.z)));

    const auto wide = frank(0.5, 300, 11);
    const auto f = ckt_test(wide, o);
    CHECK(f.mode == Mode::simulated);
    CHECK_FALSE(f.warnings.empty());
    CHECK(f.p_value > 0.0);
    CHECK(f.p_value <= 1.0);

    CHECK_THROWS_AS(ckt_test(frank(-0.2, 300, 12)), std::domain_error);

    // Simulated p-value uses the add-one estimator.
    CktOptions sim;
    sim.null_reps = 19;
    sim.seed = 4;
    const auto p = ckt_test(wide, sim).p_value * 20.0;
    CHECK(p == Approx(std::round(p)));
    CHECK(p >= 1.0);
}

TEST_CASE("simulated p-values are uniform under the Frank null", "[ckt][property]") {
    std::vector<double> ps(100);
    CktOptions o;
    o.null_reps = 99;
    for (std::size_t r = 0; r < ps.size(); ++r) {
        o.seed = derive_seed(13, r);
        ps[r] = ckt_test(frank(0.2, 200, derive_seed(14, r)), o).p_value;
    }
    CHECK(ks_statistic(ps, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 0.15);
}

TEST_CASE("CKT null reference moments at n = 1000", "[ckt]") {
    const auto ref = ckt_null_reference(1000, 0.2, 500, 15, 0, 2);
    CHECK(std::abs(ref.skewness) < 0.3);
    const double var2 = 4.0 * ref.sd * ref.sd;
    CHECK(var2 > 1500.0);
    CHECK(var2 < 4000.0);
    CHECK(var2 < 2.0 * 2.0 * ref.mean);
    CHECK(ref.mean == Approx(860.6).epsilon(0.15));
    CHECK(ref.q05 < ref.q50);
    CHECK(ref.q50 < ref.q95);
    CHECK_THROWS(ckt_null_reference(1000, 0.0, 10, 1));
}

TEST_CASE("CKT null reference is reproducible across worker counts", "[ckt]") {
    const auto a = ckt_null_reference(200, 0.3, 12, 16, 0, 1);
    const auto b = ckt_null_reference(200, 0.3, 12, 16, 0, 3);
    CHECK(a.llr == b.llr);
}

// The additive mean approximation falls with tau; the greedy-path pipeline's
// null mean rises instead. Kept as a known deviation.
TEST_CASE("CKT null mean decreases as tau increases", "[ckt][!shouldfail]") {
    const auto lo = ckt_null_reference(1000, 0.1, 100, 17, 0, 2);
    const auto hi = ckt_null_reference(1000, 0.3, 100, 18, 0, 2);
    CHECK(hi.mean < lo.mean);
}
