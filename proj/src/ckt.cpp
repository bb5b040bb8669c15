#include "hetcorr/ckt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hetcorr/copula.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/parallel.hpp"
#include "hetcorr/random.hpp"

namespace hetcorr {

TaupathOrder taupath_reorder(const RankedSample& sample) {
    const std::size_t n = sample.size();
    if (n < 3) throw std::invalid_argument("taupath_reorder: need n >= 3");
    const auto& px = sample.pi.values();
    const auto& py = sample.nu.values();
    auto c = per_point_discordance(sample.pi, sample.nu);
    std::int64_t d = kendall_distance(sample.pi, sample.nu);
    std::vector<char> alive(n, 1);
    std::vector<std::size_t> removed;
    removed.reserve(n);
    TaupathOrder out;
    out.prefix_tau.assign(n - 1, 0.0);
    for (std::size_t m = n; m >= 2; --m) {
        const auto md = static_cast<double>(m);
        out.prefix_tau[m - 2] = 1.0 - 4.0 * static_cast<double>(d) / (md * (md - 1.0));
        // Dropping i leaves D - c_i discordances, so the best removal has maximal c_i.
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            if (best == n || c[i] > c[best] || (c[i] == c[best] && px[i] < px[best])) best = i;
        }
        alive[best] = 0;
        removed.push_back(best);
        d -= c[best];
        const int bx = px[best];
        const int by = py[best];
        for (std::size_t j = 0; j < n; ++j) {
            if (alive[j] && ((px[j] < bx) != (py[j] < by))) --c[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) removed.push_back(i);
    }
    out.order.assign(removed.rbegin(), removed.rend());
    return out;
}

CktResult ckt_llr(const RankedSample& sample, std::size_t block_count) {
    const std::size_t n = sample.size();
    if (n < 100) throw std::invalid_argument("ckt_llr: need n >= 100");
    if (block_count == 0) block_count = default_block_count(n);
    CktResult r;
    r.n = n;
    r.block_count = block_count;
    const auto distance = kendall_distance(sample.pi, sample.nu);
    r.tau_hat = 1.0 - 4.0 * static_cast<double>(distance) /
                          (static_cast<double>(n) * static_cast<double>(n - 1));
    r.mallows = mallows_mle(distance, n);

    const auto path = taupath_reorder(sample);
    std::vector<int> xs(n);
    std::vector<int> ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = sample.pi[path.order[k]];
        ys[k] = sample.nu[path.order[k]];
    }
    const auto stages = multistage_decompose(Ranking(std::move(xs)), Ranking(std::move(ys)));
    r.multistage = multistage_fit_smooth(stages, block_count);
    // Nesting makes the difference nonnegative up to root-finder tolerance.
    r.llr = std::max(0.0, r.multistage.log_likelihood - r.mallows.log_likelihood);
    r.z = analytic_z(r.llr, r.tau_hat, n);
    r.null_mean = analytic_null_mean(r.tau_hat, n);
    r.null_sd = analytic_null_sd(n);
    return r;
}

double analytic_null_mean(double tau_hat, std::size_t n) {
    return static_cast<double>(n) + 20.0 - 797.0 * tau_hat;
}

double analytic_null_sd(std::size_t n) { return 0.02 * static_cast<double>(n) + 7.0; }

double analytic_z(double llr, double tau_hat, std::size_t n) {
    return (llr - analytic_null_mean(tau_hat, n)) / analytic_null_sd(n);
}

bool analytic_window(double tau_hat, std::size_t n) {
    return tau_hat > 0.10 && tau_hat < 0.30 && n > 500 && n < 3000;
}

NullReference ckt_null_reference(std::size_t n, double tau, std::size_t reps, std::uint64_t seed,
                                 std::size_t block_count, std::size_t workers) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("ckt_null_reference: tau in (0,1)");
    if (reps < 1) throw std::invalid_argument("ckt_null_reference: reps must be positive");
    NullReference ref;
    ref.n = n;
    ref.tau = tau;
    ref.theta = theta_from_tau(tau);
    ref.block_count = block_count == 0 ? default_block_count(n) : block_count;
    ref.llr.resize(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const auto s = sample_frank_copula(ref.theta, n, derive_seed(seed, r));
        ref.llr[r] = ckt_llr(to_ranked_sample(s), ref.block_count).llr;
    });
    const auto m = moments(ref.llr);
    ref.mean = m.mean;
    ref.sd = m.sd;
    ref.skewness = m.skewness;
    ref.q05 = quantile(ref.llr, 0.05);
    ref.q50 = quantile(ref.llr, 0.50);
    ref.q95 = quantile(ref.llr, 0.95);
    return ref;
}

TestReport ckt_test(const RankedSample& sample, const CktOptions& options) {
    const std::size_t n = sample.size();
    if (n < 100) throw std::invalid_argument("ckt_test: need n >= 100");
    const auto tau_hat = kendall_tau(sample);
    if (!(tau_hat > 0.0)) {
        throw std::domain_error(
            "ckt_test: overall tau <= 0; negate y for negative association or use an "
            "independence test");
    }
    const auto res = ckt_llr(sample, options.block_count);
    TestReport rep;
    rep.method = Method::ckt;
    rep.n = n;
    rep.statistic = res.llr;
    rep.tau_hat = tau_hat;
    rep.rho_hat = std::sin(std::numbers::pi * tau_hat / 2.0);
    rep.mode = options.mode;
    if (rep.mode == Mode::analytic && !analytic_window(tau_hat, n)) {
        rep.mode = Mode::simulated;
        rep.warnings.push_back(
            "analytic approximation needs 0.1 < tau < 0.3 and 500 < n < 3000; using simulated "
            "null");
    }
    rep.null_params["block_count"] = std::to_string(res.block_count);
    rep.null_params["mallows_phi"] = format_double(res.mallows.phi_hat);
    rep.null_params["mallows_saturated"] = res.mallows.saturated ? "true" : "false";
    rep.null_params["mallows_boundary"] = res.mallows.boundary ? "true" : "false";
    rep.null_params["saturated_blocks"] = std::to_string(res.multistage.saturated_blocks);
    rep.null_params["boundary_blocks"] = std::to_string(res.multistage.boundary_blocks);
    rep.null_params["ties_x"] = std::to_string(sample.x_ties);
    rep.null_params["ties_y"] = std::to_string(sample.y_ties);
    if (sample.x_ties + sample.y_ties > 0) {
        rep.warnings.push_back("ties present; broken by observation order");
    }
    if (rep.mode == Mode::analytic) {
        rep.p_value = normal_sf(res.z);
        rep.null_params["null_mean"] = format_double(res.null_mean);
        rep.null_params["null_sd"] = format_double(res.null_sd);
        rep.null_params["z"] = format_double(res.z);
    } else {
        if (options.null_reps == 0) throw std::invalid_argument("ckt_test: null_reps must be > 0");
        if (tau_hat == 1.0) {
            // The Frank null degenerates to the comonotone copula, whose llr is 0.
            rep.p_value = 1.0;
            rep.null_params["null_reps"] = "0";
            rep.warnings.push_back("tau = 1: perfectly concordant sample is the Frank limit");
            return rep;
        }
        const auto ref = ckt_null_reference(n, tau_hat, options.null_reps, options.seed,
                                            res.block_count, options.workers);
        const auto exceed =
            std::count_if(ref.llr.begin(), ref.llr.end(), [&](double l) { return l >= res.llr; });
        rep.p_value = static_cast<double>(1 + exceed) / static_cast<double>(options.null_reps + 1);
        rep.null_params["frank_theta"] = format_double(ref.theta);
        rep.null_params["null_reps"] = std::to_string(options.null_reps);
        rep.null_params["null_mean"] = format_double(ref.mean);
        rep.null_params["null_sd"] = format_double(ref.sd);
        rep.null_params["seed"] = std::to_string(options.seed);
    }
    return rep;
}

}  // namespace hetcorr
