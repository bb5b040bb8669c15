#include "hetcorr/mallows.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hetcorr/random.hpp"

namespace hetcorr {

namespace {

// 1/(e^x - 1) - 1/x, accurate near zero.
double bose_minus_pole(double x) {
    if (x < 1e-2) {
        const double x2 = x * x;
        return -0.5 + x / 12.0 - x * x2 / 720.0 + x * x2 * x2 / 30240.0;
    }
    if (x > 700.0) return -1.0 / x;
    return 1.0 / std::expm1(x) - 1.0 / x;
}

double stage_mean(double theta, std::size_t k) {
    if (theta == 0.0) return static_cast<double>(k) / 2.0;
    const auto k1 = static_cast<double>(k + 1);
    // The 1/theta poles of the two terms cancel analytically.
    return bose_minus_pole(theta) - k1 * bose_minus_pole(k1 * theta);
}

struct ScaleFit {
    double theta = 0.0;
    bool saturated = false;
    bool boundary = false;
};

double block_expected(double theta, std::size_t first, std::size_t last) {
    double s = 0.0;
    for (std::size_t k = first; k <= last; ++k) s += stage_mean(theta, k);
    return s;
}

double block_log_normalizer(double theta, std::size_t first, std::size_t last) {
    double s = 0.0;
    for (std::size_t k = first; k <= last; ++k) s += stage_log_normalizer(theta, k);
    return s;
}

// Common scale for stages first..last given the observed sum of their counts.
ScaleFit fit_common_scale(double observed, std::size_t first, std::size_t last) {
    const double uniform_mean = block_expected(0.0, first, last);
    if (observed <= 0.0) return {kScaleCap, true, false};
    if (observed >= uniform_mean) return {0.0, false, true};
    if (block_expected(kScaleCap, first, last) >= observed) return {kScaleCap, true, false};
    double lo = kScaleFloor;
    double hi = kScaleCap;
    // Expected count is decreasing in theta.
    while (hi - lo > kScaleTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (block_expected(mid, first, last) > observed) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), false, false};
}

}  // namespace

double stage_log_normalizer(double theta, std::size_t k) {
    if (theta < 0.0) throw std::domain_error("stage_log_normalizer: theta must be nonnegative");
    const auto k1 = static_cast<double>(k + 1);
    if (theta == 0.0) return std::log(k1);
    return std::log(-std::expm1(-k1 * theta)) - std::log(-std::expm1(-theta));
}

double stage_expected_v(double theta, std::size_t k) {
    if (!(theta > 0.0)) throw std::domain_error("stage_expected_v: theta must be positive");
    if (k < 1) throw std::domain_error("stage_expected_v: k must be >= 1");
    return stage_mean(theta, k);
}

double log_normalizer(double phi, std::size_t n) {
    if (phi < 0.0) throw std::domain_error("log_normalizer: phi must be nonnegative");
    if (n < 2) throw std::domain_error("log_normalizer: n must be >= 2");
    return block_log_normalizer(phi, 1, n - 1);
}

double expected_distance(double phi, std::size_t n) {
    if (!(phi > 0.0)) throw std::domain_error("expected_distance: phi must be positive");
    if (n < 2) return 0.0;
    return block_expected(phi, 1, n - 1);
}

StageVector::StageVector(std::vector<int> v) : v_(std::move(v)) {
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if (v_[i] < 0 || static_cast<std::size_t>(v_[i]) > i + 1) {
            throw std::invalid_argument("StageVector: v_k must lie in 0..k");
        }
    }
}

std::int64_t StageVector::total() const {
    return std::accumulate(v_.begin(), v_.end(), std::int64_t{0});
}

Ranking ranking_from_stages(const StageVector& v) {
    const std::size_t n = v.size() + 1;
    std::vector<std::size_t> order;
    order.reserve(n);
    order.push_back(0);
    for (std::size_t k = 1; k < n; ++k) {
        // v_k of the earlier items end up after item k.
        const auto pos = static_cast<std::ptrdiff_t>(k - static_cast<std::size_t>(v[k - 1]));
        order.insert(order.begin() + pos, k);
    }
    std::vector<int> nu(n);
    for (std::size_t pos = 0; pos < n; ++pos) nu[order[pos]] = static_cast<int>(pos + 1);
    return Ranking(std::move(nu));
}

Ranking sample_mallows(double phi, std::size_t n, std::uint64_t seed) {
    if (phi < 0.0) throw std::domain_error("sample_mallows: phi must be nonnegative");
    if (n == 0) return Ranking{};
    Rng rng(seed);
    std::vector<int> v(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        const double u = rng.uniform();
        std::int64_t j = 0;
        if (phi == 0.0) {
            j = static_cast<std::int64_t>(u * static_cast<double>(k + 1));
        } else {
            // Inverse CDF of P(V = j) ∝ e^{-phi j}, j = 0..k.
            const double mass = -std::expm1(-static_cast<double>(k + 1) * phi);
            j = static_cast<std::int64_t>(std::ceil(-std::log1p(-u * mass) / phi)) - 1;
        }
        v[k - 1] = static_cast<int>(std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(k)));
    }
    return ranking_from_stages(StageVector(std::move(v)));
}

MallowsFit mallows_mle(std::int64_t distance, std::size_t n) {
    if (n < 2) throw std::invalid_argument("mallows_mle: n must be >= 2");
    const auto max_d = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    if (distance < 0 || distance > max_d) {
        throw std::invalid_argument("mallows_mle: distance outside 0..n(n-1)/2");
    }
    const auto fit = fit_common_scale(static_cast<double>(distance), 1, n - 1);
    MallowsFit out;
    out.phi_hat = fit.theta;
    out.saturated = fit.saturated;
    out.boundary = fit.boundary;
    out.distance = distance;
    out.n = n;
    out.log_likelihood =
        -out.phi_hat * static_cast<double>(distance) - log_normalizer(out.phi_hat, n);
    return out;
}

StageVector multistage_decompose(const Ranking& x_in_order, const Ranking& y_in_order) {
    if (x_in_order.size() != y_in_order.size()) {
        throw std::invalid_argument("multistage_decompose: length mismatch");
    }
    const std::size_t n = x_in_order.size();
    if (n < 2) return StageVector{};
    std::vector<int> v(n - 1, 0);
    const auto& xs = x_in_order.values();
    const auto& ys = y_in_order.values();
    for (std::size_t k = 1; k < n; ++k) {
        const int xk = xs[k];
        const int yk = ys[k];
        int count = 0;
        for (std::size_t j = 0; j < k; ++j) {
            count += static_cast<int>((xs[j] < xk) != (ys[j] < yk));
        }
        v[k - 1] = count;
    }
    return StageVector(std::move(v));
}

std::size_t default_block_count(std::size_t n) {
    if (n < 2) return 1;
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n - 1))));
}

MultistageFit multistage_fit_smooth(const StageVector& v, std::size_t block_count) {
    const std::size_t m = v.size();
    if (m == 0) throw std::invalid_argument("multistage_fit_smooth: empty stage vector");
    if (block_count < 1 || block_count > m) {
        throw std::invalid_argument("multistage_fit_smooth: block_count must lie in 1..n-1");
    }
    MultistageFit fit;
    fit.theta.resize(m);
    const std::size_t base = m / block_count;
    const std::size_t extra = m % block_count;
    std::size_t first = 1;
    for (std::size_t b = 0; b < block_count; ++b) {
        const std::size_t last = first + base + (b < extra ? 1 : 0) - 1;
        std::int64_t observed = 0;
        for (std::size_t k = first; k <= last; ++k) observed += v[k - 1];
        const auto sf = fit_common_scale(static_cast<double>(observed), first, last);
        fit.blocks.emplace_back(first, last);
        fit.block_theta.push_back(sf.theta);
        fit.saturated_blocks += sf.saturated ? 1 : 0;
        fit.boundary_blocks += sf.boundary ? 1 : 0;
        for (std::size_t k = first; k <= last; ++k) fit.theta[k - 1] = sf.theta;
        fit.log_likelihood += -sf.theta * static_cast<double>(observed) -
                              block_log_normalizer(sf.theta, first, last);
        first = last + 1;
    }
    return fit;
}

}  // namespace hetcorr
