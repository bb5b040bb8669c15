#include "hetcorr/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hetcorr/numeric.hpp"
#include "hetcorr/random.hpp"

namespace hetcorr {

namespace {

constexpr double kOpenLo = std::numeric_limits<double>::min();
const double kOpenHi = std::nextafter(1.0, 0.0);

double open_unit(double x) { return std::clamp(x, kOpenLo, kOpenHi); }

void check_interior(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
        throw std::domain_error("copula arguments must lie strictly inside the unit square");
    }
}

// 1 - D(theta) for theta > 0, without cancellation near zero.
double one_minus_debye1(double theta) {
    if (theta < 1e-2) {
        const double t2 = theta * theta;
        return theta / 4.0 - t2 / 36.0 + t2 * t2 / 3600.0 - t2 * t2 * t2 / 211680.0 +
               t2 * t2 * t2 * t2 / 10886400.0;
    }
    return 1.0 - debye1(theta);
}

double debye_integrand(double t) {
    if (t < 1e-5) return 1.0 - t / 2.0 + t * t / 12.0;
    return t / std::expm1(t);
}

// tau_theta for any real theta, 0 included.
double frank_tau(double theta) {
    if (theta == 0.0) return 0.0;
    if (theta < 0.0) return -frank_tau(-theta);
    if (theta < 1e-2) {
        const double t2 = theta * theta;
        return theta / 9.0 - theta * t2 / 900.0 + theta * t2 * t2 / 52920.0;
    }
    return 1.0 - 4.0 / theta * one_minus_debye1(theta);
}

}  // namespace

std::string describe(const Generator& g) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& gen) {
            using T = std::decay_t<decltype(gen)>;
            if constexpr (std::is_same_v<T, GaussianGenerator>) {
                os << "gaussian(rho=" << gen.rho << ")";
            } else if constexpr (std::is_same_v<T, FrankGenerator>) {
                os << "frank(theta=" << gen.theta << ")";
            } else if constexpr (std::is_same_v<T, IndependentGenerator>) {
                os << "independent";
            } else if constexpr (std::is_same_v<T, MixtureGenerator>) {
                os << "mixture(weight=" << gen.weight << ", " << gen.component << ")";
            } else {
                os << "mallows_subpopulation(size=" << gen.sub_size << ", tau=" << gen.tau_sub
                   << ", window=[" << gen.window_lo << "," << gen.window_hi << "])";
            }
        },
        g);
    return os.str();
}

RankedSample to_ranked_sample(const CopulaSample& sample) {
    return make_ranked_sample(sample.u, sample.v);
}

CopulaSample sample_independent(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    CopulaSample s{.u = std::vector<double>(n), .v = std::vector<double>(n),
                   .generator = IndependentGenerator{}, .seed = seed};
    for (std::size_t i = 0; i < n; ++i) {
        s.u[i] = rng.uniform();
        s.v[i] = rng.uniform();
    }
    return s;
}

CopulaSample sample_gaussian_copula(double rho, std::size_t n, std::uint64_t seed) {
    if (!(std::abs(rho) < 1.0)) throw std::domain_error("gaussian copula: |rho| must be < 1");
    Rng rng(seed);
    const double c = std::sqrt(1.0 - rho * rho);
    CopulaSample s{.u = std::vector<double>(n), .v = std::vector<double>(n),
                   .generator = GaussianGenerator{rho}, .seed = seed};
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rho * z1 + c * rng.normal();
        s.u[i] = open_unit(normal_cdf(z1));
        s.v[i] = open_unit(normal_cdf(z2));
    }
    return s;
}

double frank_conditional_quantile(double u, double w, double theta) {
    // Solves dC/du(u, v) = w for v.
    const double num = w * std::expm1(-theta);
    const double den = w + (1.0 - w) * std::exp(-theta * u);
    return -std::log1p(num / den) / theta;
}

CopulaSample sample_frank_copula(double theta, std::size_t n, std::uint64_t seed) {
    if (theta == 0.0 || !std::isfinite(theta)) {
        throw std::domain_error("frank copula: theta must be finite and nonzero");
    }
    Rng rng(seed);
    CopulaSample s{.u = std::vector<double>(n), .v = std::vector<double>(n),
                   .generator = FrankGenerator{theta}, .seed = seed};
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double w = rng.uniform();
        s.u[i] = u;
        s.v[i] = open_unit(frank_conditional_quantile(u, w, theta));
    }
    return s;
}

double frank_cdf(double u, double v, double theta) {
    if (theta == 0.0) return u * v;
    return -std::log1p(std::expm1(-theta * u) * std::expm1(-theta * v) / std::expm1(-theta)) /
           theta;
}

double frank_density(double u, double v, double theta) {
    check_interior(u, v);
    if (theta == 0.0) throw std::domain_error("frank_density: theta must be nonzero");
    const double a = -std::expm1(-theta);  // 1 - e^{-theta}
    const double denom = a - std::expm1(-theta * u) * std::expm1(-theta * v);
    return theta * a * std::exp(-theta * (u + v)) / (denom * denom);
}

double frank_density_hyperbolic(double u, double v, double theta) {
    check_interior(u, v);
    if (theta == 0.0) throw std::domain_error("frank_density: theta must be nonzero");
    const double h = theta / 2.0;
    const double denom = std::exp(theta / 4.0) * std::cosh(h * (u - v)) -
                         std::exp(-theta / 4.0) * std::cosh(h * (u + v - 1.0));
    return h * std::sinh(h) / (denom * denom);
}

double sample_log_density(const CopulaSample& sample, double theta) {
    double total = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        total += std::log(frank_density(sample.u[i], sample.v[i], theta));
    }
    return total;
}

double debye1(double theta) {
    if (!(theta > 0.0)) throw std::domain_error("debye1: theta must be positive");
    if (theta < 1e-4) return 1.0 - theta / 4.0 + theta * theta / 36.0;
    if (theta > 40.0) {
        // integral_0^inf = pi^2/6; the tail beyond theta is sum_k e^{-k theta}(theta/k + 1/k^2).
        double tail = 0.0;
        for (int k = 1; k <= 4; ++k) {
            tail += std::exp(-k * theta) * (theta / k + 1.0 / (static_cast<double>(k) * k));
        }
        return (std::numbers::pi * std::numbers::pi / 6.0 - tail) / theta;
    }
    return integrate(debye_integrand, 0.0, theta, 1e-14 * theta) / theta;
}

double tau_from_theta(double theta) {
    if (theta == 0.0 || !std::isfinite(theta)) {
        throw std::domain_error("tau_from_theta: theta must be finite and nonzero");
    }
    return frank_tau(theta);
}

double theta_from_tau(double tau) {
    if (!(std::abs(tau) < 1.0) || tau == 0.0) {
        throw std::domain_error("theta_from_tau: need 0 < |tau| < 1");
    }
    if (tau < 0.0) return -theta_from_tau(-tau);
    double hi = 1.0;
    while (frank_tau(hi) < tau) hi *= 2.0;
    double lo = 0.0;
    // |d tau / d theta| <= 1/9, so a theta bracket of 1e-9 keeps tau within 1e-10.
    for (int it = 0; it < 400 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (frank_tau(mid) < tau) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double tau_from_phi(double phi, std::size_t n) {
    if (!(phi >= 0.0)) throw std::domain_error("tau_from_phi: phi must be nonnegative");
    if (n < 2) throw std::domain_error("tau_from_phi: n must be at least 2");
    return 2.0 / std::numbers::pi * std::atan(0.18 * static_cast<double>(n) * phi);
}

double phi_from_theta(double theta, std::size_t n) {
    if (n < 2) throw std::domain_error("phi_from_theta: n must be at least 2");
    const double tau = tau_from_theta(theta);
    if (!(std::abs(tau) < 1.0)) throw std::domain_error("phi_from_theta: |tau_theta| reached 1");
    return (100.0 / 18.0) * std::tan(std::numbers::pi / 2.0 * tau) / static_cast<double>(n);
}

ScaleMap make_scale_map(double theta, std::size_t n) {
    return ScaleMap{.theta = theta, .phi = phi_from_theta(theta, n), .n = n,
                    .tau = tau_from_theta(theta)};
}

namespace {

// Cumulative counts C[a][b] = #{i : r_i / n <= a / grid, s_i / n <= b / grid}.
std::vector<double> empirical_copula_grid(const CopulaSample& s, std::size_t grid) {
    const auto pi = rank_vector(s.u);
    const auto nu = rank_vector(s.v);
    const std::size_t n = s.size();
    std::vector<double> cells((grid + 1) * (grid + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // Ascending ranks.
        const std::size_t r = n + 1 - static_cast<std::size_t>(pi[i]);
        const std::size_t q = n + 1 - static_cast<std::size_t>(nu[i]);
        const std::size_t a = (r * grid + n - 1) / n;
        const std::size_t b = (q * grid + n - 1) / n;
        cells[a * (grid + 1) + b] += 1.0;
    }
    for (std::size_t a = 0; a <= grid; ++a) {
        for (std::size_t b = 0; b <= grid; ++b) {
            double acc = cells[a * (grid + 1) + b];
            if (a > 0) acc += cells[(a - 1) * (grid + 1) + b];
            if (b > 0) acc += cells[a * (grid + 1) + b - 1];
            if (a > 0 && b > 0) acc -= cells[(a - 1) * (grid + 1) + b - 1];
            cells[a * (grid + 1) + b] = acc;
        }
    }
    for (double& c : cells) c /= static_cast<double>(n);
    return cells;
}

}  // namespace

double empirical_copula_distance(const CopulaSample& a, const CopulaSample& b, std::size_t grid) {
    if (a.size() == 0 || b.size() == 0) {
        throw std::invalid_argument("empirical_copula_distance: empty sample");
    }
    if (grid < 2) throw std::invalid_argument("empirical_copula_distance: grid must be >= 2");
    const auto ca = empirical_copula_grid(a, grid);
    const auto cb = empirical_copula_grid(b, grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) sup = std::max(sup, std::abs(ca[i] - cb[i]));
    return sup;
}

}  // namespace hetcorr
