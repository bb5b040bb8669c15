#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hetcorr/rank.hpp"

namespace hetcorr {

struct GaussianGenerator {
    double rho = 0.0;
};
struct FrankGenerator {
    double theta = 0.0;
};
struct IndependentGenerator {};
/// `weight` of the points come from `component`; the rest are independent.
struct MixtureGenerator {
    double weight = 0.0;
    std::string component;
};
/// Independent uniforms with a Mallows-reordered subpopulation.
struct MallowsSubpopulationGenerator {
    std::size_t sub_size = 0;
    double tau_sub = 0.0;
    double window_lo = 0.0;
    double window_hi = 1.0;
};

using Generator = std::variant<GaussianGenerator, FrankGenerator, IndependentGenerator,
                               MixtureGenerator, MallowsSubpopulationGenerator>;

std::string describe(const Generator& g);

/// n points on the open unit square plus where they came from.
struct CopulaSample {
    std::vector<double> u;
    std::vector<double> v;
    Generator generator;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return u.size(); }
};

RankedSample to_ranked_sample(const CopulaSample& sample);

CopulaSample sample_independent(std::size_t n, std::uint64_t seed);
CopulaSample sample_gaussian_copula(double rho, std::size_t n, std::uint64_t seed);
CopulaSample sample_frank_copula(double theta, std::size_t n, std::uint64_t seed);

/// Conditional quantile of the Frank copula: v with dC/du(u, v) = w.
double frank_conditional_quantile(double u, double w, double theta);

double frank_cdf(double u, double v, double theta);

/// Frank copula density in its exponential form.
double frank_density(double u, double v, double theta);

/// The same density written with sinh/cosh (the Starr limit-measure form).
double frank_density_hyperbolic(double u, double v, double theta);

double sample_log_density(const CopulaSample& sample, double theta);

/// D(theta) = (1/theta) * integral_0^theta t / (e^t - 1) dt, theta > 0.
double debye1(double theta);

/// Frank tau_theta = 1 - (4/theta)(1 - D(theta)); odd in theta.
double tau_from_theta(double theta);
double theta_from_tau(double tau);

/// Mallows tau_phi = (2/pi) atan(0.18 n phi).
double tau_from_phi(double phi, std::size_t n);

/// phi = (100 / 18n) tan((pi/2) tau_theta). Odd in theta.
double phi_from_theta(double theta, std::size_t n);

/// Linked Frank and Mallows scales at a given n.
struct ScaleMap {
    double theta = 0.0;
    double phi = 0.0;
    std::size_t n = 0;
    double tau = 0.0;
};

ScaleMap make_scale_map(double theta, std::size_t n);

/// Sup over a grid x grid lattice of the difference between the two
/// rank-based empirical copulas.
double empirical_copula_distance(const CopulaSample& a, const CopulaSample& b, std::size_t grid);

}  // namespace hetcorr
