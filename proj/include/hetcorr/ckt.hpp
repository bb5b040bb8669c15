#pragma once

#include <cstdint>
#include <vector>

#include "hetcorr/mallows.hpp"
#include "hetcorr/rank.hpp"
#include "hetcorr/report.hpp"

namespace hetcorr {

/// Observation order with the most concordant points first.
struct TaupathOrder {
    std::vector<std::size_t> order;  // 0-based observation indices
    std::vector<double> prefix_tau;  // prefix_tau[k - 2] = tau of the first k points, k = 2..n
};

/// Greedy backward elimination: repeatedly drop the point whose removal leaves
/// the largest tau (on ties, the point with the largest x); the reversed removal
/// order is the path. Ties are resolved by the point itself, not its list position,
/// so the path does not depend on how the observations are ordered.
TaupathOrder taupath_reorder(const RankedSample& sample);

struct CktResult {
    double llr = 0.0;
    double z = 0.0;
    double tau_hat = 0.0;
    std::size_t n = 0;
    std::size_t block_count = 0;
    Mode mode = Mode::analytic;
    double null_mean = 0.0;
    double null_sd = 0.0;
    MallowsFit mallows;
    MultistageFit multistage;
};

/// Mallows-vs-multistage log likelihood ratio. block_count = 0 selects
/// default_block_count(n).
CktResult ckt_llr(const RankedSample& sample, std::size_t block_count = 0);

/// Additive approximation of the null moments, valid for 0.1 < tau < 0.3 and
/// 500 < n < 3000.
double analytic_null_mean(double tau_hat, std::size_t n);
double analytic_null_sd(std::size_t n);
double analytic_z(double llr, double tau_hat, std::size_t n);
bool analytic_window(double tau_hat, std::size_t n);

struct NullReference {
    std::size_t n = 0;
    double tau = 0.0;
    double theta = 0.0;
    std::size_t block_count = 0;
    std::vector<double> llr;  // by replicate index
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
};

/// LLR distribution under Frank(theta(tau)) at sample size n.
NullReference ckt_null_reference(std::size_t n, double tau, std::size_t reps, std::uint64_t seed,
                                 std::size_t block_count = 0, std::size_t workers = 1);

struct CktOptions {
    Mode mode = Mode::simulated;
    std::size_t null_reps = 200;
    std::size_t block_count = 0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

TestReport ckt_test(const RankedSample& sample, const CktOptions& options = {});

}  // namespace hetcorr
