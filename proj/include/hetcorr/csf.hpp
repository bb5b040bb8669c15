#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hetcorr/rank.hpp"
#include "hetcorr/report.hpp"

namespace hetcorr {

inline constexpr double kDefaultThreshold = 0.2;

/// Monotone map rho -> beta(rho) estimated against the Gaussian copula.
struct CalibrationTable {
    std::vector<double> rho_grid;
    std::vector<double> beta_values;
    std::size_t n_cal = 0;
    std::size_t reps = 0;
    std::uint64_t master_seed = 0;
    /// Set when Monte Carlo noise forced an isotonic correction.
    bool isotonic_adjusted = false;

    double max_rho() const { return rho_grid.empty() ? 0.0 : rho_grid.back(); }
};

inline constexpr const char* kCalibrationHeader = "hetcorr-beta-calibration v1";

void write_calibration(const CalibrationTable& table, std::ostream& os);
CalibrationTable read_calibration(std::istream& is);
void save_calibration(const CalibrationTable& table, const std::string& path);
CalibrationTable load_calibration(const std::string& path);

/// 0, 0.05, ..., 0.95.
std::vector<double> default_rho_grid();

/// Count of scaled footrule components strictly below `threshold`.
std::int64_t csf_statistic(const RankedSample& sample, double threshold = kDefaultThreshold);

/// MLE of beta for Beta(1, beta): -m / sum log(1 - s_i).
double beta_mle(std::span<const double> scaled_diffs);

CalibrationTable calibrate_beta_curve(std::vector<double> rho_grid, std::size_t n_cal,
                                      std::size_t reps, std::uint64_t master_seed,
                                      std::size_t workers = 1);

/// Piecewise-linear interpolation on the grid.
double lookup_beta(const CalibrationTable& table, double rho);

enum class RhoEstimator { kendall, pearson };

struct CsfOptions {
    Mode mode = Mode::analytic;
    double threshold = kDefaultThreshold;
    std::size_t alpha_sims = 1000;
    std::uint64_t seed = 0;
    RhoEstimator rho_estimator = RhoEstimator::kendall;
    std::size_t workers = 1;
};

/// `table` may be null in simulated mode.
TestReport csf_test(const RankedSample& sample, const CalibrationTable* table,
                    const CsfOptions& options = {});

}  // namespace hetcorr
