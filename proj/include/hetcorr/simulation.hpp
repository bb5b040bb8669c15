#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetcorr/copula.hpp"
#include "hetcorr/csf.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/report.hpp"

namespace hetcorr {

enum class ExperimentKind {
    level_csf,
    level_ckt,
    power_csf,
    power_ckt,
    prop4_convergence,
    figure4_density
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// One Monte Carlo study. Read from `key = value` lines; unknown keys are errors.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::level_csf;
    std::size_t n = 1000;
    std::size_t reps = 100;
    double alpha = 0.05;
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;

    // Null family for level studies: "gaussian" (rho) or "frank" (theta).
    std::string family = "gaussian";
    double rho = 0.0;
    double theta = 3.0;

    // Power studies: "gaussian_mixture" or "mallows_subpop".
    std::string alternative = "gaussian_mixture";
    double sub_fraction = 0.25;
    double rho_sub = 0.8;
    std::size_t sub_size = 400;
    double tau_sub = 0.5;
    double window_lo = 0.0;
    double window_hi = 1.0;

    // Test configuration.
    Mode mode = Mode::analytic;
    std::size_t null_reps = 100;
    std::size_t block_count = 0;
    double threshold = kDefaultThreshold;
    std::string calibration_path;

    // prop4_convergence sample sizes.
    std::vector<std::size_t> n_list{100, 1000};

    void validate() const;
};

ExperimentSpec parse_experiment_spec(std::istream& is);
ExperimentSpec load_experiment_spec(const std::string& path);
nlohmann::json to_json(const ExperimentSpec& spec);

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<double> p_values;     // by replicate index
    std::vector<double> statistics;   // test statistic per replicate
    std::vector<double> tau_hats;
    double rejection_rate = 0.0;      // #{p <= alpha} / reps
    Moments summary;                  // of p_values
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    std::size_t undefined = 0;        // replicates where the test did not apply (p set to 1)
    double runtime_seconds = 0.0;
};

nlohmann::json summary_json(const ExperimentResult& r);
void write_p_values_csv(const ExperimentResult& r, std::ostream& os);

/// floor(sub_fraction n) Gaussian(rho_sub) points, the rest independent, shuffled.
CopulaSample gen_gaussian_mixture(std::size_t n, double sub_fraction, double rho_sub,
                                  std::uint64_t seed);

struct SubpopulationSample {
    CopulaSample sample;
    std::vector<std::size_t> sub_indices;
    bool window_short = false;  // fewer than sub_size points in the window
};

/// n independent uniforms; sub_size points drawn from the [lo, hi] x-quantile window
/// have their y values re-ordered by a Mallows(phi(tau_sub)) draw relative to x.
SubpopulationSample gen_mallows_subpop(std::size_t n, std::size_t sub_size, double tau_sub,
                                       double window_lo, double window_hi, std::uint64_t seed);

ExperimentResult run_level_experiment(const ExperimentSpec& spec,
                                      const CalibrationTable* table = nullptr);
ExperimentResult run_power_experiment(const ExperimentSpec& spec,
                                      const CalibrationTable* table = nullptr);

struct Prop4Row {
    std::size_t n = 0;
    double phi = 0.0;
    double mean_copula_distance = 0.0;
    double mean_abs_tau_error = 0.0;
    double mean_tau = 0.0;
};

struct Prop4Report {
    double theta = 0.0;
    double tau_theta = 0.0;
    std::size_t reps = 0;
    std::vector<Prop4Row> rows;
};

/// Uniform x with y permuted by Mallows(phi_from_theta(theta, n)), compared
/// against a Frank(theta) reference sample.
Prop4Report run_prop4_experiment(const std::vector<std::size_t>& n_list, double theta,
                                 std::size_t reps, std::uint64_t seed,
                                 std::size_t reference_size = 20000, std::size_t grid = 50,
                                 std::size_t workers = 1);

struct Figure4Report {
    double theta = 0.0;
    std::size_t n = 0;
    std::vector<double> distances;
    std::vector<double> log_densities;
    double spearman = 0.0;
};

Figure4Report run_figure4_experiment(double theta, std::size_t n, std::size_t reps,
                                     std::uint64_t seed, std::size_t workers = 1);

nlohmann::json to_json(const Prop4Report& r);
nlohmann::json to_json(const Figure4Report& r);

}  // namespace hetcorr
