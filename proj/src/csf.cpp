#include "hetcorr/csf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hetcorr/copula.hpp"
#include "hetcorr/numeric.hpp"
#include "hetcorr/parallel.hpp"
#include "hetcorr/random.hpp"

namespace hetcorr {

void write_calibration(const CalibrationTable& table, std::ostream& os) {
    os << kCalibrationHeader << '\n';
    os << "n_cal=" << table.n_cal << '\n';
    os << "reps=" << table.reps << '\n';
    os << "seed=" << table.master_seed << '\n';
    os << "rho,beta\n";
    for (std::size_t i = 0; i < table.rho_grid.size(); ++i) {
        os << format_double(table.rho_grid[i]) << ',' << format_double(table.beta_values[i])
           << '\n';
    }
}

CalibrationTable read_calibration(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCalibrationHeader) {
        throw std::runtime_error("calibration: missing header '" +
                                 std::string(kCalibrationHeader) + "'");
    }
    CalibrationTable t;
    bool have_n = false;
    bool have_reps = false;
    bool have_seed = false;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "rho,beta") continue;
        try {
            if (line.rfind("n_cal=", 0) == 0) {
                t.n_cal = std::stoull(line.substr(6));
                have_n = true;
            } else if (line.rfind("reps=", 0) == 0) {
                t.reps = std::stoull(line.substr(5));
                have_reps = true;
            } else if (line.rfind("seed=", 0) == 0) {
                t.master_seed = std::stoull(line.substr(5));
                have_seed = true;
            } else {
                const auto comma = line.find(',');
                if (comma == std::string::npos) throw std::invalid_argument("no comma");
                t.rho_grid.push_back(std::stod(line.substr(0, comma)));
                t.beta_values.push_back(std::stod(line.substr(comma + 1)));
            }
        } catch (const std::logic_error&) {
            throw std::runtime_error("calibration: malformed line " + std::to_string(line_no) +
                                     ": '" + line + "'");
        }
    }
    if (!have_n || !have_reps || !have_seed) {
        throw std::runtime_error("calibration: missing n_cal/reps/seed metadata");
    }
    if (t.rho_grid.empty()) throw std::runtime_error("calibration: no rho,beta rows");
    for (std::size_t i = 1; i < t.rho_grid.size(); ++i) {
        if (!(t.rho_grid[i] > t.rho_grid[i - 1])) {
            throw std::runtime_error("calibration: rho grid is not increasing");
        }
    }
    return t;
}

void save_calibration(const CalibrationTable& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write calibration file " + path);
    write_calibration(table, os);
}

CalibrationTable load_calibration(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read calibration file " + path);
    return read_calibration(is);
}

std::vector<double> default_rho_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 19; ++i) g.push_back(i * 0.05);
    return g;
}

std::int64_t csf_statistic(const RankedSample& sample, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("csf_statistic: threshold must lie in (0,1)");
    }
    const auto fc = footrule_components(sample.pi, sample.nu);
    return std::count_if(fc.scaled.begin(), fc.scaled.end(),
                         [&](double s) { return s < threshold; });
}

double beta_mle(std::span<const double> scaled_diffs) {
    if (scaled_diffs.empty()) throw std::invalid_argument("beta_mle: empty input");
    double log_sum = 0.0;
    for (double s : scaled_diffs) {
        if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("beta_mle: values must lie in [0,1)");
        log_sum += std::log(std::max(1.0 - s, 1e-12));
    }
    if (log_sum == 0.0) throw std::domain_error("beta_mle: all differences are zero");
    return -static_cast<double>(scaled_diffs.size()) / log_sum;
}

CalibrationTable calibrate_beta_curve(std::vector<double> rho_grid, std::size_t n_cal,
                                      std::size_t reps, std::uint64_t master_seed,
                                      std::size_t workers) {
    if (rho_grid.empty() || rho_grid.front() != 0.0) {
        throw std::invalid_argument("calibrate_beta_curve: grid must start at 0");
    }
    for (std::size_t i = 1; i < rho_grid.size(); ++i) {
        if (!(rho_grid[i] > rho_grid[i - 1]) || rho_grid[i] >= 1.0) {
            throw std::invalid_argument("calibrate_beta_curve: grid must increase within [0,1)");
        }
    }
    if (n_cal < 2 || reps < 1) throw std::invalid_argument("calibrate_beta_curve: bad n_cal/reps");
    const std::size_t cells = rho_grid.size() * reps;
    std::vector<double> betas(cells);
    parallel_for(cells, workers, [&](std::size_t idx) {
        const std::size_t g = idx / reps;
        const std::size_t r = idx % reps;
        const auto s = sample_gaussian_copula(rho_grid[g], n_cal, derive_seed(master_seed, g, r));
        const auto rs = to_ranked_sample(s);
        betas[idx] = beta_mle(footrule_components(rs.pi, rs.nu).scaled);
    });
    CalibrationTable t;
    t.n_cal = n_cal;
    t.reps = reps;
    t.master_seed = master_seed;
    t.rho_grid = std::move(rho_grid);
    std::vector<double> raw(t.rho_grid.size(), 0.0);
    for (std::size_t g = 0; g < raw.size(); ++g) {
        for (std::size_t r = 0; r < reps; ++r) raw[g] += betas[g * reps + r];
        raw[g] /= static_cast<double>(reps);
    }
    t.beta_values = isotonic_increasing(raw);
    t.isotonic_adjusted = t.beta_values != raw;
    return t;
}

double lookup_beta(const CalibrationTable& table, double rho) {
    const auto& g = table.rho_grid;
    if (g.empty()) throw std::invalid_argument("lookup_beta: empty table");
    if (!(rho >= g.front() && rho <= g.back())) {
        throw std::out_of_range("lookup_beta: rho outside the calibrated range");
    }
    const auto it = std::lower_bound(g.begin(), g.end(), rho);
    const auto hi = static_cast<std::size_t>(it - g.begin());
    if (g[hi] == rho) return table.beta_values[hi];
    const std::size_t lo = hi - 1;
    const double w = (rho - g[lo]) / (g[hi] - g[lo]);
    return (1.0 - w) * table.beta_values[lo] + w * table.beta_values[hi];
}

TestReport csf_test(const RankedSample& sample, const CalibrationTable* table,
                    const CsfOptions& options) {
    const std::size_t n = sample.size();
    if (n < 100) throw std::invalid_argument("csf_test: need n >= 100");
    TestReport rep;
    rep.method = Method::csf;
    rep.mode = options.mode;
    rep.n = n;
    if (n < 500) rep.warnings.push_back("n < 500: binomial approximation is rough");
    const auto ts = csf_statistic(sample, options.threshold);
    rep.statistic = static_cast<double>(ts);
    rep.tau_hat = kendall_tau(sample);

    double rho_raw = 0.0;
    if (options.rho_estimator == RhoEstimator::kendall) {
        rho_raw = std::sin(std::numbers::pi * rep.tau_hat / 2.0);
    } else {
        rho_raw = pearson_correlation(sample.x, sample.y);
    }
    const double rho_cap = table != nullptr ? table->max_rho() : 0.95;
    rep.rho_hat = std::clamp(rho_raw, 0.0, rho_cap);
    if (rho_raw < 0.0) rep.warnings.push_back("negative overall association; rho_hat set to 0");
    if (rho_raw > rho_cap) rep.warnings.push_back("rho_hat clamped to the calibrated maximum");

    rep.null_params["threshold"] = format_double(options.threshold);
    rep.null_params["rho_estimator"] =
        options.rho_estimator == RhoEstimator::kendall ? "kendall" : "pearson";
    rep.null_params["rho_raw"] = format_double(rho_raw);
    rep.null_params["rho_null"] = format_double(rep.rho_hat);
    rep.null_params["ties_x"] = std::to_string(sample.x_ties);
    rep.null_params["ties_y"] = std::to_string(sample.y_ties);
    if (sample.x_ties + sample.y_ties > 0) {
        rep.warnings.push_back("ties present; broken by observation order");
    }

    if (options.mode == Mode::analytic) {
        if (table == nullptr) {
            throw std::invalid_argument(
                "csf_test: analytic mode needs a calibration table (run `calibrate` first)");
        }
        const double beta = lookup_beta(*table, rep.rho_hat);
        const double p = 1.0 - std::pow(1.0 - options.threshold, beta);
        rep.p_value = binomial_upper_tail(static_cast<long>(n), p, static_cast<long>(ts));
        rep.null_params["beta"] = format_double(beta);
        rep.null_params["cell_probability"] = format_double(p);
        rep.null_params["calibration_n"] = std::to_string(table->n_cal);
        rep.null_params["calibration_reps"] = std::to_string(table->reps);
    } else {
        if (options.alpha_sims == 0) throw std::invalid_argument("csf_test: alpha_sims must be > 0");
        std::vector<std::int64_t> sims(options.alpha_sims);
        parallel_for(sims.size(), options.workers, [&](std::size_t r) {
            const auto s = sample_gaussian_copula(rep.rho_hat, n, derive_seed(options.seed, r));
            sims[r] = csf_statistic(to_ranked_sample(s), options.threshold);
        });
        const auto hits = std::count_if(sims.begin(), sims.end(),
                                        [&](std::int64_t t) { return t >= ts; });
        rep.p_value = static_cast<double>(hits) / static_cast<double>(sims.size());
        rep.null_params["alpha_sims"] = std::to_string(options.alpha_sims);
        rep.null_params["seed"] = std::to_string(options.seed);
    }
    return rep;
}

}  // namespace hetcorr
