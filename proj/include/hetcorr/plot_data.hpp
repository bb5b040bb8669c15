#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "hetcorr/ckt.hpp"
#include "hetcorr/csf.hpp"
#include "hetcorr/simulation.hpp"

namespace hetcorr {

/// Scaled footrule components with the Beta(1, beta) fit to overlay.
struct ScaledDiffs {
    std::vector<double> values;
    double beta = 2.0;
};

/// A rate (rejection rate, type-I error) against a parameter.
struct RateCurve {
    std::string parameter;
    std::vector<double> x;
    std::vector<double> rate;
};

using PlotSource = std::variant<CalibrationTable, std::vector<NullReference>, ExperimentResult,
                                ScaledDiffs, Figure4Report, Prop4Report, RateCurve>;

enum class PlotKind {
    beta_curve,             // rho,beta
    llr_null,               // tau,mean_llr,sd_llr
    pvalue_histogram,       // bin_lo,bin_hi,count
    scaled_diff_histogram,  // bin_lo,bin_hi,count,density,beta_density
    density_vs_distance,    // distance,log_density
    prop4_convergence,      // n,phi,mean_copula_distance,mean_abs_tau_error,mean_tau
    rate_curve              // <parameter>,rate
};

PlotKind parse_plot_kind(const std::string& s);

void emit_plot_data(const PlotSource& source, PlotKind kind, std::ostream& os,
                    std::size_t bins = 20);
void emit_plot_data(const PlotSource& source, PlotKind kind, const std::string& path,
                    std::size_t bins = 20);

/// Header plus numeric rows of an emitted file.
struct PlotTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

PlotTable read_plot_data(std::istream& is);

}  // namespace hetcorr
