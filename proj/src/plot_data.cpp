#include "hetcorr/plot_data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hetcorr {

namespace {

template <class T>
const T& expect(const PlotSource& src, const char* kind) {
    if (const auto* p = std::get_if<T>(&src)) return *p;
    throw std::invalid_argument(std::string("plot kind '") + kind +
                                "' does not match the supplied result");
}

void histogram(std::ostream& os, const std::vector<double>& xs, std::size_t bins, double lo,
               double hi, const ScaledDiffs* overlay) {
    std::vector<std::size_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : xs) {
        auto b = static_cast<std::size_t>(std::floor((x - lo) / width));
        if (x < lo) continue;
        if (b >= bins) b = bins - 1;
        ++counts[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = lo + width * static_cast<double>(b);
        const double e = b + 1 == bins ? hi : a + width;
        os << format_double(a) << ',' << format_double(e) << ',' << counts[b];
        if (overlay != nullptr) {
            const double density =
                static_cast<double>(counts[b]) / (static_cast<double>(xs.size()) * width);
            // Bin-averaged Beta(1, beta) density: (F(e) - F(a)) / width.
            const double mass =
                std::pow(1.0 - a, overlay->beta) - std::pow(1.0 - e, overlay->beta);
            os << ',' << format_double(density) << ',' << format_double(mass / width);
        }
        os << '\n';
    }
}

constexpr const char* kKindNames[] = {"beta-curve",          "llr-null",
                                      "pvalue-histogram",    "scaled-diff-histogram",
                                      "density-vs-distance", "prop4-convergence",
                                      "rate-curve"};

}  // namespace

PlotKind parse_plot_kind(const std::string& s) {
    for (int i = 0; i < 7; ++i) {
        if (s == kKindNames[i]) return static_cast<PlotKind>(i);
    }
    throw std::invalid_argument("unknown plot kind '" + s + "'");
}

void emit_plot_data(const PlotSource& source, PlotKind kind, std::ostream& os, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("emit_plot_data: bins must be positive");
    const char* name = kKindNames[static_cast<int>(kind)];
    switch (kind) {
        case PlotKind::beta_curve: {
            const auto& t = expect<CalibrationTable>(source, name);
            os << "rho,beta\n";
            for (std::size_t i = 0; i < t.rho_grid.size(); ++i) {
                os << format_double(t.rho_grid[i]) << ',' << format_double(t.beta_values[i])
                   << '\n';
            }
            break;
        }
        case PlotKind::llr_null: {
            const auto& refs = expect<std::vector<NullReference>>(source, name);
            os << "tau,mean_llr,sd_llr\n";
            for (const auto& r : refs) {
                os << format_double(r.tau) << ',' << format_double(r.mean) << ','
                   << format_double(r.sd) << '\n';
            }
            break;
        }
        case PlotKind::pvalue_histogram: {
            const auto& r = expect<ExperimentResult>(source, name);
            os << "bin_lo,bin_hi,count\n";
            histogram(os, r.p_values, bins, 0.0, 1.0, nullptr);
            break;
        }
        case PlotKind::scaled_diff_histogram: {
            const auto& d = expect<ScaledDiffs>(source, name);
            os << "bin_lo,bin_hi,count,density,beta_density\n";
            histogram(os, d.values, bins, 0.0, 1.0, &d);
            break;
        }
        case PlotKind::density_vs_distance: {
            const auto& f = expect<Figure4Report>(source, name);
            os << "distance,log_density\n";
            for (std::size_t i = 0; i < f.distances.size(); ++i) {
                os << format_double(f.distances[i]) << ',' << format_double(f.log_densities[i])
                   << '\n';
            }
            break;
        }
        case PlotKind::prop4_convergence: {
            const auto& p = expect<Prop4Report>(source, name);
            os << "n,phi,mean_copula_distance,mean_abs_tau_error,mean_tau\n";
            for (const auto& row : p.rows) {
                os << row.n << ',' << format_double(row.phi) << ','
                   << format_double(row.mean_copula_distance) << ','
                   << format_double(row.mean_abs_tau_error) << ',' << format_double(row.mean_tau)
                   << '\n';
            }
            break;
        }
        case PlotKind::rate_curve: {
            const auto& c = expect<RateCurve>(source, name);
            os << (c.parameter.empty() ? "x" : c.parameter) << ",rate\n";
            for (std::size_t i = 0; i < c.x.size(); ++i) {
                os << format_double(c.x[i]) << ',' << format_double(c.rate[i]) << '\n';
            }
            break;
        }
    }
}

void emit_plot_data(const PlotSource& source, PlotKind kind, const std::string& path,
                    std::size_t bins) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    emit_plot_data(source, kind, os, bins);
}

PlotTable read_plot_data(std::istream& is) {
    PlotTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_plot_data: empty input");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace hetcorr
