// hetcorr: command-line front end for the CSF and CKT heterogeneity tests.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetcorr/ckt.hpp"
#include "hetcorr/copula.hpp"
#include "hetcorr/csf.hpp"
#include "hetcorr/dataset.hpp"
#include "hetcorr/plot_data.hpp"
#include "hetcorr/random.hpp"
#include "hetcorr/scan.hpp"
#include "hetcorr/simulation.hpp"

namespace fs = std::filesystem;
using namespace hetcorr;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonFlags {
    std::string input;
    bool header = false;
    std::string columns;
    std::string method = "both";
    std::string mode = "simulated";
    double alpha = 0.05;
    double screen_alpha = 0.05;
    std::size_t reps = 1000;
    std::size_t blocks = 0;
    double threshold = kDefaultThreshold;
    std::uint64_t seed = 20240101;
    std::string calibration;
    std::string out;
    bool negative = false;
    std::size_t workers = 1;
    std::string rho_estimator = "kendall";
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path);
    os << text;
}

std::optional<CalibrationTable> maybe_calibration(const CommonFlags& f) {
    if (f.calibration.empty()) return std::nullopt;
    return load_calibration(f.calibration);
}

PairTestOptions pair_options(const CommonFlags& f, const CalibrationTable* table) {
    PairTestOptions o;
    const auto mode = parse_mode(f.mode);
    o.csf.mode = mode;
    o.csf.threshold = f.threshold;
    o.csf.alpha_sims = f.reps;
    o.csf.workers = f.workers;
    if (f.rho_estimator == "pearson") {
        o.csf.rho_estimator = RhoEstimator::pearson;
    } else if (f.rho_estimator != "kendall") {
        throw UsageError("--rho-estimator must be kendall or pearson");
    }
    o.ckt.mode = mode;
    o.ckt.null_reps = f.reps;
    o.ckt.block_count = f.blocks;
    o.ckt.workers = f.workers;
    o.table = table;
    o.negative = f.negative;
    o.seed = f.seed;
    if (mode == Mode::analytic && table == nullptr && f.method != "ckt") {
        throw UsageError(
            "analytic CSF mode needs --calibration; create one with `hetcorr calibrate --out "
            "FILE`");
    }
    return o;
}

int cmd_calibrate(const CommonFlags& f, std::size_t n_cal, double step, double max_rho,
                  const std::string& plot) {
    if (f.out.empty()) throw UsageError("calibrate: --out is required");
    std::vector<double> grid;
    const auto steps = static_cast<int>(std::floor(max_rho / step + 1e-9));
    for (int i = 0; i <= steps; ++i) grid.push_back(i * step);
    const auto table = calibrate_beta_curve(grid, n_cal, f.reps, f.seed, f.workers);
    save_calibration(table, f.out);
    if (!plot.empty()) emit_plot_data(table, PlotKind::beta_curve, plot);
    if (table.isotonic_adjusted) {
        std::cerr << "note: isotonic adjustment applied to the beta curve\n";
    }
    std::cerr << "wrote " << table.rho_grid.size() << " grid points to " << f.out << "\n";
    return 0;
}

int cmd_test(const CommonFlags& f) {
    if (f.input.empty()) throw UsageError("test: --input is required");
    const auto cols = split_commas(f.columns);
    if (cols.size() != 2) throw UsageError("test: --columns needs exactly two columns A,B");
    const auto data = load_csv(f.input, f.header);
    const auto cx = resolve_column(data, cols[0]);
    const auto cy = resolve_column(data, cols[1]);
    const auto cal = maybe_calibration(f);
    const auto opts = pair_options(f, cal ? &*cal : nullptr);
    const auto reports = test_pair(data, cx, cy, parse_test_method(f.method), opts);
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["input"] = f.input;
    j["seed"] = f.seed;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r));
    write_output(f.out, j.dump(2) + "\n");
    return 0;
}

int cmd_scan(const CommonFlags& f) {
    if (f.input.empty()) throw UsageError("scan: --input is required");
    const auto data = load_csv(f.input, f.header, split_commas(f.columns));
    const auto cal = maybe_calibration(f);
    auto opts = pair_options(f, cal ? &*cal : nullptr);
    opts.csf.workers = 1;
    opts.ckt.workers = 1;
    const auto rep = scan_pairs(data, f.screen_alpha, opts, f.workers);
    if (f.out.size() > 4 && f.out.ends_with(".csv")) {
        std::ostringstream os;
        write_scan_csv(rep, os);
        write_output(f.out, os.str());
    } else {
        write_output(f.out, to_json(rep).dump(2) + "\n");
    }
    return 0;
}

void write_experiment(const ExperimentResult& r, const std::string& prefix) {
    std::ofstream csv(prefix + ".csv");
    write_p_values_csv(r, csv);
    std::ofstream js(prefix + ".json");
    js << summary_json(r).dump(2) << "\n";
    emit_plot_data(r, PlotKind::pvalue_histogram, prefix + "_hist.csv");
}

int cmd_simulate(const CommonFlags& f, const std::string& config, bool seed_set,
                 bool workers_set) {
    if (config.empty()) throw UsageError("simulate: --config is required");
    if (f.out.empty()) throw UsageError("simulate: --out PREFIX is required");
    auto spec = load_experiment_spec(config);
    if (seed_set) spec.master_seed = f.seed;
    if (workers_set) spec.workers = f.workers;
    if (!f.calibration.empty()) spec.calibration_path = f.calibration;
    std::optional<CalibrationTable> cal;
    if (!spec.calibration_path.empty()) cal = load_calibration(spec.calibration_path);
    const CalibrationTable* table = cal ? &*cal : nullptr;
    switch (spec.kind) {
        case ExperimentKind::level_csf:
        case ExperimentKind::level_ckt: {
            const auto r = run_level_experiment(spec, table);
            write_experiment(r, f.out);
            std::cout << summary_json(r).dump(2) << "\n";
            break;
        }
        case ExperimentKind::power_csf:
        case ExperimentKind::power_ckt: {
            const auto r = run_power_experiment(spec, table);
            write_experiment(r, f.out);
            std::cout << summary_json(r).dump(2) << "\n";
            break;
        }
        case ExperimentKind::prop4_convergence: {
            const auto r = run_prop4_experiment(spec.n_list, spec.theta, spec.reps,
                                                spec.master_seed, 20000, 50, spec.workers);
            emit_plot_data(r, PlotKind::prop4_convergence, f.out + ".csv");
            std::ofstream(f.out + ".json") << to_json(r).dump(2) << "\n";
            std::cout << to_json(r).dump(2) << "\n";
            break;
        }
        case ExperimentKind::figure4_density: {
            const auto r = run_figure4_experiment(spec.theta, spec.n, spec.reps, spec.master_seed,
                                                  spec.workers);
            emit_plot_data(r, PlotKind::density_vs_distance, f.out + ".csv");
            std::ofstream(f.out + ".json") << to_json(r).dump(2) << "\n";
            std::cout << to_json(r).dump(2) << "\n";
            break;
        }
    }
    return 0;
}

// End-to-end replication of the published experiments at a chosen scale.
int cmd_replicate(const CommonFlags& f, const std::string& scale, const std::string& wine) {
    if (f.out.empty()) throw UsageError("replicate: --out DIR is required");
    if (scale != "quick" && scale != "desk" && scale != "full") {
        throw UsageError("--scale must be quick, desk or full");
    }
    const bool quick = scale == "quick";
    const bool full = scale == "full";
    fs::create_directories(f.out);
    const auto path = [&](const std::string& name) { return (fs::path(f.out) / name).string(); };
    nlohmann::json summary;
    summary["schema"] = "hetcorr-replication-v1";
    summary["scale"] = scale;
    summary["seed"] = f.seed;
    const auto log = [](const std::string& s) { std::cerr << "[replicate] " << s << std::endl; };

    log("beta(rho) calibration");
    const auto table = calibrate_beta_curve(default_rho_grid(), quick ? 2000 : 5000,
                                            quick ? 40 : 200, f.seed, f.workers);
    save_calibration(table, path("calibration.txt"));
    emit_plot_data(table, PlotKind::beta_curve, path("fig1_beta_curve.csv"));

    log("scaled rank differences (Gaussian 0.2; 50/50 mixture with Gaussian 0.6)");
    {
        const auto s = to_ranked_sample(sample_gaussian_copula(0.2, 10000, derive_seed(f.seed, 1)));
        const auto fc = footrule_components(s.pi, s.nu);
        const ScaledDiffs d{fc.scaled, lookup_beta(table, 0.2)};
        emit_plot_data(d, PlotKind::scaled_diff_histogram, path("fig1_scaled_diffs.csv"), 50);
        const auto m = to_ranked_sample(gen_gaussian_mixture(10000, 0.5, 0.6, derive_seed(f.seed, 2)));
        const auto mc = footrule_components(m.pi, m.nu);
        const ScaledDiffs md{mc.scaled, beta_mle(mc.scaled)};
        emit_plot_data(md, PlotKind::scaled_diff_histogram, path("fig2_mixture_diffs.csv"), 50);
        summary["fig2_beta_mle"] = md.beta;
    }

    log("scale relationships");
    {
        RateCurve tt{"theta", {}, {}};
        for (double th = 0.25; th <= 20.0; th += 0.25) {
            tt.x.push_back(th);
            tt.rate.push_back(tau_from_theta(th));
        }
        emit_plot_data(tt, PlotKind::rate_curve, path("fig3_tau_vs_theta.csv"));
        for (std::size_t n : {100, 1000, 5000}) {
            RateCurve pt{"theta", {}, {}};
            for (double th = 0.25; th <= 10.0; th += 0.25) {
                pt.x.push_back(th);
                pt.rate.push_back(phi_from_theta(th, n));
            }
            emit_plot_data(pt, PlotKind::rate_curve,
                           path("fig3_phi_vs_theta_n" + std::to_string(n) + ".csv"));
        }
    }

    log("Frank density vs Kendall distance");
    {
        const auto r = run_figure4_experiment(3.0, quick ? 500 : 1000, quick ? 200 : 1000,
                                              derive_seed(f.seed, 4), f.workers);
        emit_plot_data(r, PlotKind::density_vs_distance, path("fig4_density_vs_distance.csv"));
        summary["fig4"] = to_json(r);
        const auto p4 = run_prop4_experiment({100, 1000}, 3.0, quick ? 20 : 50,
                                             derive_seed(f.seed, 5), 20000, 50, f.workers);
        emit_plot_data(p4, PlotKind::prop4_convergence, path("prop4_convergence.csv"));
        summary["prop4"] = to_json(p4);
    }

    log("CKT null LLR under Frank copulas");
    {
        std::vector<NullReference> refs;
        for (double tau : {0.10, 0.15, 0.20, 0.25, 0.30}) {
            refs.push_back(ckt_null_reference(1000, tau, quick ? 50 : (full ? 500 : 200),
                                              derive_seed(f.seed, 6, static_cast<std::uint64_t>(tau * 100)),
                                              0, f.workers));
        }
        emit_plot_data(refs, PlotKind::llr_null, path("fig5_llr_null.csv"));
        std::ofstream os(path("fig5_llr_tau0.2.csv"));
        os << "replicate,llr\n";
        for (std::size_t i = 0; i < refs[2].llr.size(); ++i) {
            os << i << ',' << format_double(refs[2].llr[i]) << '\n';
        }
    }

    const auto level_curve = [&](ExperimentKind kind, const std::string& family,
                                 const std::vector<double>& params, std::size_t reps,
                                 const std::string& stem) {
        RateCurve curve{family == "frank" ? "theta" : "rho", {}, {}};
        nlohmann::json runs = nlohmann::json::array();
        for (std::size_t i = 0; i < params.size(); ++i) {
            ExperimentSpec spec;
            spec.kind = kind;
            spec.family = family;
            spec.n = 1000;
            spec.reps = reps;
            spec.rho = params[i];
            spec.theta = params[i];
            spec.mode = kind == ExperimentKind::level_csf ? Mode::analytic : Mode::simulated;
            spec.null_reps = 100;
            spec.master_seed = derive_seed(f.seed, 7, i);
            spec.workers = f.workers;
            const auto r = run_level_experiment(spec, &table);
            write_experiment(r, path(stem + "_" + std::to_string(i)));
            curve.x.push_back(params[i]);
            curve.rate.push_back(r.rejection_rate);
            runs.push_back(summary_json(r));
        }
        emit_plot_data(curve, PlotKind::rate_curve, path(stem + "_type1.csv"));
        summary[stem] = runs;
    };

    log("CSF level under Gaussian copulas");
    level_curve(ExperimentKind::level_csf, "gaussian", {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                quick ? 200 : (full ? 100000 : 2000), "fig7_csf_level");
    log("CKT level under Gaussian copulas");
    level_curve(ExperimentKind::level_ckt, "gaussian", {0.2, 0.3, 0.4, 0.5},
                quick ? 10 : (full ? 200 : 50), "fig8_ckt_level");
    log("CSF level under Frank copulas");
    level_curve(ExperimentKind::level_csf, "frank", {0.5, 1.0, 2.0, 3.0, 5.0, 8.0},
                quick ? 200 : (full ? 100000 : 2000), "fig9_csf_frank_level");

    log("power against Mallows subpopulations");
    {
        nlohmann::json runs = nlohmann::json::array();
        int idx = 0;
        for (auto [lo, hi] : {std::pair{0.0, 1.0}, std::pair{0.2, 0.8}}) {
            for (auto kind : {ExperimentKind::power_ckt, ExperimentKind::power_csf}) {
                ExperimentSpec spec;
                spec.kind = kind;
                spec.alternative = "mallows_subpop";
                spec.n = 1000;
                spec.sub_size = 400;
                spec.tau_sub = 0.5;
                spec.window_lo = lo;
                spec.window_hi = hi;
                spec.reps = quick ? 10 : 100;
                spec.null_reps = quick ? 39 : 99;
                spec.mode = kind == ExperimentKind::power_csf ? Mode::analytic : Mode::simulated;
                spec.master_seed = derive_seed(f.seed, 11, static_cast<std::uint64_t>(idx));
                spec.workers = f.workers;
                const auto r = run_power_experiment(spec, &table);
                write_experiment(r, path("fig11_" + to_string(kind) + "_" + std::to_string(idx)));
                runs.push_back(summary_json(r));
                ++idx;
            }
        }
        summary["fig11"] = runs;
    }

    if (!wine.empty()) {
        log("wine: flavonoids vs total phenols");
        const auto data = load_csv(wine, false);
        const auto phen = resolve_column(data, "7");  // class label is column 1
        const auto flav = resolve_column(data, "8");
        PairTestOptions o;
        o.table = &table;
        o.seed = f.seed;
        o.csf.mode = Mode::analytic;
        o.ckt.mode = Mode::simulated;
        o.ckt.null_reps = quick ? 499 : 2000;
        o.ckt.workers = f.workers;
        const auto reports = test_pair(data, flav, phen, TestMethod::both, o);
        summary["wine"] = nlohmann::json::array();
        for (const auto& r : reports) summary["wine"].push_back(to_json(r));
    }

    std::ofstream(path("summary.json")) << summary.dump(2) << "\n";
    log("done; see " + path("summary.json"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric tests for heterogeneous association (CSF and CKT)"};
    app.require_subcommand(1);
    CommonFlags f;

    const auto add_data_flags = [&](CLI::App* sub) {
        sub->add_option("--input", f.input, "CSV file");
        sub->add_flag("--header", f.header, "first row holds column names");
        sub->add_option("--columns", f.columns, "columns by name or 1-based index, comma separated");
    };
    const auto add_test_flags = [&](CLI::App* sub) {
        sub->add_option("--mode", f.mode, "analytic|simulated")->capture_default_str();
        sub->add_option("--reps", f.reps, "null replicates for simulated p-values")
            ->capture_default_str();
        sub->add_option("--blocks", f.blocks, "CKT multistage blocks (0 = ceil(sqrt(n-1)))");
        sub->add_option("--threshold", f.threshold, "CSF threshold")->capture_default_str();
        sub->add_option("--calibration", f.calibration, "beta(rho) calibration file");
        sub->add_option("--rho-estimator", f.rho_estimator, "kendall|pearson")
            ->capture_default_str();
        sub->add_option("--alpha", f.alpha, "significance level")->capture_default_str();
    };
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", f.seed, "master seed")->capture_default_str();
        sub->add_option("--out", f.out, "output path");
        sub->add_option("--workers", f.workers, "worker threads")->capture_default_str();
    };

    std::size_t n_cal = 5000;
    double grid_step = 0.05;
    double grid_max = 0.95;
    std::string plot;
    auto* calibrate = app.add_subcommand("calibrate", "estimate the beta(rho) curve");
    add_common(calibrate);
    calibrate->add_option("--reps", f.reps, "replicates per grid point")->default_val(200);
    calibrate->add_option("--n-cal", n_cal, "sample size per replicate")->capture_default_str();
    calibrate->add_option("--grid-step", grid_step)->capture_default_str();
    calibrate->add_option("--grid-max", grid_max)->capture_default_str();
    calibrate->add_option("--plot", plot, "also write the beta curve as plot data");

    auto* test = app.add_subcommand("test", "test one pair of columns");
    add_data_flags(test);
    add_test_flags(test);
    add_common(test);
    test->add_option("--method", f.method, "csf|ckt|both")->capture_default_str();
    test->add_flag("--negative", f.negative, "test negative association (negates y)");

    auto* scan = app.add_subcommand("scan", "CSF screen on all pairs, CKT on those screened in");
    add_data_flags(scan);
    add_test_flags(scan);
    add_common(scan);
    scan->add_option("--screen-alpha", f.screen_alpha, "CSF screening level")
        ->capture_default_str();

    std::string config;
    auto* simulate = app.add_subcommand("simulate", "run one Monte Carlo experiment");
    add_common(simulate);
    simulate->add_option("--config", config, "experiment file (key = value lines)");
    simulate->add_option("--calibration", f.calibration, "beta(rho) calibration file");

    std::string scale = "desk";
    std::string wine;
    auto* replicate = app.add_subcommand("replicate", "reproduce the published experiments");
    add_common(replicate);
    replicate->add_option("--scale", scale, "quick|desk|full")->capture_default_str();
    replicate->add_option("--wine", wine, "UCI wine file (class label first, no header)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*calibrate) return cmd_calibrate(f, n_cal, grid_step, grid_max, plot);
        if (*test) return cmd_test(f);
        if (*scan) return cmd_scan(f);
        if (*simulate) {
            return cmd_simulate(f, config, simulate->count("--seed") > 0,
                                simulate->count("--workers") > 0);
        }
        if (*replicate) return cmd_replicate(f, scale, wine);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
