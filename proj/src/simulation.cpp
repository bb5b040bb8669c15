#include "hetcorr/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hetcorr/ckt.hpp"
#include "hetcorr/mallows.hpp"
#include "hetcorr/parallel.hpp"
#include "hetcorr/random.hpp"

namespace hetcorr {

namespace {

constexpr const char* kKindNames[] = {"level_csf",  "level_ckt",         "power_csf",
                                      "power_ckt",  "prop4_convergence", "figure4_density"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoull(trim(item)));
    return out;
}

bool is_csf(ExperimentKind k) {
    return k == ExperimentKind::level_csf || k == ExperimentKind::power_csf;
}

struct ReplicateOutcome {
    double p = 1.0;
    double statistic = 0.0;
    double tau_hat = 0.0;
    bool defined = true;
};

ReplicateOutcome run_one_test(const CopulaSample& s, const ExperimentSpec& spec,
                              const CalibrationTable* table, std::uint64_t test_seed) {
    const auto rs = to_ranked_sample(s);
    ReplicateOutcome out;
    out.tau_hat = kendall_tau(rs);
    if (is_csf(spec.kind)) {
        CsfOptions o;
        o.mode = spec.mode;
        o.threshold = spec.threshold;
        o.alpha_sims = spec.null_reps;
        o.seed = test_seed;
        const auto rep = csf_test(rs, table, o);
        out.p = rep.p_value;
        out.statistic = rep.statistic;
    } else {
        if (!(out.tau_hat > 0.0)) {
            out.defined = false;
            return out;
        }
        CktOptions o;
        o.mode = spec.mode;
        o.null_reps = spec.null_reps;
        o.block_count = spec.block_count;
        o.seed = test_seed;
        const auto rep = ckt_test(rs, o);
        out.p = rep.p_value;
        out.statistic = rep.statistic;
    }
    return out;
}

template <class Generate>
ExperimentResult run_replicates(const ExperimentSpec& spec, const CalibrationTable* table,
                                Generate&& generate) {
    spec.validate();
    if (is_csf(spec.kind) && spec.mode == Mode::analytic && table == nullptr) {
        throw std::invalid_argument("analytic CSF experiments need a calibration table");
    }
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.spec = spec;
    std::vector<ReplicateOutcome> outcomes(spec.reps);
    const auto kind_stream = static_cast<std::uint64_t>(spec.kind);
    parallel_for(spec.reps, spec.workers, [&](std::size_t r) {
        const auto stream = derive_seed(spec.master_seed, kind_stream, r);
        const auto sample = generate(derive_seed(stream, 0));
        outcomes[r] = run_one_test(sample, spec, table, derive_seed(stream, 1));
    });
    std::size_t rejections = 0;
    for (const auto& o : outcomes) {
        res.p_values.push_back(o.p);
        res.statistics.push_back(o.statistic);
        res.tau_hats.push_back(o.tau_hat);
        if (!o.defined) ++res.undefined;
        if (o.p <= spec.alpha) ++rejections;
    }
    res.rejection_rate = static_cast<double>(rejections) / static_cast<double>(spec.reps);
    res.summary = moments(res.p_values);
    res.q05 = quantile(res.p_values, 0.05);
    res.q50 = quantile(res.p_values, 0.50);
    res.q95 = quantile(res.p_values, 0.95);
    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace

std::string to_string(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

ExperimentKind parse_experiment_kind(const std::string& s) {
    for (int i = 0; i < 6; ++i) {
        if (s == kKindNames[i]) return static_cast<ExperimentKind>(i);
    }
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

void ExperimentSpec::validate() const {
    if (reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("experiment: alpha in (0,1)");
    if (!(window_lo >= 0.0 && window_hi <= 1.0 && window_lo < window_hi)) {
        throw std::invalid_argument("experiment: window must satisfy 0 <= lo < hi <= 1");
    }
    if (family != "gaussian" && family != "frank") {
        throw std::invalid_argument("experiment: family must be gaussian or frank");
    }
    if (alternative != "gaussian_mixture" && alternative != "mallows_subpop") {
        throw std::invalid_argument("experiment: alternative must be gaussian_mixture or mallows_subpop");
    }
    if (!(sub_fraction > 0.0 && sub_fraction <= 1.0)) {
        throw std::invalid_argument("experiment: sub_fraction in (0,1]");
    }
    if (kind == ExperimentKind::prop4_convergence && n_list.empty()) {
        throw std::invalid_argument("experiment: n_list must not be empty");
    }
}

ExperimentSpec parse_experiment_spec(std::istream& is) {
    ExperimentSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("experiment config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (key == "kind") spec.kind = parse_experiment_kind(value);
            else if (key == "n") spec.n = std::stoull(value);
            else if (key == "reps") spec.reps = std::stoull(value);
            else if (key == "alpha") spec.alpha = std::stod(value);
            else if (key == "seed" || key == "master_seed") spec.master_seed = std::stoull(value);
            else if (key == "workers") spec.workers = std::stoull(value);
            else if (key == "family") spec.family = value;
            else if (key == "rho") spec.rho = std::stod(value);
            else if (key == "theta") spec.theta = std::stod(value);
            else if (key == "alternative") spec.alternative = value;
            else if (key == "sub_fraction") spec.sub_fraction = std::stod(value);
            else if (key == "rho_sub") spec.rho_sub = std::stod(value);
            else if (key == "sub_size") spec.sub_size = std::stoull(value);
            else if (key == "tau_sub") spec.tau_sub = std::stod(value);
            else if (key == "window_lo") spec.window_lo = std::stod(value);
            else if (key == "window_hi") spec.window_hi = std::stod(value);
            else if (key == "mode") spec.mode = parse_mode(value);
            else if (key == "null_reps") spec.null_reps = std::stoull(value);
            else if (key == "blocks") spec.block_count = std::stoull(value);
            else if (key == "threshold") spec.threshold = std::stod(value);
            else if (key == "calibration") spec.calibration_path = value;
            else if (key == "n_list") spec.n_list = parse_size_list(value);
            else throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("experiment config line " + std::to_string(line_no) +
                                        ": " + e.what());
        } catch (const std::out_of_range&) {
            throw std::invalid_argument("experiment config line " + std::to_string(line_no) +
                                        ": value out of range");
        }
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read experiment config " + path);
    return parse_experiment_spec(is);
}

nlohmann::json to_json(const ExperimentSpec& s) {
    return {{"kind", to_string(s.kind)},
            {"n", s.n},
            {"reps", s.reps},
            {"alpha", s.alpha},
            {"seed", s.master_seed},
            {"family", s.family},
            {"rho", s.rho},
            {"theta", s.theta},
            {"alternative", s.alternative},
            {"sub_fraction", s.sub_fraction},
            {"rho_sub", s.rho_sub},
            {"sub_size", s.sub_size},
            {"tau_sub", s.tau_sub},
            {"window", {s.window_lo, s.window_hi}},
            {"mode", to_string(s.mode)},
            {"null_reps", s.null_reps},
            {"blocks", s.block_count},
            {"threshold", s.threshold},
            {"n_list", s.n_list}};
}

nlohmann::json summary_json(const ExperimentResult& r) {
    return {{"schema", "hetcorr-experiment-v1"},
            {"spec", to_json(r.spec)},
            {"rejection_rate", r.rejection_rate},
            {"p_mean", r.summary.mean},
            {"p_sd", r.summary.sd},
            {"p_q05", r.q05},
            {"p_q50", r.q50},
            {"p_q95", r.q95},
            {"undefined", r.undefined},
            {"runtime_seconds", r.runtime_seconds}};
}

void write_p_values_csv(const ExperimentResult& r, std::ostream& os) {
    os << "replicate,p_value,statistic,tau_hat\n";
    for (std::size_t i = 0; i < r.p_values.size(); ++i) {
        os << i << ',' << format_double(r.p_values[i]) << ',' << format_double(r.statistics[i])
           << ',' << format_double(r.tau_hats[i]) << '\n';
    }
}

CopulaSample gen_gaussian_mixture(std::size_t n, double sub_fraction, double rho_sub,
                                  std::uint64_t seed) {
    if (!(sub_fraction >= 0.0 && sub_fraction <= 1.0)) {
        throw std::invalid_argument("gen_gaussian_mixture: sub_fraction in [0,1]");
    }
    const auto m = static_cast<std::size_t>(std::floor(sub_fraction * static_cast<double>(n)));
    auto sub = sample_gaussian_copula(rho_sub, m, derive_seed(seed, 0));
    const auto rest = sample_independent(n - m, derive_seed(seed, 1));
    sub.u.insert(sub.u.end(), rest.u.begin(), rest.u.end());
    sub.v.insert(sub.v.end(), rest.v.begin(), rest.v.end());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 2));
    rng.shuffle(perm.begin(), perm.end());
    CopulaSample out;
    out.seed = seed;
    out.generator = MixtureGenerator{sub_fraction, describe(GaussianGenerator{rho_sub})};
    out.u.resize(n);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.u[i] = sub.u[perm[i]];
        out.v[i] = sub.v[perm[i]];
    }
    return out;
}

SubpopulationSample gen_mallows_subpop(std::size_t n, std::size_t sub_size, double tau_sub,
                                       double window_lo, double window_hi, std::uint64_t seed) {
    if (sub_size > n) throw std::invalid_argument("gen_mallows_subpop: sub_size > n");
    if (!(window_lo >= 0.0 && window_hi <= 1.0 && window_lo < window_hi)) {
        throw std::invalid_argument("gen_mallows_subpop: invalid window");
    }
    if (!(tau_sub >= 0.0 && tau_sub < 1.0)) {
        throw std::invalid_argument("gen_mallows_subpop: tau_sub in [0,1)");
    }
    SubpopulationSample out;
    out.sample = sample_independent(n, derive_seed(seed, 0));
    out.sample.seed = seed;
    auto& s = out.sample;

    // Points whose x falls in the empirical quantile window.
    const auto pi = rank_vector(s.u);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = static_cast<double>(n + 1 - static_cast<std::size_t>(pi[i])) /
                         static_cast<double>(n);
        if (q > window_lo && q <= window_hi) eligible.push_back(i);
    }
    Rng rng(derive_seed(seed, 1));
    rng.shuffle(eligible.begin(), eligible.end());
    if (eligible.size() < sub_size) {
        out.window_short = true;
    } else {
        eligible.resize(sub_size);
    }
    auto& sub = out.sub_indices;
    sub = std::move(eligible);
    const std::size_t m = sub.size();
    s.generator = MallowsSubpopulationGenerator{m, tau_sub, window_lo, window_hi};
    if (m < 2) return out;

    // Subpopulation listed from largest x down, so rank j sits at position j - 1.
    std::sort(sub.begin(), sub.end(), [&](std::size_t a, std::size_t b) { return s.u[a] > s.u[b]; });
    std::vector<double> ys;
    for (auto i : sub) ys.push_back(s.v[i]);
    std::sort(ys.begin(), ys.end(), std::greater<>());
    const double phi = tau_sub == 0.0 ? 0.0 : phi_from_theta(theta_from_tau(tau_sub), m);
    const auto nu = sample_mallows(phi, m, derive_seed(seed, 2));
    for (std::size_t j = 0; j < m; ++j) s.v[sub[j]] = ys[static_cast<std::size_t>(nu[j] - 1)];
    std::sort(sub.begin(), sub.end());
    return out;
}

ExperimentResult run_level_experiment(const ExperimentSpec& spec, const CalibrationTable* table) {
    if (spec.kind != ExperimentKind::level_csf && spec.kind != ExperimentKind::level_ckt) {
        throw std::invalid_argument("run_level_experiment: kind must be level_csf or level_ckt");
    }
    return run_replicates(spec, table, [&](std::uint64_t seed) {
        if (spec.family == "frank") return sample_frank_copula(spec.theta, spec.n, seed);
        return sample_gaussian_copula(spec.rho, spec.n, seed);
    });
}

ExperimentResult run_power_experiment(const ExperimentSpec& spec, const CalibrationTable* table) {
    if (spec.kind != ExperimentKind::power_csf && spec.kind != ExperimentKind::power_ckt) {
        throw std::invalid_argument("run_power_experiment: kind must be power_csf or power_ckt");
    }
    return run_replicates(spec, table, [&](std::uint64_t seed) {
        if (spec.alternative == "mallows_subpop") {
            return gen_mallows_subpop(spec.n, spec.sub_size, spec.tau_sub, spec.window_lo,
                                      spec.window_hi, seed)
                .sample;
        }
        return gen_gaussian_mixture(spec.n, spec.sub_fraction, spec.rho_sub, seed);
    });
}

Prop4Report run_prop4_experiment(const std::vector<std::size_t>& n_list, double theta,
                                 std::size_t reps, std::uint64_t seed, std::size_t reference_size,
                                 std::size_t grid, std::size_t workers) {
    if (theta == 0.0) throw std::invalid_argument("run_prop4_experiment: theta must be nonzero");
    if (reps < 1) throw std::invalid_argument("run_prop4_experiment: reps must be >= 1");
    Prop4Report rep;
    rep.theta = theta;
    rep.tau_theta = tau_from_theta(theta);
    rep.reps = reps;
    const auto reference = sample_frank_copula(theta, reference_size, derive_seed(seed, 0));
    for (std::size_t a = 0; a < n_list.size(); ++a) {
        const std::size_t n = n_list[a];
        Prop4Row row;
        row.n = n;
        row.phi = phi_from_theta(theta, n);
        std::vector<double> dist(reps);
        std::vector<double> taus(reps);
        parallel_for(reps, workers, [&](std::size_t r) {
            const auto stream = derive_seed(seed, a + 1, r);
            auto s = sample_independent(n, derive_seed(stream, 0));
            const auto nu = sample_mallows(std::abs(row.phi), n, derive_seed(stream, 1));
            std::vector<std::size_t> by_x(n);
            std::iota(by_x.begin(), by_x.end(), 0);
            std::sort(by_x.begin(), by_x.end(),
                      [&](std::size_t i, std::size_t j) { return s.u[i] > s.u[j]; });
            std::vector<double> ys = s.v;
            std::sort(ys.begin(), ys.end(), std::greater<>());
            for (std::size_t j = 0; j < n; ++j) {
                // Negative theta: reverse the y order to flip the association.
                const auto rank = static_cast<std::size_t>(nu[j] - 1);
                s.v[by_x[j]] = theta > 0.0 ? ys[rank] : ys[n - 1 - rank];
            }
            dist[r] = empirical_copula_distance(s, reference, grid);
            taus[r] = kendall_tau(rank_vector(s.u), rank_vector(s.v));
        });
        for (std::size_t r = 0; r < reps; ++r) {
            row.mean_copula_distance += dist[r] / static_cast<double>(reps);
            row.mean_abs_tau_error += std::abs(taus[r] - rep.tau_theta) / static_cast<double>(reps);
            row.mean_tau += taus[r] / static_cast<double>(reps);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

Figure4Report run_figure4_experiment(double theta, std::size_t n, std::size_t reps,
                                     std::uint64_t seed, std::size_t workers) {
    Figure4Report rep;
    rep.theta = theta;
    rep.n = n;
    rep.distances.resize(reps);
    rep.log_densities.resize(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const auto s = sample_frank_copula(theta, n, derive_seed(seed, r));
        rep.distances[r] =
            static_cast<double>(kendall_distance(rank_vector(s.u), rank_vector(s.v)));
        rep.log_densities[r] = sample_log_density(s, theta);
    });
    rep.spearman = spearman_correlation(rep.log_densities, rep.distances);
    return rep;
}

nlohmann::json to_json(const Prop4Report& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n},
                        {"phi", row.phi},
                        {"mean_copula_distance", row.mean_copula_distance},
                        {"mean_abs_tau_error", row.mean_abs_tau_error},
                        {"mean_tau", row.mean_tau}});
    }
    return {{"theta", r.theta}, {"tau_theta", r.tau_theta}, {"reps", r.reps}, {"rows", rows}};
}

nlohmann::json to_json(const Figure4Report& r) {
    return {{"theta", r.theta}, {"n", r.n}, {"reps", r.distances.size()},
            {"spearman", r.spearman}};
}

}  // namespace hetcorr
