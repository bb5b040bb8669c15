#include "hetcorr/scan.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "hetcorr/parallel.hpp"
#include "hetcorr/random.hpp"

namespace hetcorr {

TestMethod parse_test_method(const std::string& s) {
    if (s == "csf") return TestMethod::csf;
    if (s == "ckt") return TestMethod::ckt;
    if (s == "both") return TestMethod::both;
    throw std::invalid_argument("unknown method '" + s + "' (expected csf|ckt|both)");
}

namespace {

RankedSample pair_sample(const Dataset& data, std::size_t col_x, std::size_t col_y, bool negate) {
    if (col_x >= data.column_count() || col_y >= data.column_count()) {
        throw DataError("column index out of range");
    }
    auto y = data.columns[col_y];
    if (negate) {
        for (double& v : y) v = -v;
    }
    return make_ranked_sample(data.columns[col_x], std::move(y));
}

}  // namespace

std::vector<TestReport> test_pair(const Dataset& data, std::size_t col_x, std::size_t col_y,
                                  TestMethod method, const PairTestOptions& options) {
    const auto sample = pair_sample(data, col_x, col_y, options.negative);
    const auto pair_seed = derive_seed(options.seed, col_x, col_y);
    std::vector<TestReport> out;
    if (method != TestMethod::ckt) {
        auto o = options.csf;
        o.seed = derive_seed(pair_seed, 0);
        out.push_back(csf_test(sample, options.table, o));
    }
    if (method != TestMethod::csf) {
        auto o = options.ckt;
        o.seed = derive_seed(pair_seed, 1);
        out.push_back(ckt_test(sample, o));
    }
    for (auto& r : out) {
        r.null_params["column_x"] = data.column_names[col_x];
        r.null_params["column_y"] = data.column_names[col_y];
        if (options.negative) r.null_params["negated_y"] = "true";
    }
    return out;
}

PairScanReport scan_pairs(const Dataset& data, double screen_alpha,
                          const PairTestOptions& options, std::size_t workers) {
    const std::size_t k = data.column_count();
    if (k < 2) throw std::invalid_argument("scan_pairs: need at least two columns");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    }
    PairScanReport rep;
    rep.screen_alpha = screen_alpha;
    rep.n = data.row_count;
    rep.records.resize(pairs.size());
    const auto npairs = static_cast<double>(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const auto [a, b] = pairs[i];
        auto& rec = rep.records[i];
        rec.col_a = data.column_names[a];
        rec.col_b = data.column_names[b];
        rec.tau_hat = kendall_tau(pair_sample(data, a, b, false));
        rec.negated = !(rec.tau_hat > 0.0);
        auto o = options;
        o.negative = rec.negated;
        rec.csf_p = test_pair(data, a, b, TestMethod::csf, o).front().p_value;
        rec.csf_p_bonferroni = std::min(1.0, rec.csf_p * npairs);
        rec.screened_in = rec.csf_p <= screen_alpha;
        if (rec.screened_in) {
            if (rec.tau_hat == 0.0) {
                // CKT needs nonzero association in either direction.
                rec.ckt_p = 1.0;
            } else {
                rec.ckt_p = test_pair(data, a, b, TestMethod::ckt, o).front().p_value;
            }
        }
    });
    return rep;
}

nlohmann::json to_json(const PairScanReport& r) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& p : r.records) {
        nlohmann::json j = {{"col_a", p.col_a},
                            {"col_b", p.col_b},
                            {"tau_hat", p.tau_hat},
                            {"csf_p", p.csf_p},
                            {"csf_p_bonferroni", p.csf_p_bonferroni},
                            {"screened_in", p.screened_in},
                            {"negated", p.negated}};
        if (p.ckt_p) j["ckt_p"] = *p.ckt_p;
        recs.push_back(std::move(j));
    }
    return {{"schema", kReportSchema},
            {"kind", "scan"},
            {"n", r.n},
            {"screen_alpha", r.screen_alpha},
            {"records", recs}};
}

void write_scan_csv(const PairScanReport& r, std::ostream& os) {
    os << "col_a,col_b,tau_hat,csf_p,csf_p_bonferroni,screened_in,ckt_p,negated\n";
    for (const auto& p : r.records) {
        os << p.col_a << ',' << p.col_b << ',' << format_double(p.tau_hat) << ','
           << format_double(p.csf_p) << ',' << format_double(p.csf_p_bonferroni) << ','
           << (p.screened_in ? 1 : 0) << ',' << (p.ckt_p ? format_double(*p.ckt_p) : "") << ','
           << (p.negated ? 1 : 0) << '\n';
    }
}

}  // namespace hetcorr
