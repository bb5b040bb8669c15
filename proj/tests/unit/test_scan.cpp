#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hetcorr/copula.hpp"
#include "hetcorr/dataset.hpp"
#include "hetcorr/random.hpp"
#include "hetcorr/scan.hpp"

using namespace hetcorr;
using Catch::Approx;

namespace {

const CalibrationTable& table() {
    static const CalibrationTable t = calibrate_beta_curve(default_rho_grid(), 5000, 40, 2026, 2);
    return t;
}

const Dataset& wine_measurements() {
    static const Dataset d = [] {
        std::vector<std::string> sel;
        for (int c = 2; c <= 14; ++c) sel.push_back(std::to_string(c));
        return load_csv(HETCORR_DATA_DIR "/wine.data", false, sel);
    }();
    return d;
}

PairTestOptions analytic_options() {
    PairTestOptions o;
    o.table = &table();
    o.ckt.mode = Mode::analytic;
    o.seed = 11;
    return o;
}

Dataset independent_columns(std::size_t k, std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.row_count = n;
    Rng rng(seed);
    for (std::size_t c = 0; c < k; ++c) {
        d.column_names.push_back("v" + std::to_string(c + 1));
        std::vector<double> col(n);
        for (auto& v : col) v = rng.uniform();
        d.columns.push_back(std::move(col));
    }
    return d;
}

}  // namespace

TEST_CASE("test_pair on a concordant pair", "[scan]") {
    Dataset d;
    d.row_count = 500;
    d.column_names = {"x", "y"};
    d.columns.resize(2);
    for (int i = 0; i < 500; ++i) {
        d.columns[0].push_back(i);
        d.columns[1].push_back(std::exp(0.01 * i));
    }
    auto o = analytic_options();
    o.ckt.mode = Mode::simulated;
    o.ckt.null_reps = 99;
    const auto reps = test_pair(d, 0, 1, TestMethod::both, o);
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].method == Method::csf);
    CHECK(reps[1].method == Method::ckt);
    CHECK(reps[0].p_value < 1e-6);
    // No heterogeneity to detect: the pair is the comonotone limit of the Frank null.
    CHECK(reps[1].p_value == 1.0);
    CHECK_FALSE(reps[1].warnings.empty());
    CHECK(reps[0].null_params.at("column_x") == "x");

    auto neg = o;
    neg.negative = true;
    const auto r = test_pair(d, 0, 1, TestMethod::csf, neg);
    REQUIRE(r.size() == 1);
    CHECK(r[0].tau_hat == -1.0);
    CHECK(r[0].null_params.at("negated_y") == "true");

    CHECK(parse_test_method("both") == TestMethod::both);
    CHECK_THROWS(parse_test_method("spearman"));
    CHECK_THROWS_AS(test_pair(d, 0, 2, TestMethod::csf, o), DataError);
}

TEST_CASE("scan of the wine measurements", "[scan]") {
    const auto& d = wine_measurements();
    REQUIRE(d.column_count() == 13);
    const auto rep = scan_pairs(d, 0.05, analytic_options(), 2);
    CHECK(rep.records.size() == 78);
    CHECK(rep.n == 178);
    for (const auto& r : rep.records) {
        CHECK(r.ckt_p.has_value() == r.screened_in);
        CHECK(r.screened_in == (r.csf_p <= 0.05));
        CHECK(r.negated == !(r.tau_hat > 0.0));
        CHECK(r.csf_p_bonferroni == Approx(std::min(1.0, 78.0 * r.csf_p)));
    }

    const auto none = scan_pairs(d, 0.0, analytic_options(), 2);
    for (const auto& r : none.records) CHECK((!r.ckt_p.has_value() || r.csf_p == 0.0));
}

TEST_CASE("scan with the screen disabled matches test_pair", "[scan][property]") {
    const auto& d = wine_measurements();
    const auto o = analytic_options();
    const auto rep = scan_pairs(d, 1.0, o, 3);
    std::size_t i = 0;
    for (std::size_t a = 0; a < d.column_count(); ++a) {
        for (std::size_t b = a + 1; b < d.column_count(); ++b, ++i) {
            const auto& r = rep.records[i];
            REQUIRE(r.ckt_p.has_value());
            auto po = o;
            po.negative = r.negated;
            CHECK(r.csf_p == test_pair(d, a, b, TestMethod::csf, po).front().p_value);
        }
    }
}

TEST_CASE("scan is reproducible across worker counts", "[scan][property]") {
    const auto d = independent_columns(6, 300, 3);
    auto o = analytic_options();
    o.csf.mode = Mode::simulated;
    o.csf.alpha_sims = 100;
    const auto a = to_json(scan_pairs(d, 0.5, o, 1));
    const auto b = to_json(scan_pairs(d, 0.5, o, 4));
    CHECK(a == b);
    CHECK(a["schema"] == "hetcorr-report-v1");
}

TEST_CASE("screen level under independence", "[scan]") {
    // 10 columns, 45 pairs per dataset, 6 datasets: 270 screened pairs.
    std::size_t in = 0, total = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto rep = scan_pairs(independent_columns(10, 400, 50 + s), 0.05, analytic_options(), 2);
        for (const auto& r : rep.records) {
            in += r.screened_in;
            ++total;
        }
    }
    const double rate = static_cast<double>(in) / static_cast<double>(total);
    // Tested one-sided after orienting by the sign of tau, so the rate is about 0.05.
    CHECK(rate < 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(total)));
}

TEST_CASE("scan CSV output", "[scan]") {
    const auto d = independent_columns(3, 200, 9);
    const auto rep = scan_pairs(d, 1.0, analytic_options(), 1);
    std::ostringstream os;
    write_scan_csv(rep, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "col_a,col_b,tau_hat,csf_p,csf_p_bonferroni,screened_in,ckt_p,negated");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
}
