#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetcorr/ckt.hpp"
#include "hetcorr/csf.hpp"
#include "hetcorr/dataset.hpp"

namespace hetcorr {

enum class TestMethod { csf, ckt, both };

TestMethod parse_test_method(const std::string& s);

struct PairTestOptions {
    CsfOptions csf;
    CktOptions ckt;
    const CalibrationTable* table = nullptr;
    /// Test for negative association by negating y.
    bool negative = false;
    /// Seeds for column pair (a, b) derive from this.
    std::uint64_t seed = 0;
};

/// Reports in the order csf, ckt (whichever were requested).
std::vector<TestReport> test_pair(const Dataset& data, std::size_t col_x, std::size_t col_y,
                                  TestMethod method, const PairTestOptions& options);

struct PairRecord {
    std::string col_a;
    std::string col_b;
    double tau_hat = 0.0;
    double csf_p = 1.0;
    double csf_p_bonferroni = 1.0;  // extension: raw p times the number of pairs
    std::optional<double> ckt_p;    // present iff screened_in
    bool screened_in = false;
    bool negated = false;           // tau_hat <= 0, y was negated
};

struct PairScanReport {
    std::vector<PairRecord> records;
    double screen_alpha = 0.05;
    std::size_t n = 0;
};

/// CSF on every column pair; CKT only where csf_p <= screen_alpha.
PairScanReport scan_pairs(const Dataset& data, double screen_alpha,
                          const PairTestOptions& options, std::size_t workers = 1);

nlohmann::json to_json(const PairScanReport& r);
void write_scan_csv(const PairScanReport& r, std::ostream& os);

}  // namespace hetcorr
