#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace hetcorr {

enum class Method { csf, ckt };
enum class Mode { analytic, simulated };

std::string to_string(Method m);
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

inline constexpr const char* kReportSchema = "hetcorr-report-v1";

/// Outcome of one test on one (x, y) pair.
struct TestReport {
    Method method = Method::csf;
    Mode mode = Mode::analytic;
    double statistic = 0.0;
    double p_value = 1.0;
    double tau_hat = 0.0;
    double rho_hat = 0.0;
    std::size_t n = 0;
    /// Null parameterization and diagnostics actually used.
    std::map<std::string, std::string> null_params;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const TestReport& r);

/// Shortest decimal form that round-trips a double.
std::string format_double(double x);

}  // namespace hetcorr
