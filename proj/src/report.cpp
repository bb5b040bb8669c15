#include "hetcorr/report.hpp"

#include <cstdio>
#include <stdexcept>

namespace hetcorr {

std::string to_string(Method m) { return m == Method::csf ? "csf" : "ckt"; }

std::string to_string(Mode m) { return m == Mode::analytic ? "analytic" : "simulated"; }

Mode parse_mode(const std::string& s) {
    if (s == "analytic") return Mode::analytic;
    if (s == "simulated") return Mode::simulated;
    throw std::invalid_argument("unknown mode '" + s + "' (expected analytic|simulated)");
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

nlohmann::json to_json(const TestReport& r) {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["method"] = to_string(r.method);
    j["mode"] = to_string(r.mode);
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["tau_hat"] = r.tau_hat;
    j["rho_hat"] = r.rho_hat;
    j["n"] = r.n;
    j["null_params"] = r.null_params;
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace hetcorr
