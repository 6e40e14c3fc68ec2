#pragma once

#include "qrsim/engine/simulator.hpp"
#include "qrsim/network/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qrsim::report {

using net::Json;

inline constexpr int kReportFormatVersion = 1;
inline constexpr int kAggregateFormatVersion = 1;
inline constexpr int kDiffFormatVersion = 1;

/// Lower-case hex SHA-256 of the normalized scenario document.
std::string fingerprint(const net::Scenario& scenario);

/// Reference to a stored honest-run report.
struct Baseline {
    std::string fingerprint;
    double delivered_rate_hz = 0.0;
};

/// Reads the fingerprint and delivered rate out of a report document.
Baseline baseline_from(const Json& report);

struct ReportContext {
    std::string scenario_fingerprint;
    std::string cert_scope;
    std::optional<Baseline> baseline;
    double wall_clock_s = 0.0;
};

Json to_json(const engine::RunResult& result, const ReportContext& context);

/// Structured delta b - a. Empty `ledger` / `connections` objects mean no change.
/// Throws ConfigError when the fingerprints differ unless `force` is set or one report
/// names the other as its baseline.
Json diff(const Json& a, const Json& b, bool force = false);

/// Mean and 95% normal-approximation interval.
struct Summary {
    int n = 0;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};
Summary summarize(const std::vector<double>& xs);

/// Cross-seed table: per-connection throughput, the ledger delivered rate and, per attack,
/// detection latency over the runs that detected it.
Json aggregate(const std::vector<Json>& reports);

}  // namespace qrsim::report
