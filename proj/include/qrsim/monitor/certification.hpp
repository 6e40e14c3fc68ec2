#pragma once

#include <array>
#include <optional>
#include <string>

namespace qrsim::monitor {

enum class SampleSetting { QberZ, QberX, Chsh };

/// One sacrificed pair: bits measured on each side under the given setting.
/// For CHSH samples `a_setting`/`b_setting` select A0/A1 and B0/B1.
struct CertSample {
    SampleSetting setting = SampleSetting::QberZ;
    int a_setting = 0;
    int b_setting = 0;
    int bit_a = 0;
    int bit_b = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct CertReport {
    std::string scope;    // "link" or "connection"
    std::string subject;  // link id or connection id
    int n_samples = 0;
    int n_qber_z = 0;
    int n_qber_x = 0;
    int n_chsh = 0;
    double qber_z = 0.0;
    double qber_x = 0.0;
    double qber = 0.0;  // pooled over Z and X samples
    Interval qber_interval;
    std::optional<double> chsh_estimate;  // needs every CHSH setting sampled
    double fidelity_estimate = 0.0;
    Interval fidelity_interval;
    double delta = 0.01;
};

/// sqrt(ln(2/delta) / (2n)).
double hoeffding_epsilon(int n, double delta);

/// Running statistics for one certification scope.
class CertAccumulator {
public:
    void add(const CertSample& s);
    int n_samples() const { return n_; }
    CertReport report(const std::string& scope, const std::string& subject, double delta) const;

private:
    int n_ = 0;
    int z_n_ = 0, z_err_ = 0;
    int x_n_ = 0, x_err_ = 0;
    std::array<std::array<int, 2>, 2> chsh_n_{};
    std::array<std::array<int, 2>, 2> chsh_agree_{};
};

/// Builds a QBER-only report from disclosed key check bits.
CertReport qber_report(const std::string& scope, const std::string& subject, int n_checked, int n_errors,
                       double delta);

enum class Verdict { Clean, Degraded, AttackSuspected, Inconclusive };

std::string to_string(Verdict v);

struct Thresholds {
    double fidelity_floor = 0.85;
    double qber_ceiling = 0.11;
    int min_samples = 20;
};

/// attack_suspected iff the fidelity upper bound sits below the floor or the QBER lower
/// bound sits above the ceiling; degraded when either interval straddles its threshold.
Verdict detect(const CertReport& report, const Thresholds& t);

}  // namespace qrsim::monitor
