#include "qrsim/monitor/certification.hpp"

#include <algorithm>
#include <cmath>

namespace qrsim::monitor {

double hoeffding_epsilon(int n, double delta) {
    if (n <= 0) return 1.0;
    return std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

void CertAccumulator::add(const CertSample& s) {
    ++n_;
    const bool agree = s.bit_a == s.bit_b;
    switch (s.setting) {
        case SampleSetting::QberZ:
            ++z_n_;
            z_err_ += !agree;
            break;
        case SampleSetting::QberX:
            ++x_n_;
            x_err_ += !agree;
            break;
        case SampleSetting::Chsh:
            ++chsh_n_[s.a_setting][s.b_setting];
            chsh_agree_[s.a_setting][s.b_setting] += agree;
            break;
    }
}

namespace {

// Werner pairs have equal Z and X error rates e = 2(1 - F)/3.
void fill_fidelity(CertReport& r, int n_qber) {
    const double eps = hoeffding_epsilon(n_qber, r.delta);
    r.qber_interval = {std::max(0.0, r.qber - eps), std::min(1.0, r.qber + eps)};
    auto f_of = [](double e) { return std::clamp(1.0 - 1.5 * e, 0.0, 1.0); };
    r.fidelity_estimate = f_of(r.qber);
    r.fidelity_interval = {f_of(r.qber_interval.hi), f_of(r.qber_interval.lo)};
}

}  // namespace

CertReport CertAccumulator::report(const std::string& scope, const std::string& subject, double delta) const {
    CertReport r;
    r.scope = scope;
    r.subject = subject;
    r.delta = delta;
    r.n_samples = n_;
    r.n_qber_z = z_n_;
    r.n_qber_x = x_n_;
    r.qber_z = z_n_ ? static_cast<double>(z_err_) / z_n_ : 0.0;
    r.qber_x = x_n_ ? static_cast<double>(x_err_) / x_n_ : 0.0;
    const int nq = z_n_ + x_n_;
    r.qber = nq ? static_cast<double>(z_err_ + x_err_) / nq : 0.0;
    bool all_settings = true;
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            r.n_chsh += chsh_n_[a][b];
            if (chsh_n_[a][b] == 0) {
                all_settings = false;
                continue;
            }
            const double e = (2.0 * chsh_agree_[a][b] - chsh_n_[a][b]) / chsh_n_[a][b];
            s += (a == 1 && b == 1) ? -e : e;
        }
    if (all_settings) r.chsh_estimate = s;
    fill_fidelity(r, nq);
    return r;
}

CertReport qber_report(const std::string& scope, const std::string& subject, int n_checked, int n_errors,
                       double delta) {
    CertReport r;
    r.scope = scope;
    r.subject = subject;
    r.delta = delta;
    r.n_samples = n_checked;
    r.qber = n_checked ? static_cast<double>(n_errors) / n_checked : 0.0;
    fill_fidelity(r, n_checked);
    return r;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Clean: return "clean";
        case Verdict::Degraded: return "degraded";
        case Verdict::AttackSuspected: return "attack_suspected";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Verdict detect(const CertReport& r, const Thresholds& t) {
    const int n_qber = r.n_qber_z + r.n_qber_x > 0 ? r.n_qber_z + r.n_qber_x : r.n_samples - r.n_chsh;
    if (n_qber < t.min_samples) return Verdict::Inconclusive;
    if (r.fidelity_interval.hi < t.fidelity_floor || r.qber_interval.lo > t.qber_ceiling)
        return Verdict::AttackSuspected;
    if (r.fidelity_interval.lo < t.fidelity_floor || r.qber_interval.hi > t.qber_ceiling) return Verdict::Degraded;
    return Verdict::Clean;
}

}  // namespace qrsim::monitor
