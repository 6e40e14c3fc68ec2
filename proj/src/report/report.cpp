#include "qrsim/report/report.hpp"

#include "qrsim/error.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <map>

namespace qrsim::report {

std::string fingerprint(const net::Scenario& scenario) {
    const std::string text = net::normalized_dump(scenario);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

Baseline baseline_from(const Json& report) {
    if (!report.contains("scenario_fingerprint") || !report.contains("cia_ledger"))
        throw ConfigError("baseline document is not a run report");
    return {report.at("scenario_fingerprint").get<std::string>(),
            report.at("cia_ledger").at("delivered_rate_hz").get<double>()};
}

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json interval(const monitor::Interval& i) { return Json::array({i.lo, i.hi}); }

Json ledger_json(const monitor::CiaLedger& l, const std::optional<Baseline>& baseline) {
    Json j;
    j["confidentiality_leaked_pairs"] = l.confidentiality_leaked_pairs;
    j["leaked_key_bits"] = l.leaked_key_bits;
    j["leaked_teleports"] = l.leaked_teleports;
    j["integrity_bad_delivered"] = l.integrity_bad_delivered;
    j["corrupted_key_bits"] = l.corrupted_key_bits;
    j["corrupted_frames_applied"] = l.corrupted_frames_applied;
    j["delivered_pairs"] = l.delivered_pairs;
    j["sacrificed_pairs"] = l.sacrificed_pairs;
    j["destroyed_by_attack"] = l.destroyed_by_attack;
    j["aborted_connections"] = l.aborted_connections;
    j["delivered_rate_hz"] = l.delivered_rate_hz;
    j["disconnected_pairs_fraction"] = l.disconnected_pairs_fraction;
    j["baseline_delivered_rate_hz"] = nullptr;
    j["delivered_rate_ratio"] = nullptr;
    if (baseline) {
        j["baseline_delivered_rate_hz"] = baseline->delivered_rate_hz;
        if (baseline->delivered_rate_hz > 0) j["delivered_rate_ratio"] = l.delivered_rate_hz / baseline->delivered_rate_hz;
    }
    j["all_clear"] = l.all_clear();
    return j;
}

Json key_json(const engine::KeySession& k) {
    return {{"status", engine::to_string(k.status)},
            {"abort_reason", k.abort_reason},
            {"key_length", k.key_length},
            {"rounds_used", k.rounds_used},
            {"forged_sifting", k.forged_sifting},
            {"sifted_a", k.sifted_a},
            {"sifted_b", k.sifted_b},
            {"check_bits", k.check_bits},
            {"check_errors", k.check_errors},
            {"qber", k.qber},
            {"emitted_bits", k.emitted_bits()},
            {"reconciled_bits", k.reconciled_bits},
            {"leaked_key_bits", k.leaked_key_bits},
            {"attacker_recovery_a", k.attacker_recovery_a()},
            {"attacker_recovery_b", k.attacker_recovery_b()},
            {"raw_ab_agreement", k.raw_ab_agreement},
            {"keys_identical", !k.key_a.empty() && k.key_a == k.key_b}};
}

Json connection_json(const engine::ConnectionStats& c) {
    Json endpoints = Json::array();
    for (const auto& [a, b] : c.delivered_endpoints) endpoints.push_back(Json::array({a, b}));
    Json j{{"id", c.id},
           {"src", c.src},
           {"dst", c.dst},
           {"application", c.application},
           {"injected", c.injected},
           {"state", engine::to_string(c.state)},
           {"abort_cause", c.abort_cause},
           {"path", c.path},
           {"hops", c.hops},
           {"running_at_s", opt(c.running_at_s)},
           {"finished_at_s", opt(c.finished_at_s)},
           {"attempts", c.attempts},
           {"link_pairs", c.link_pairs},
           {"delivered", c.delivered},
           {"sacrificed", c.sacrificed},
           {"cross_delivered", c.cross_delivered},
           {"timeouts", c.timeouts},
           {"throughput_hz", c.throughput_hz},
           {"mean_fidelity", c.mean_fidelity},
           {"purify_rounds", c.purify_rounds},
           {"purify_target_missed", c.purify_target_missed},
           {"purify_disabled", c.purify_disabled},
           {"teleports", c.teleports},
           {"mean_teleport_fidelity", c.mean_teleport_fidelity},
           {"delivered_endpoints", endpoints}};
    j["key"] = c.key ? key_json(*c.key) : Json(nullptr);
    return j;
}

Json cert_json(const engine::CertEntry& e) {
    const auto& r = e.report;
    return {{"scope", r.scope},
            {"subject", r.subject},
            {"n_samples", r.n_samples},
            {"n_qber_z", r.n_qber_z},
            {"n_qber_x", r.n_qber_x},
            {"n_chsh", r.n_chsh},
            {"qber_z", r.qber_z},
            {"qber_x", r.qber_x},
            {"qber", r.qber},
            {"qber_interval", interval(r.qber_interval)},
            {"chsh_estimate", opt(r.chsh_estimate)},
            {"fidelity_estimate", r.fidelity_estimate},
            {"fidelity_interval", interval(r.fidelity_interval)},
            {"delta", r.delta},
            {"verdict", e.verdict},
            {"attributed_attacks", e.attributed}};
}

Json effect_json(const engine::AttackEffect& e) {
    return {{"attack_id", e.attack_id},
            {"attacker", e.attacker},
            {"kind", e.kind},
            {"represents", e.represents},
            {"actions", e.actions},
            {"leaked_pairs", e.leaked_pairs},
            {"destroyed_pairs", e.destroyed_pairs},
            {"corrupted_frames", e.corrupted_frames},
            {"dropped_messages", e.dropped_messages},
            {"forged_messages", e.forged_messages},
            {"isolated_nodes", e.isolated_nodes},
            {"aborted_connections", e.aborted_connections},
            {"injected_connections", e.injected_connections},
            {"first_effect_s", opt(e.first_effect_s)},
            {"detection_latency_s", opt(e.detection_latency_s)}};
}

}  // namespace

Json to_json(const engine::RunResult& r, const ReportContext& ctx) {
    Json j;
    j["format_version"] = kReportFormatVersion;
    j["scenario_fingerprint"] = ctx.scenario_fingerprint;
    j["seed"] = r.seed;
    j["cert_scope"] = ctx.cert_scope;
    j["end_time_s"] = r.end_time_s;
    j["wall_clock_s"] = ctx.wall_clock_s;
    j["baseline"] = ctx.baseline ? Json{{"scenario_fingerprint", ctx.baseline->fingerprint},
                                        {"delivered_rate_hz", ctx.baseline->delivered_rate_hz}}
                                 : Json(nullptr);
    j["event_count"] = r.log.count();
    j["cia_ledger"] = ledger_json(r.ledger, ctx.baseline);

    j["detection"] = Json::array();
    for (const auto& d : r.ledger.detection)
        j["detection"].push_back({{"attack_id", d.attack_id},
                                  {"kind", d.kind},
                                  {"first_effect_s", opt(d.first_effect_s)},
                                  {"detection_latency_s", opt(d.latency_s)},
                                  {"detected", d.latency_s.has_value()}});
    j["connections"] = Json::array();
    for (const auto& c : r.connections) j["connections"].push_back(connection_json(c));
    j["links"] = Json::array();
    for (const auto& l : r.links)
        j["links"].push_back({{"id", l.id}, {"attempts", l.attempts}, {"successes", l.successes}});
    j["certification"] = Json::array();
    for (const auto& e : r.certification) j["certification"].push_back(cert_json(e));
    j["reputation"] = {{"policy", r.reputation.policy},
                       {"k", r.reputation.k},
                       {"isolated", r.reputation.isolated},
                       {"accusation_counts", r.reputation.accusation_counts},
                       {"accusations_received", r.reputation.accusations_received},
                       {"accusations_rejected", r.reputation.accusations_rejected}};
    j["attacks_effects"] = Json::array();
    for (const auto& e : r.attacks) j["attacks_effects"].push_back(effect_json(e));
    j["removed_nodes"] = r.removed_nodes;
    Json fates = Json::object();
    for (const auto& [f, n] : r.fates) fates[state::to_string(f)] = n;
    j["conservation"] = {{"pairs_created", r.pairs_created}, {"fates", fates}, {"conserved", r.conserved()}};
    return j;
}

namespace {

void numeric_delta(const Json& a, const Json& b, Json& out) {
    for (auto it = b.begin(); it != b.end(); ++it) {
        const auto& key = it.key();
        if (!it->is_number() || !a.contains(key) || !a[key].is_number()) continue;
        const double d = it->get<double>() - a[key].get<double>();
        if (d != 0.0) out[key] = d;
    }
}

const Json* find_by_id(const Json& arr, const std::string& id) {
    for (const auto& x : arr)
        if (x.value("id", "") == id) return &x;
    return nullptr;
}

}  // namespace

Json diff(const Json& a, const Json& b, bool force) {
    const auto fa = a.at("scenario_fingerprint").get<std::string>();
    const auto fb = b.at("scenario_fingerprint").get<std::string>();
    auto names = [](const Json& r, const std::string& f) {
        return r.contains("baseline") && r["baseline"].is_object() &&
               r["baseline"].value("scenario_fingerprint", "") == f;
    };
    const bool related = fa == fb || names(a, fb) || names(b, fa);
    if (!related && !force) throw ConfigError("reports come from different scenarios (fingerprint mismatch)");

    Json out;
    out["format_version"] = kDiffFormatVersion;
    out["a"] = {{"scenario_fingerprint", fa}, {"seed", a.at("seed")}};
    out["b"] = {{"scenario_fingerprint", fb}, {"seed", b.at("seed")}};
    out["forced"] = !related;
    Json ledger = Json::object();
    numeric_delta(a.at("cia_ledger"), b.at("cia_ledger"), ledger);
    out["ledger"] = ledger;

    Json conns = Json::object();
    for (const auto& cb : b.at("connections")) {
        const auto id = cb.at("id").get<std::string>();
        const Json* ca = find_by_id(a.at("connections"), id);
        Json d = Json::object();
        if (!ca) {
            d["added"] = true;
        } else {
            for (const char* k : {"attempts", "delivered", "sacrificed", "throughput_hz", "mean_fidelity", "timeouts"})
                if (cb.at(k) != ca->at(k)) d[k] = cb.at(k).get<double>() - ca->at(k).get<double>();
            if (cb.at("state") != ca->at("state")) d["state"] = {ca->at("state"), cb.at("state")};
        }
        if (!d.empty()) conns[id] = d;
    }
    for (const auto& ca : a.at("connections")) {
        const auto id = ca.at("id").get<std::string>();
        if (!find_by_id(b.at("connections"), id)) conns[id] = {{"removed", true}};
    }
    out["connections"] = conns;
    out["empty"] = ledger.empty() && conns.empty();
    return out;
}

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    s.n = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / s.n;
    double half = 0.0;
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        half = 1.959963984540054 * std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    s.ci_lo = s.mean - half;
    s.ci_hi = s.mean + half;
    return s;
}

namespace {

Json summary_json(const std::vector<double>& xs) {
    const auto s = summarize(xs);
    if (s.n == 0) return {{"n", 0}, {"mean", nullptr}, {"ci95", nullptr}};
    return {{"n", s.n}, {"mean", s.mean}, {"ci95", Json::array({s.ci_lo, s.ci_hi})}};
}

}  // namespace

Json aggregate(const std::vector<Json>& reports) {
    Json out;
    out["format_version"] = kAggregateFormatVersion;
    out["runs"] = reports.size();
    out["seeds"] = Json::array();
    out["scenario_fingerprint"] = reports.empty() ? Json(nullptr) : reports.front().at("scenario_fingerprint");

    std::map<std::string, std::vector<double>> ledger, throughput, delivered;
    std::map<std::string, std::vector<double>> latency;
    std::map<std::string, int> detected, present;
    for (const auto& r : reports) {
        out["seeds"].push_back(r.at("seed"));
        for (auto it = r.at("cia_ledger").begin(); it != r.at("cia_ledger").end(); ++it)
            if (it->is_number()) ledger[it.key()].push_back(it->get<double>());
        for (const auto& c : r.at("connections")) {
            const auto id = c.at("id").get<std::string>();
            throughput[id].push_back(c.at("throughput_hz").get<double>());
            delivered[id].push_back(c.at("delivered").get<double>());
        }
        for (const auto& d : r.at("detection")) {
            const auto id = d.at("attack_id").get<std::string>();
            ++present[id];
            if (d.at("detection_latency_s").is_number()) {
                ++detected[id];
                latency[id].push_back(d.at("detection_latency_s").get<double>());
            }
        }
    }
    Json l = Json::object();
    for (const auto& [k, xs] : ledger) l[k] = summary_json(xs);
    out["cia_ledger"] = l;
    Json c = Json::object();
    for (const auto& [id, xs] : throughput)
        c[id] = {{"throughput_hz", summary_json(xs)}, {"delivered", summary_json(delivered[id])}};
    out["connections"] = c;
    Json d = Json::object();
    for (const auto& [id, n] : present)
        d[id] = {{"runs", n}, {"detected_runs", detected[id]}, {"detection_latency_s", summary_json(latency[id])}};
    out["detection"] = d;
    return out;
}

}  // namespace qrsim::report
