#include "qrsim/adversary/attacks.hpp"
#include "qrsim/engine/bbm92.hpp"
#include "qrsim/engine/link_model.hpp"
#include "qrsim/engine/purification.hpp"
#include "qrsim/engine/simulator.hpp"
#include "qrsim/state/oracle.hpp"
#include "qrsim/state/werner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <type_traits>

using namespace qrsim;
using namespace qrsim::engine;
using net::Json;

namespace {

Json node(const std::string& id, const std::string& kind, bool hijacked = false) {
    Json n{{"id", id}, {"kind", kind}};
    if (hijacked) n["hijacked"] = true;
    return n;
}

Json fiber(const std::string& a, const std::string& b, double km = 10.0, double f0 = 0.98) {
    return {{"id", a + "-" + b}, {"a", a}, {"b", b}, {"length_km", km}, {"base_fidelity", f0}};
}

Json demand(const std::string& id, const std::string& src, const std::string& dst, int target = 100) {
    return {{"id", id}, {"src", src}, {"dst", dst}, {"target_pairs", target}};
}

/// A - R1 - ... - B with identical links.
Json chain(int hops, double km = 10.0, double f0 = 0.98) {
    std::vector<std::string> ids{"A"};
    for (int i = 1; i < hops; ++i) ids.push_back("R" + std::to_string(i));
    ids.push_back("B");
    Json d;
    d["seed"] = 7;
    d["nodes"] = Json::array();
    d["links"] = Json::array();
    for (const auto& id : ids) d["nodes"].push_back(node(id, id.size() == 1 ? "ENode" : "RNode"));
    for (int i = 0; i < hops; ++i) d["links"].push_back(fiber(ids[i], ids[i + 1], km, f0));
    d["demands"] = Json::array({demand("ab", "A", "B")});
    d["protocol"] = {{"horizon_s", 5.0}};
    return d;
}

RunResult run_doc(const Json& d, RunOptions o = {}) { return run(net::load_scenario(d), o); }

/// Hijacked repeater in the middle of a BBM92 session over perfect links.
Json mitm(bool authenticated) {
    Json d = chain(2, 10.0, 1.0);
    d["nodes"][1]["hijacked"] = true;
    d["classical"] = {{"authenticated", authenticated}};
    d["demands"][0]["application"] = "bbm92";
    d["demands"][0]["key_length"] = 400;
    d["demands"][0]["check_fraction"] = 0.25;
    d["attacks"] = Json::array({Json{{"attacker", "mallory"},
                                     {"kind", "mitm_bbm92"},
                                     {"target", "R1"},
                                     {"params", {{"demand", "ab"}}}}});
    return d;
}

/// Two demands through one hijacked XNode.
Json switching() {
    Json d;
    d["seed"] = 3;
    d["nodes"] = Json::array({node("A", "ENode"), node("Ap", "ENode"), node("B", "ENode"), node("Bp", "ENode"),
                              node("X", "XNode", true)});
    d["links"] = Json::array({fiber("A", "X"), fiber("Ap", "X"), fiber("B", "X"), fiber("Bp", "X")});
    d["demands"] = Json::array({demand("aa", "A", "Ap", 300), demand("bb", "B", "Bp", 300)});
    d["demands"][0]["sacrifice_fraction"] = 0.5;
    d["demands"][1]["sacrifice_fraction"] = 0.5;
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "switch_disrupt"},
                                     {"target", "X"},
                                     {"params", {{"demands", {"aa", "bb"}}}}}});
    d["protocol"] = {{"horizon_s", 5.0}};
    return d;
}

/// Affected demand A->B plus an unrelated C->D on disjoint links.
Json black_hole(bool attack) {
    Json d;
    d["seed"] = 11;
    d["nodes"] = Json::array({node("A", "ENode"), node("B", "ENode"), node("C", "ENode"), node("D", "ENode"),
                              node("H", "ENode", true), node("X1", "XNode"), node("R1", "RNode"), node("X2", "XNode")});
    d["links"] = Json::array({fiber("A", "X1"), fiber("C", "X1"), fiber("D", "X1"), fiber("X1", "R1"),
                              fiber("R1", "X2"), fiber("X2", "B"), fiber("X2", "H")});
    d["demands"] = Json::array({demand("ab", "A", "B"), demand("cd", "C", "D", 200)});
    d["attacks"] = Json::array();
    if (attack)
        d["attacks"].push_back(Json{{"attacker", "eve"},
                                    {"kind", "path_black_hole"},
                                    {"target", "H"},
                                    {"params", {{"advertised", {"B"}}}}});
    d["protocol"] = {{"horizon_s", 5.0}};
    return d;
}

}  // namespace

// ---- link model -------------------------------------------------------------------------

TEST(LinkModel, AttemptProbabilities) {
    net::LinkSpec l;
    l.length_km = 10.0;
    EXPECT_NEAR(attempt_probability(l), std::pow(10.0, -0.2), 1e-15);
    EXPECT_NEAR(attempt_probability(l), 0.631, 5e-4);
    l.length_km = 0.0;
    EXPECT_EQ(attempt_probability(l), 1.0);
    l.architecture = net::Architecture::MemoriesAndBSA;
    EXPECT_EQ(attempt_probability(l), 0.5);
    l.architecture = net::Architecture::MemoriesAndEPPS;
    EXPECT_EQ(attempt_probability(l), 1.0);
    // Each half travels L/2, so EPPS over 20 km matches one 20 km fiber.
    l.length_km = 20.0;
    EXPECT_NEAR(attempt_probability(l), std::pow(10.0, -0.4), 1e-15);
}

TEST(LinkModel, GeometricAttemptCounts) {
    Rng rng(5);
    const double p = 0.3;
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const long k = attempts_until_success(p, rng);
        ASSERT_GE(k, 1);
        sum += static_cast<double>(k);
    }
    // Mean 1/p, standard error sqrt(1-p)/p/sqrt(n).
    EXPECT_NEAR(sum / n, 1.0 / p, 5.0 * std::sqrt(1.0 - p) / p / std::sqrt(n));
    EXPECT_EQ(attempts_until_success(1.0, rng), 1);
    EXPECT_THROW(attempts_until_success(0.0, rng), DomainError);
}

TEST(LinkModel, AttemptCreatesBaseFidelityPair) {
    state::PairStore store;
    net::LinkSpec l;
    l.a = "x";
    l.b = "y";
    l.length_km = 0.0;
    l.base_fidelity = 0.9;
    Rng rng(1);
    auto id = attempt_link(store, l, 0.0, rng);
    ASSERT_TRUE(id.has_value());
    EXPECT_NEAR(store.get(*id).fidelity(), 0.9, 1e-15);
}

// ---- purification -----------------------------------------------------------------------

TEST(Purification, TrajectoryMatchesOracleRecurrence) {
    // Iterate the density-matrix oracle on twirled inputs.
    std::vector<double> expected{0.8};
    while (expected.back() < 0.9) {
        const auto w = state::make_werner(expected.back());
        expected.push_back(state::oracle_purify(w, w).post_state.fidelity());
    }
    ASSERT_EQ(expected.size(), 4u);

    const auto t = purify_trajectory(0.8, 0.9, 64);
    EXPECT_TRUE(t.reachable);
    EXPECT_EQ(t.levels, 3);
    EXPECT_EQ(t.rounds, 7);
    EXPECT_EQ(t.pairs_needed, 8);
    for (int i = 0; i <= 3; ++i) EXPECT_NEAR(t.level_fidelity[i], expected[i], 1e-12);
}

TEST(Purification, TargetBelowBaseNeedsNoRounds) {
    const auto t = purify_trajectory(0.95, 0.9, 16);
    EXPECT_EQ(t.rounds, 0);
    EXPECT_TRUE(t.reachable);

    state::PairStore store;
    Rng rng(2);
    auto supply = [&]() -> std::optional<state::PairId> { return store.create_werner("x", "y", 0.95, 0.0); };
    auto r = purify_until(store, supply, 0.9, 16, 0.0, rng);
    EXPECT_TRUE(r.target_met);
    EXPECT_EQ(r.rounds, 0);
    EXPECT_EQ(r.consumed, 1);
}

TEST(Purification, BelowHalfNeverReachesTarget) {
    const auto t = purify_trajectory(0.45, 0.46, 1 << 12);
    EXPECT_FALSE(t.reachable);

    state::PairStore store;
    Rng rng(3);
    auto supply = [&]() -> std::optional<state::PairId> { return store.create_werner("x", "y", 0.45, 0.0); };
    auto r = purify_until(store, supply, 0.46, 32, 0.0, rng);
    EXPECT_FALSE(r.target_met);
    EXPECT_EQ(r.consumed, 32);
    EXPECT_TRUE(store.live_ids().empty());
}

TEST(Purification, PumpReachesTargetFromPerfectSuccess) {
    // From 0.8 the target needs three levels: either all seven rounds succeed on the first
    // eight pairs or some round failed along the way.
    state::PairStore store;
    Rng rng(4);
    PurifyPump pump(0.9, 8);
    std::optional<state::PairId> out;
    int fed = 0;
    while (!out && !pump.exhausted()) {
        out = pump.feed(store, store.create_werner("x", "y", 0.8, 0.0), 0.0, rng);
        ++fed;
    }
    if (out) {
        EXPECT_GE(store.get(*out).fidelity(), 0.9);
        EXPECT_EQ(fed, 8);
        EXPECT_EQ(pump.rounds(), 7);
    } else {
        EXPECT_GT(pump.failures(), 0);
    }
}

// ---- key sessions -----------------------------------------------------------------------

TEST(Bbm92, PerfectRoundsGiveIdenticalKeys) {
    KeySessionBuilder b(50, 0.11, false);
    Rng rng(9);
    while (!b.complete()) {
        KeyRound r;
        r.a_basis = fair_bit(rng);
        r.b_basis = fair_bit(rng);
        r.a_bit = fair_bit(rng);
        r.b_bit = r.a_basis == r.b_basis ? r.a_bit : fair_bit(rng);
        r.check = bernoulli(rng, 0.2);
        b.add(r);
    }
    const auto s = b.finish();
    EXPECT_EQ(s.status, KeyStatus::Completed);
    EXPECT_EQ(s.qber, 0.0);
    EXPECT_EQ(s.key_a, s.key_b);
    EXPECT_EQ(static_cast<int>(s.key_a.size()) + s.check_bits, 50);
}

TEST(Bbm92, ErrorsAboveThresholdEmitNothing) {
    KeySessionBuilder b(40, 0.11, false);
    for (int i = 0; i < 40; ++i) {
        KeyRound r;
        r.a_bit = i % 2;
        r.b_bit = i % 4 == 0 ? 1 - r.a_bit : r.a_bit;
        r.check = i % 2 == 0;
        b.add(r);
    }
    const auto s = b.finish();
    EXPECT_EQ(s.status, KeyStatus::Aborted);
    EXPECT_DOUBLE_EQ(s.qber, 0.5);
    EXPECT_EQ(s.emitted_bits(), 0);
}

TEST(Bbm92, WernerPairsGiveExpectedQber) {
    // Werner(0.85): weight p = (4F-1)/3 = 0.8, sifted error (1-p)/2 = 0.1.
    const double expected = (1.0 - (4.0 * 0.85 - 1.0) / 3.0) / 2.0;
    EXPECT_NEAR(expected, 0.1, 1e-15);
    Json d = chain(1, 10.0, 0.85);
    d["demands"][0]["application"] = "bbm92";
    d["demands"][0]["key_length"] = 4000;
    d["demands"][0]["check_fraction"] = 0.5;
    d["protocol"]["qber_threshold"] = 0.2;
    auto r = run_doc(d, {std::uint64_t{21}, std::nullopt, false});
    const auto& k = r.connection("ab")->key;
    ASSERT_TRUE(k.has_value());
    EXPECT_EQ(k->status, KeyStatus::Completed);
    const double se = std::sqrt(expected * (1 - expected) / k->check_bits);
    EXPECT_NEAR(k->qber, expected, 5 * se);
}

// ---- runs -------------------------------------------------------------------------------

TEST(Run, HonestTwoHopDeliversTarget) {
    auto r = run_doc(chain(2));
    const auto* c = r.connection("ab");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->state, ConnState::Done);
    EXPECT_EQ(c->delivered, 100);
    EXPECT_TRUE(r.ledger.all_clear());
    EXPECT_TRUE(r.conserved());
    for (const auto& e : r.certification) EXPECT_NE(e.verdict, "attack_suspected");
}

TEST(Run, SwapFidelityFollowsWernerRule) {
    auto r = run_doc(chain(2, 10.0, 0.95));
    const double f = 0.95;
    EXPECT_NEAR(r.connection("ab")->mean_fidelity, f * f + (1 - f) * (1 - f) / 3.0, 1e-12);
    EXPECT_NEAR(r.connection("ab")->mean_fidelity, state::swap_werner(0.95, 0.95), 1e-12);

    auto perfect = run_doc(chain(2, 10.0, 1.0));
    EXPECT_NEAR(perfect.connection("ab")->mean_fidelity, 1.0, 1e-12);
}

TEST(Run, LongerChainsStillConserve) {
    for (int hops : {1, 3, 4, 5}) {
        auto r = run_doc(chain(hops));
        EXPECT_EQ(r.connection("ab")->delivered, 100) << hops;
        EXPECT_TRUE(r.conserved()) << hops;
        const auto swaps = r.fates.count(state::Fate::ConsumedBySwap) ? r.fates.at(state::Fate::ConsumedBySwap) : 0u;
        EXPECT_EQ(swaps > 0, hops > 1) << hops;
    }
}

TEST(Run, SameSeedSameLog) {
    Json d = chain(3);
    d["demands"][0]["target_pairs"] = 50;
    auto a = run_doc(d);
    auto b = run_doc(d);
    EXPECT_EQ(a.log.csv(), b.log.csv());
    auto c = run_doc(d, {std::uint64_t{99}, std::nullopt, true});
    EXPECT_NE(a.log.csv(), c.log.csv());
}

TEST(Run, LongerLinksLowerRate) {
    auto short_run = run_doc(chain(2, 20.0));
    auto long_run = run_doc(chain(2, 40.0));
    EXPECT_LT(long_run.ledger.delivered_rate_hz, short_run.ledger.delivered_rate_hz);
}

TEST(Run, SetupWithinTwoRoundTrips) {
    auto r = run_doc(chain(4));
    // Classical latency 5 us/km over 40 km each way.
    const double rtt = 2.0 * 40.0 * 5e-6;
    ASSERT_TRUE(r.connection("ab")->running_at_s.has_value());
    EXPECT_LE(*r.connection("ab")->running_at_s, 2.0 * rtt + 1e-15);
}

TEST(Run, UnreachableDestinationAborts) {
    Json d = chain(3);
    d["demands"][0]["start_s"] = 0.001;
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "destroy_asset"}, {"target", "R2"}}});
    auto r = run_doc(d);
    EXPECT_EQ(r.connection("ab")->state, ConnState::Aborted);
    EXPECT_EQ(r.connection("ab")->abort_cause, "NoRoute");
    EXPECT_EQ(r.connection("ab")->attempts, 0);
}

TEST(Run, PurificationRaisesDeliveredFidelity) {
    Json d = chain(1, 10.0, 0.8);
    d["nodes"][0]["qubits"] = {{"buffer", 2}};
    d["nodes"][1]["qubits"] = {{"buffer", 2}};
    d["demands"][0]["link_f_target"] = 0.9;
    d["demands"][0]["purify_budget"] = 16;
    d["demands"][0]["target_pairs"] = 30;
    auto r = run_doc(d);
    const auto* c = r.connection("ab");
    EXPECT_EQ(c->delivered, 30);
    EXPECT_GT(c->purify_rounds, 0);
    EXPECT_GT(c->mean_fidelity, 0.8);
    EXPECT_TRUE(r.conserved());
    EXPECT_GT(r.fates.at(state::Fate::ConsumedByPurify), 0u);
}

TEST(Run, PurificationNeedsBufferQubits) {
    Json d = chain(1, 10.0, 0.8);
    d["nodes"][1]["qubits"] = {{"buffer", 0}};
    d["demands"][0]["link_f_target"] = 0.9;
    d["demands"][0]["purify_budget"] = 16;
    auto r = run_doc(d);
    EXPECT_TRUE(r.connection("ab")->purify_disabled);
    EXPECT_EQ(r.connection("ab")->purify_rounds, 0);
}

TEST(Run, TeleportDeliversPayload) {
    Json d = chain(1, 10.0, 1.0);
    d["demands"][0]["application"] = "teleport";
    d["demands"][0]["target_pairs"] = 20;
    auto r = run_doc(d);
    const auto* c = r.connection("ab");
    EXPECT_EQ(c->teleports, 20);
    EXPECT_NEAR(c->mean_teleport_fidelity, 1.0, 1e-12);
    EXPECT_EQ(r.ledger.leaked_teleports, 0);
}

TEST(Run, LinkScopeCertification) {
    auto r = run_doc(chain(2), {std::nullopt, net::CertScope::Link, true});
    bool saw_link = false;
    for (const auto& e : r.certification) saw_link |= e.report.scope == "link";
    EXPECT_TRUE(saw_link);
    EXPECT_EQ(r.connection("ab")->delivered, 100);
    EXPECT_TRUE(r.conserved());
}

// ---- attacks through the engine ---------------------------------------------------------

TEST(Attack, EmptyScriptMatchesBaseline) {
    Json d = chain(2);
    d["attacks"] = Json::array();
    auto s = net::load_scenario(d);
    EXPECT_EQ(run(s).log.csv(), run(honest_baseline(s)).log.csv());
}

TEST(Attack, MitmWithoutAuthenticationRecoversBothKeys) {
    auto r = run_doc(mitm(false));
    const auto& k = r.connection("ab")->key;
    ASSERT_TRUE(k.has_value());
    EXPECT_TRUE(k->forged_sifting);
    EXPECT_EQ(k->status, KeyStatus::Completed);
    EXPECT_GT(k->emitted_bits(), 0);
    EXPECT_DOUBLE_EQ(k->attacker_recovery_a(), 1.0);
    EXPECT_DOUBLE_EQ(k->attacker_recovery_b(), 1.0);
    EXPECT_NE(k->key_a, k->key_b);
    // No quantum correlation links A and B directly.
    EXPECT_NEAR(k->raw_ab_agreement, 0.5, 0.1);
    EXPECT_EQ(r.ledger.leaked_key_bits, k->emitted_bits());
}

TEST(Attack, MitmWithAuthenticationAborts) {
    auto r = run_doc(mitm(true));
    const auto* c = r.connection("ab");
    ASSERT_TRUE(c->key.has_value());
    EXPECT_FALSE(c->key->forged_sifting);
    EXPECT_EQ(c->state, ConnState::Aborted);
    EXPECT_EQ(c->key->emitted_bits(), 0);
    EXPECT_EQ(r.ledger.leaked_key_bits, 0);
}

TEST(Attack, SwitchDisruptCrossesEndpoints) {
    auto r = run_doc(switching());
    using P = std::pair<std::string, std::string>;
    const std::set<P> expected{P{"A", "Bp"}, P{"Ap", "B"}};
    EXPECT_EQ(r.connection("aa")->delivered_endpoints, expected);
    EXPECT_EQ(r.connection("bb")->delivered_endpoints, expected);
    bool found = false;
    for (const auto& e : r.certification)
        if (e.report.subject == "aa") {
            found = true;
            EXPECT_LT(e.report.fidelity_interval.hi, 0.5);
            EXPECT_EQ(e.verdict, "attack_suspected");
        }
    EXPECT_TRUE(found);
    EXPECT_TRUE(r.conserved());
}

TEST(Attack, PredictedSamplingEvadesCertification) {
    Json d = chain(2);
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "intercept_resend"},
                                     {"target", "A-R1"},
                                     {"params", {{"predicts_sampling", true}}}}});
    auto r = run_doc(d);
    EXPECT_EQ(r.ledger.confidentiality_leaked_pairs, r.connection("ab")->delivered);
    EXPECT_GT(r.ledger.confidentiality_leaked_pairs, 0);
    ASSERT_EQ(r.attacks.size(), 1u);
    EXPECT_FALSE(r.attacks[0].detection_latency_s.has_value());
    for (const auto& e : r.certification) EXPECT_NE(e.verdict, "attack_suspected");
}

TEST(Attack, InterceptResendRaisesQber) {
    Json d = chain(2, 10.0, 1.0);
    d["demands"][0]["sacrifice_fraction"] = 0.5;
    d["demands"][0]["target_pairs"] = 400;
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "intercept_resend"}, {"target", "A-R1"}}});
    auto r = run_doc(d, {std::nullopt, std::nullopt, false});
    const CertEntry* e2e = nullptr;
    for (const auto& e : r.certification)
        if (e.report.subject == "ab") e2e = &e;
    ASSERT_NE(e2e, nullptr);
    EXPECT_EQ(e2e->verdict, "attack_suspected");
    EXPECT_TRUE(r.attacks[0].detection_latency_s.has_value());
    EXPECT_GT(r.ledger.confidentiality_leaked_pairs, 0);
}

TEST(Attack, BlackHoleSpendsNoQuantumAttempts) {
    auto attacked = run_doc(black_hole(true));
    auto baseline = run_doc(black_hole(false));
    const auto* ab = attacked.connection("ab");
    EXPECT_EQ(ab->state, ConnState::Aborted);
    EXPECT_EQ(ab->abort_cause, "PathSetupTimeout");
    EXPECT_EQ(ab->attempts, 0);
    const double t0 = baseline.connection("cd")->throughput_hz;
    const double t1 = attacked.connection("cd")->throughput_hz;
    EXPECT_LT(std::abs(t1 - t0) / t0, 0.01);
}

TEST(Attack, FalseFailureReportAbortsThroughVictim) {
    Json d = chain(3);
    d["nodes"][1]["hijacked"] = true;
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "false_failure_report"},
                                     {"target", "R1"},
                                     {"params", {{"victim", "R2"}}},
                                     {"window", {0.0005, nullptr}}}});
    auto r = run_doc(d);
    EXPECT_EQ(r.connection("ab")->state, ConnState::Aborted);
    EXPECT_TRUE(r.removed_nodes.count("R2"));
    EXPECT_TRUE(r.conserved());
}

TEST(Attack, EavesdropQuantumDestroysPairs) {
    Json d = chain(1);
    d["attacks"] = Json::array(
        {Json{{"attacker", "eve"}, {"kind", "eavesdrop_quantum"}, {"target", "A-B"}, {"params", {{"p", 0.5}}}}});
    auto r = run_doc(d);
    EXPECT_GT(r.ledger.destroyed_by_attack, 0);
    EXPECT_EQ(r.attacks[0].destroyed_pairs, r.ledger.destroyed_by_attack);
    EXPECT_TRUE(r.conserved());
}

TEST(Attack, ModifyOnAuthenticatedChannelIsDiscarded) {
    Json d = chain(2, 10.0, 1.0);
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "modify_messages"}, {"target", "R1~B"}}});
    auto r = run_doc(d);
    EXPECT_EQ(r.ledger.corrupted_frames_applied, 0);
    EXPECT_GT(r.attacks[0].dropped_messages, 0);
}

TEST(Attack, ModifyOnOpenChannelFlipsFrames) {
    Json d = chain(2, 10.0, 1.0);
    d["classical"] = {{"authenticated", false}};
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "modify_messages"}, {"target", "R1~B"}}});
    auto r = run_doc(d);
    EXPECT_GT(r.ledger.corrupted_frames_applied, 0);
    EXPECT_LT(r.connection("ab")->mean_fidelity, 0.5);
}

TEST(Attack, QdosInjectsConnections) {
    Json d = chain(2);
    d["nodes"][0]["hijacked"] = true;
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "qdos_oversized_request"},
                                     {"target", "A"},
                                     {"params", {{"dst", "B"}, {"key_length", 1000000}}}}});
    d["protocol"]["horizon_s"] = 0.5;
    auto r = run_doc(d, {std::nullopt, std::nullopt, false});
    const auto* inj = r.connection("eve#0@A");
    ASSERT_NE(inj, nullptr);
    EXPECT_TRUE(inj->injected);
    EXPECT_EQ(r.attacks[0].injected_connections, 1);
    auto base = run_doc(chain(2), {std::nullopt, std::nullopt, false});
    EXPECT_GT(r.connection("ab")->finished_at_s.value_or(1e9), base.connection("ab")->finished_at_s.value());
}

// ---- adversary validation ---------------------------------------------------------------

namespace {

std::vector<std::string> attack_rules(const Json& d) {
    try {
        adversary::build_scripts(net::load_scenario(d));
    } catch (const ValidationError& e) {
        std::vector<std::string> out;
        for (const auto& v : e.violations()) out.push_back(v.rule);
        return out;
    }
    return {};
}

}  // namespace

TEST(Adversary, RejectsUnknownKind) {
    Json d = chain(2);
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "quantum_hacking"}, {"target", "A-R1"}}});
    EXPECT_EQ(attack_rules(d), std::vector<std::string>{"attack.unknown_kind"});
}

TEST(Adversary, HijackBehaviourNeedsHijackedNode) {
    Json d = chain(2);
    d["attacks"] = Json::array(
        {Json{{"attacker", "eve"}, {"kind", "mitm_bbm92"}, {"target", "R1"}, {"params", {{"demand", "ab"}}}}});
    EXPECT_EQ(attack_rules(d), std::vector<std::string>{"attack.not_hijacked"});
}

TEST(Adversary, RejectsBadParameters) {
    Json d = chain(2);
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "drop_messages"},
                                     {"target", "A~R1"},
                                     {"params", {{"p", 1.5}, {"colour", "red"}}}}});
    auto rules = attack_rules(d);
    EXPECT_EQ(rules.size(), 2u);
    for (const auto& r : rules) EXPECT_EQ(r, "attack.params");
}

TEST(Adversary, RejectsUnknownTargets) {
    Json d = chain(2);
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "intercept_resend"}, {"target", "A-Q"}},
                                Json{{"attacker", "eve"}, {"kind", "drop_messages"}, {"target", "A~Q"}}});
    EXPECT_EQ(attack_rules(d), (std::vector<std::string>{"attack.target", "attack.target"}));
}

TEST(Adversary, CatalogIsClosed) {
    EXPECT_EQ(adversary::catalog().size(), 22u);
    for (const auto& e : adversary::catalog()) {
        EXPECT_EQ(adversary::kind_from_string(e.name), e.kind);
        EXPECT_FALSE(e.represents.empty());
    }
}

TEST(Adversary, HooksOnlyReachScriptedAssets) {
    Json d = chain(3);
    d["attacks"] = Json::array({Json{{"attacker", "eve"}, {"kind", "fault_inject"}, {"target", "R1-R2"}},
                                Json{{"attacker", "eve"}, {"kind", "drop_messages"}, {"target", "A~R1"}}});
    adversary::AttackPlan plan(adversary::build_scripts(net::load_scenario(d)));
    EXPECT_EQ(plan.on_link_pair("R1-R2", "R1", "R2", 0.0).size(), 1u);
    EXPECT_TRUE(plan.on_link_pair("A-R1", "A", "R1", 0.0).empty());
    EXPECT_TRUE(plan.on_link_pair("R2-B", "R2", "B", 0.0).empty());
    EXPECT_EQ(plan.on_channel("R1", "A", adversary::AttackKind::DropMessages, 0.0).size(), 1u);
    EXPECT_TRUE(plan.on_channel("R1", "R2", adversary::AttackKind::DropMessages, 0.0).empty());
    // Nothing is hijacked, so no node behaviour can fire anywhere.
    for (const auto& n : {"A", "R1", "R2", "B"})
        for (const auto& e : adversary::catalog()) EXPECT_EQ(plan.node_behavior(n, e.kind, 0.0), nullptr);
}

TEST(Adversary, HooksNeverReceiveAGenerator) {
    using adversary::AttackPlan;
    static_assert(std::is_same_v<decltype(&AttackPlan::on_link_pair),
                                 std::vector<adversary::Tamper> (AttackPlan::*)(
                                     const std::string&, const std::string&, const std::string&, double) const>);
    static_assert(std::is_same_v<decltype(&AttackPlan::on_channel),
                                 std::vector<const adversary::AttackAction*> (AttackPlan::*)(
                                     const std::string&, const std::string&, adversary::AttackKind, double) const>);
    static_assert(std::is_same_v<decltype(&AttackPlan::node_behavior),
                                 const adversary::AttackAction* (AttackPlan::*)(const std::string&,
                                                                                adversary::AttackKind, double) const>);
    SUCCEED();
}

TEST(Adversary, WindowsBoundEffects) {
    Json d = chain(1);
    d["attacks"] = Json::array({Json{{"attacker", "eve"},
                                     {"kind", "eavesdrop_quantum"},
                                     {"target", "A-B"},
                                     {"window", {10.0, 20.0}}}});
    auto r = run_doc(d);
    EXPECT_EQ(r.ledger.destroyed_by_attack, 0);
    EXPECT_FALSE(r.attacks[0].first_effect_s.has_value());
}
