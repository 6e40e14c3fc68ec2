#include "qrsim/error.hpp"
#include "qrsim/state/channels.hpp"
#include "qrsim/state/measurement.hpp"
#include "qrsim/state/oracle.hpp"
#include "qrsim/state/pair_store.hpp"
#include "qrsim/state/teleport.hpp"
#include "qrsim/state/werner.hpp"

#include "../support/dense_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qrsim;
using namespace qrsim::state;
namespace dense = qrsim::testing;

namespace {

std::vector<double> fidelity_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 15; ++i) g.push_back(0.25 + 0.05 * i);
    return g;
}

TwoQubitState random_state(Rng& rng) {
    Matrix4 g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    Matrix4 rho = g * g.adjoint();
    rho /= rho.trace().real();
    return TwoQubitState(rho);
}

dense::Mat to_dense(const TwoQubitState& s) { return s.matrix(); }

// Brute-force swap: project inner qubits of kron(s1, s2) onto a Bell state,
// trace them out and correct the last qubit.
std::pair<double, dense::Mat> brute_swap(const dense::Mat& s1, const dense::Mat& s2, int phase,
                                         int flip) {
    const dense::Mat rho = dense::kron(s1, s2);
    const dense::Mat proj = dense::kron(dense::kron(dense::Mat::Identity(2, 2),
                                                    dense::projector(dense::bell(phase, flip))),
                                        dense::Mat::Identity(2, 2));
    dense::Mat post = proj * rho * proj;
    const double p = post.trace().real();
    dense::Mat outer = dense::partial_trace_keep(post, {0, 3}, 4) / p;
    dense::Mat fix = dense::Mat::Identity(2, 2);
    if (flip) fix = dense::pauli('X') * fix;
    if (phase) fix = fix * dense::pauli('Z');
    const dense::Mat u = dense::kron(dense::Mat::Identity(2, 2), fix);
    return {p, u * outer * u.adjoint()};
}

std::pair<double, dense::Mat> brute_purify(const dense::Mat& s1, const dense::Mat& s2) {
    const dense::Mat rho = dense::kron(s1, s2);  // (a1, b1, a2, b2)
    const dense::Mat u = dense::cnot(1, 3, 4) * dense::cnot(0, 2, 4);
    const dense::Mat after = u * rho * u.adjoint();
    dense::Mat kept = dense::Mat::Zero(16, 16);
    for (int m = 0; m < 2; ++m) {
        dense::Vec e = dense::Vec::Zero(2);
        e(m) = 1.0;
        const dense::Mat pm = dense::projector(e);
        const dense::Mat proj = dense::kron(dense::identity(2), dense::kron(pm, pm));
        kept += proj * after * proj;
    }
    const double p = kept.trace().real();
    return {p, dense::partial_trace_keep(kept, {0, 1}, 4) / p};
}

}  // namespace

TEST(Werner, EndpointsOfTheFidelityRange) {
    const auto pure = make_werner(1.0);
    EXPECT_NEAR((pure.matrix() - TwoQubitState::bell().matrix()).norm(), 0.0, 1e-15);
    const auto mixed = make_werner(0.25);
    EXPECT_NEAR((mixed.matrix() - Matrix4::Identity() / 4.0).norm(), 0.0, 1e-15);
}

TEST(Werner, WeightAndOracleFidelity) {
    EXPECT_NEAR(werner_weight(0.85), 0.8, 1e-15);
    EXPECT_NEAR(dense::fidelity_phi_plus(to_dense(make_werner(0.85))), 0.85, 1e-12);
}

TEST(Werner, RejectsOutOfRangeFidelity) {
    EXPECT_THROW(make_werner(0.2), DomainError);
    EXPECT_THROW(make_werner(1.01), DomainError);
    EXPECT_THROW(swap_werner(0.9, -1.0), DomainError);
    EXPECT_THROW(purify_odds(1.5, 0.9), DomainError);
}

TEST(Swap, ClosedFormExamples) {
    EXPECT_DOUBLE_EQ(swap_werner(1.0, 1.0), 1.0);
    for (double f : fidelity_grid()) EXPECT_NEAR(swap_werner(1.0, f), f, 1e-15);
    EXPECT_NEAR(swap_werner(0.9, 0.9), 0.81 + 0.01 / 3.0, 1e-15);
}

TEST(Swap, OracleBranchesOnPerfectPairs) {
    const auto phi = TwoQubitState::bell();
    for (BellIndex k : kAllBellIndices) {
        const auto out = oracle_swap(phi, phi, k);
        EXPECT_NEAR(out.probability, 0.25, 1e-12);
        EXPECT_NEAR(out.state.fidelity(), 1.0, 1e-12) << static_cast<int>(k);
    }
}

TEST(Swap, NoiseDestroysEntanglement) {
    const auto out = oracle_swap_average(TwoQubitState::bell(), TwoQubitState::maximally_mixed());
    EXPECT_NEAR(out.fidelity(), 0.25, 1e-12);
}

TEST(Swap, ImpossibleBranchIsSignalled) {
    Matrix4 zero_zero = Matrix4::Zero();
    zero_zero(0, 0) = 1.0;
    const TwoQubitState s(zero_zero);
    // |00>|00>: the inner qubits are |00>, orthogonal to Psi+.
    EXPECT_THROW(oracle_swap(s, s, BellIndex::PsiPlus), ImpossibleBranch);
}

TEST(Swap, OracleMatchesBruteForceOnRandomStates) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s1 = random_state(rng);
        const auto s2 = random_state(rng);
        for (int k = 0; k < 4; ++k) {
            const int phase = k >> 1, flip = k & 1;
            const auto [p, expected] = brute_swap(to_dense(s1), to_dense(s2), phase, flip);
            const auto got = oracle_swap(s1, s2, kAllBellIndices[k]);
            EXPECT_NEAR(got.probability, p, 1e-12);
            EXPECT_LT((dense::Mat(got.state.matrix()) - expected).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

// Oracle equivalence across the full 0.05 grid (acceptance criterion on the
// fast path).
TEST(Swap, WernerClosedFormAgreesWithOracleOnGrid) {
    for (double f1 : fidelity_grid())
        for (double f2 : fidelity_grid()) {
            const auto avg = oracle_swap_average(make_werner(f1), make_werner(f2));
            EXPECT_NEAR(avg.fidelity(), swap_werner(f1, f2), 1e-12) << f1 << "," << f2;
        }
}

TEST(Swap, MonotoneDegradation) {
    for (double f1 : fidelity_grid())
        for (double f2 : fidelity_grid())
            EXPECT_LE(swap_werner(f1, f2), std::min(f1, f2) + 1e-12);
}

TEST(Purify, Examples) {
    const auto perfect = purify_odds(1.0, 1.0);
    EXPECT_DOUBLE_EQ(perfect.p_success, 1.0);
    EXPECT_DOUBLE_EQ(perfect.f_out, 1.0);
    EXPECT_NEAR(purify_odds(0.5, 0.5).f_out, 0.5, 1e-15);
    // Frozen from the brute-force oracle below: 145/173.
    EXPECT_NEAR(purify_odds(0.8, 0.8).f_out, 145.0 / 173.0, 1e-12);
    EXPECT_GT(purify_odds(0.8, 0.8).f_out, 0.8);
}

TEST(Purify, FrozenValueMatchesBruteForce) {
    const auto [p, post] = brute_purify(dense::werner(0.8), dense::werner(0.8));
    EXPECT_NEAR(dense::fidelity_phi_plus(post), 145.0 / 173.0, 1e-12);
    EXPECT_NEAR(p, 6.92 / 9.0, 1e-12);
}

TEST(Purify, OracleOnPerfectAndMixedInputs) {
    const auto pp = oracle_purify(TwoQubitState::bell(), TwoQubitState::bell());
    EXPECT_NEAR(pp.p_success, 1.0, 1e-12);
    EXPECT_NEAR(pp.post_state.fidelity(), 1.0, 1e-12);

    const auto mm = oracle_purify(TwoQubitState::maximally_mixed(), TwoQubitState::maximally_mixed());
    EXPECT_NEAR(mm.p_success, 0.5, 1e-12);
    EXPECT_NEAR(mm.post_state.fidelity(), 0.25, 1e-12);
}

TEST(Purify, OracleMatchesBruteForceOnRandomStates) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s1 = random_state(rng);
        const auto s2 = random_state(rng);
        const auto [p, expected] = brute_purify(to_dense(s1), to_dense(s2));
        const auto got = oracle_purify(s1, s2);
        EXPECT_NEAR(got.p_success, p, 1e-12);
        EXPECT_LT((dense::Mat(got.post_state.matrix()) - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Purify, ClosedFormAgreesWithOracleOnGrid) {
    for (double f1 : fidelity_grid())
        for (double f2 : fidelity_grid()) {
            const auto odds = purify_odds(f1, f2);
            const auto exact = oracle_purify(make_werner(f1), make_werner(f2));
            EXPECT_NEAR(odds.p_success, exact.p_success, 1e-12);
            EXPECT_NEAR(odds.f_out, exact.post_state.fidelity(), 1e-12) << f1 << "," << f2;
        }
}

TEST(Purify, GainAboveOneHalf) {
    for (double f = 0.51; f < 1.0; f += 0.01) EXPECT_GT(purify_odds(f, f).f_out, f) << f;
}

TEST(Purify, SampledOutcomeFollowsOdds) {
    Rng rng(3);
    int wins = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) wins += purify(0.8, 0.8, rng).success;
    const double p = purify_odds(0.8, 0.8).p_success;
    EXPECT_NEAR(wins / double(n), p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(Measurement, PerfectPairAgreesInZ) {
    Rng rng(1);
    const auto phi = TwoQubitState::bell();
    for (int i = 0; i < 200; ++i) {
        const auto [a, b] = measure_pair(phi, MeasurementBasis::z(), MeasurementBasis::z(), rng);
        EXPECT_EQ(a, b);
    }
}

TEST(Measurement, MixedStateIsUniform) {
    const auto p = joint_distribution(TwoQubitState::maximally_mixed(), MeasurementBasis::z(),
                                      MeasurementBasis::x());
    for (auto& row : p)
        for (double x : row) EXPECT_NEAR(x, 0.25, 1e-15);
    Rng rng(2);
    int counts[2][2] = {};
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        auto [a, b] = measure_pair(TwoQubitState::maximally_mixed(), MeasurementBasis::z(),
                                   MeasurementBasis::z(), rng);
        ++counts[a][b];
    }
    for (auto& row : counts)
        for (int c : row) EXPECT_NEAR(c / double(n), 0.25, 0.01);
}

TEST(Measurement, WernerDisagreementIsHalfTheNoiseWeight) {
    const auto p = joint_distribution(make_werner(0.85), MeasurementBasis::z(), MeasurementBasis::z());
    EXPECT_NEAR(p[0][1] + p[1][0], 0.1, 1e-12);
}

TEST(Measurement, HalfMeasurementReproducesJointStatistics) {
    Rng rng(9);
    const auto w = make_werner(0.85);
    int disagree = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const auto first = measure_half(w, Side::A, MeasurementBasis::x(), rng);
        const auto second = measure_half(first.collapsed, Side::B, MeasurementBasis::x(), rng);
        disagree += first.bit != second.bit;
    }
    EXPECT_NEAR(disagree / double(n), 0.1, 0.006);
}

TEST(Chsh, PerfectAndMixed) {
    EXPECT_NEAR(chsh_expectation(TwoQubitState::bell()), 2 * std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(chsh_expectation(TwoQubitState::maximally_mixed()), 0.0, 1e-15);
}

TEST(Chsh, LinearInWernerWeight) {
    for (double f : fidelity_grid())
        EXPECT_NEAR(chsh_expectation(make_werner(f)), 2 * std::numbers::sqrt2 * (4 * f - 1) / 3, 1e-9);
    EXPECT_EQ(chsh_expectation(make_werner(0.25)), 0.0);
}

TEST(Chsh, ViolationThreshold) {
    EXPECT_NEAR(chsh_expectation(make_werner(kChshViolationFidelity)), 2.0, 1e-12);
    EXPECT_GT(chsh_expectation(make_werner(kChshViolationFidelity + 1e-6)), 2.0);
    EXPECT_LT(chsh_expectation(make_werner(kChshViolationFidelity - 1e-6)), 2.0);
}

TEST(Channels, InterceptResendGivesQuarterQber) {
    const auto phi = TwoQubitState::bell();
    // Independent route: average the four (attacker basis, outcome) branches.
    dense::Mat avg = dense::Mat::Zero(4, 4);
    for (char basis : {'Z', 'X'})
        for (int bit = 0; bit < 2; ++bit) {
            dense::Vec e(2);
            if (basis == 'Z')
                e << (bit == 0 ? 1.0 : 0.0), (bit == 0 ? 0.0 : 1.0);
            else
                e << 1.0 / std::sqrt(2.0), (bit == 0 ? 1.0 : -1.0) / std::sqrt(2.0);
            const dense::Mat proj = dense::kron(dense::identity(1), dense::projector(e));
            avg += 0.5 * proj * dense::Mat(phi.matrix()) * proj;
        }
    const auto got = apply_attack_channel(phi, {ChannelKind::InterceptResendRandomBasis});
    EXPECT_LT((dense::Mat(got.matrix()) - avg).cwiseAbs().maxCoeff(), 1e-12);

    const auto pz = joint_distribution(got, MeasurementBasis::z(), MeasurementBasis::z());
    const auto px = joint_distribution(got, MeasurementBasis::x(), MeasurementBasis::x());
    const double qz = pz[0][1] + pz[1][0];
    const double qx = px[0][1] + px[1][0];
    EXPECT_NEAR((qz + qx) / 2, 0.25, 1e-12);
}

TEST(Channels, ZeroStrengthIsIdentity) {
    Rng rng(4);
    const auto s = random_state(rng);
    const auto out = apply_attack_channel(s, {ChannelKind::Depolarize, 0.0});
    EXPECT_LT((out.matrix() - s.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Channels, FullDephasingHalvesFidelity) {
    const auto out = apply_attack_channel(TwoQubitState::bell(), {ChannelKind::Dephase, 1.0});
    EXPECT_NEAR(out.fidelity(), 0.5, 1e-12);
    const auto probe = apply_attack_channel(TwoQubitState::bell(), {ChannelKind::EntanglingProbe, 1.0});
    EXPECT_NEAR(probe.fidelity(), 0.5, 1e-12);
}

TEST(Channels, UnknownKindAndBadStrength) {
    EXPECT_THROW(channel_kind_from_string("laser_blind"), ConfigError);
    EXPECT_THROW(apply_attack_channel(TwoQubitState::bell(), {ChannelKind::Dephase, 1.5}), DomainError);
}

TEST(Channels, PauliCompositionMatchesSequentialApplication) {
    Rng rng(8);
    const auto s = random_state(rng);
    const auto a = PauliChannel::measure_resend(BasisLabel::X);
    const auto b = PauliChannel::depolarize(0.3);
    const auto seq = b.apply(a.apply(s, Side::B), Side::B);
    const auto composed = a.compose(b).apply(s, Side::B);
    EXPECT_LT((seq.matrix() - composed.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Invariants, EveryOperationReturnsValidStates) {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s1 = random_state(rng);
        const auto s2 = random_state(rng);
        EXPECT_TRUE(oracle_swap_average(s1, s2).is_valid());
        EXPECT_TRUE(oracle_purify(s1, s2).post_state.is_valid());
        EXPECT_TRUE(apply_attack_channel(s1, {ChannelKind::InterceptResendRandomBasis}).is_valid());
        EXPECT_TRUE(apply_attack_channel(s1, {ChannelKind::Depolarize, uniform01(rng), Side::A}).is_valid());
        EXPECT_TRUE(measure_half(s1, Side::A, MeasurementBasis::x(), rng).collapsed.is_valid());
    }
    for (double f : fidelity_grid()) EXPECT_TRUE(make_werner(f).is_valid());
}

TEST(PairStore, ConsumedIdentifiersAreHardErrors) {
    PairStore store;
    Rng rng(1);
    const PairId ab = store.create_werner("a", "r", 0.95, 0.0);
    const PairId bc = store.create_werner("r", "c", 0.95, 0.0);
    const auto out = store.swap(ab, bc, "r", 1.0, rng);
    EXPECT_THROW(store.get(ab), ConsumedPairError);
    EXPECT_THROW(store.get(bc), ConsumedPairError);
    EXPECT_THROW(store.swap(ab, bc, "r", 1.0, rng), ConsumedPairError);
    const auto& rec = store.get(out.pair);
    EXPECT_EQ(rec.endpoint_a, "a");
    EXPECT_EQ(rec.endpoint_b, "c");
    EXPECT_NEAR(rec.fidelity(), swap_werner(0.95, 0.95), 1e-15);
    store.consume(out.pair, Fate::Delivered);
    EXPECT_THROW(store.consume(out.pair, Fate::Delivered), ConsumedPairError);
    EXPECT_EQ(store.fate_counts().at(Fate::ConsumedBySwap), 2u);
}

TEST(PairStore, RejectsSelfPairs) {
    PairStore store;
    EXPECT_THROW(store.create_werner("a", "a", 1.0, 0.0), ProtocolError);
}

TEST(PairStore, ExactSwapMatchesWernerPath) {
    PairStore store;
    Rng rng(2);
    const PairId l = store.create_werner("a", "r", 0.9, 0.0);
    const PairId r = store.create_werner("c", "r", 0.9, 0.0);  // reversed orientation
    store.promote(r);
    const auto out = store.swap(l, r, "r", 0.0, rng);
    EXPECT_NEAR(store.get(out.pair).fidelity(), swap_werner(0.9, 0.9), 1e-12);
    EXPECT_TRUE(store.get(out.pair).is_exact());
}

TEST(PairStore, HalfConsumptionResolvesFate) {
    PairStore store;
    const PairId p = store.create_werner("a", "b", 1.0, 0.0);
    store.consume_half(p, Side::A, Fate::Delivered);
    EXPECT_TRUE(store.is_live(p));
    store.consume_half(p, Side::B, Fate::Sacrificed);
    EXPECT_FALSE(store.is_live(p));
    EXPECT_EQ(*store.history(p).fate, Fate::Sacrificed);
}

namespace {
Matrix2 payload_state() {
    Eigen::Vector2cd psi;
    psi << std::cos(0.3), Complex(std::cos(1.1), std::sin(1.1)) * std::sin(0.3);
    return psi * psi.adjoint();
}
}  // namespace

TEST(Teleport, LegitimateReceiverGetsPayload) {
    PairStore store;
    Rng rng(7);
    const PairId p = store.create_werner("s", "r", 1.0, 0.0);
    const auto res = teleport(store, p, "s", payload_state(), {"r", std::nullopt}, true, rng);
    EXPECT_TRUE(res.payload_delivered);
    EXPECT_FALSE(res.confidentiality_breach);
    EXPECT_NEAR(res.payload_fidelity, 1.0, 1e-12);
    EXPECT_THROW(store.get(p), ConsumedPairError);
}

TEST(Teleport, AllOutcomesAreCorrected) {
    Rng rng(17);
    for (int i = 0; i < 64; ++i) {
        PairStore store;
        const PairId p = store.create_werner("s", "r", 1.0, 0.0);
        const auto res = teleport(store, p, "s", payload_state(), {"r", std::nullopt}, true, rng);
        EXPECT_NEAR(res.payload_fidelity, 1.0, 1e-12) << static_cast<int>(res.outcome);
    }
}

TEST(Teleport, StolenHalfWithBitsLeaks) {
    PairStore store;
    Rng rng(7);
    const PairId p = store.create_werner("s", "r", 1.0, 0.0);
    const auto res = teleport(store, p, "s", payload_state(), {"r", "eve"}, true, rng);
    EXPECT_TRUE(res.confidentiality_breach);
    EXPECT_NEAR(res.payload_fidelity, 1.0, 1e-12);
    EXPECT_TRUE(store.history(p).leaked_to("eve"));
}

TEST(Teleport, StolenHalfWithoutBitsIsMaximallyMixed) {
    PairStore store;
    Rng rng(7);
    const PairId p = store.create_werner("s", "r", 1.0, 0.0);
    const auto res = teleport(store, p, "s", payload_state(), {"r", "eve"}, false, rng);
    EXPECT_FALSE(res.confidentiality_breach);
    EXPECT_TRUE(res.integrity_loss);
    EXPECT_LT((res.holder_state - Matrix2::Identity() / 2.0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_FALSE(store.history(p).leaked_to("eve"));

    // Independent trace-out over the full three-qubit register.
    const dense::Mat reg = dense::kron(dense::Mat(payload_state()), dense::projector(dense::bell(0, 0)));
    const dense::Mat far = dense::partial_trace_keep(reg, {2}, 3);
    EXPECT_LT((far - dense::Mat::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Teleport, MissingChannelIsProtocolError) {
    PairStore store;
    Rng rng(1);
    EXPECT_THROW(teleport(store, 42, "s", payload_state(), {"r", std::nullopt}, true, rng),
                 ProtocolError);
}
