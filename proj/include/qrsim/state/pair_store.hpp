#pragma once

#include "qrsim/rng.hpp"
#include "qrsim/state/channels.hpp"
#include "qrsim/state/two_qubit.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qrsim::state {

using PairId = std::uint64_t;

/// Terminal disposition of a pair record. Every record ends in exactly one.
enum class Fate {
    ConsumedBySwap,
    ConsumedByPurify,
    Sacrificed,
    Delivered,
    Destroyed,
    Discarded,
};

inline constexpr int kFateCount = 6;

std::string to_string(Fate fate);

/// One shared bipartite entangled resource.
struct PairRecord {
    PairId id = 0;
    std::string endpoint_a;
    std::string endpoint_b;
    double created_at = 0.0;
    double updated_at = 0.0;
    /// Werner fidelity (fast path) or the exact density operator.
    std::variant<double, TwoQubitState> representation = 1.0;
    /// Attackers holding correlated information about this pair.
    std::vector<std::string> leak_tags;

    std::optional<Fate> fate;
    bool half_consumed[2] = {false, false};
    std::optional<Fate> half_fate[2];

    bool is_exact() const { return std::holds_alternative<TwoQubitState>(representation); }
    double fidelity() const;
    /// Exact state (Werner records are expanded on demand).
    TwoQubitState exact() const;
    const std::string& endpoint(Side s) const { return s == Side::A ? endpoint_a : endpoint_b; }
    /// Side held by `node`; throws ProtocolError if the node holds neither.
    Side side_of(const std::string& node) const;
    void tag_leak(const std::string& attacker);
    bool leaked_to(const std::string& attacker) const;
};

struct SwapOutput {
    PairId pair;
    BellIndex outcome;
};

/// Owns every pair record of a run and enforces single ownership: a consumed
/// identifier can never be dereferenced again.
class PairStore {
public:
    PairId create_werner(const std::string& a, const std::string& b, double fidelity, double now);
    PairId create_exact(const std::string& a, const std::string& b, const TwoQubitState& s,
                        double now);

    /// Live record; throws ConsumedPairError if consumed or unknown.
    const PairRecord& get(PairId id) const;
    PairRecord& get_mut(PairId id);
    bool is_live(PairId id) const;
    /// Record including consumed ones (audit access).
    const PairRecord& history(PairId id) const;

    void promote(PairId id);
    void set_state(PairId id, const TwoQubitState& s);
    void apply_channel(PairId id, const PauliChannel& ch, Side side);
    void apply_local(PairId id, Side side, const Matrix2& u);
    /// Exponential relaxation toward I/4 since the last update.
    void age(PairId id, double now, double tau_s);

    /// Consumes both halves with the same fate.
    PairRecord consume(PairId id, Fate fate);
    /// Consumes one half. The record's fate is resolved when the second half
    /// is consumed: Sacrificed > Delivered > Destroyed > Discarded.
    void consume_half(PairId id, Side side, Fate fate);

    /// Bell-state measurement at `node`, which must hold one half of each
    /// input. Werner inputs use the closed form; otherwise the exact oracle
    /// with a sampled outcome.
    SwapOutput swap(PairId left, PairId right, const std::string& node, double now, Rng& rng);

    /// One recurrence round. Returns the surviving record on success; both
    /// inputs are consumed either way.
    std::optional<PairId> purify(PairId source, PairId target, double now, Rng& rng);

    /// Records never assigned a fate.
    std::vector<PairId> live_ids() const;
    std::size_t created() const { return records_.size(); }
    std::map<Fate, std::size_t> fate_counts() const;

private:
    PairId insert(PairRecord rec);
    std::map<PairId, PairRecord> records_;
    PairId next_id_ = 1;
};

/// Orientation helper: state with `node`'s half on side `want`.
TwoQubitState oriented(const PairRecord& rec, const std::string& node, Side want);

/// Exchanges the two sides of a two-qubit state.
TwoQubitState swap_sides(const TwoQubitState& s);

}  // namespace qrsim::state
