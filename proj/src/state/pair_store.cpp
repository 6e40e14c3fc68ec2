#include "qrsim/state/pair_store.hpp"

#include "qrsim/error.hpp"
#include "qrsim/state/oracle.hpp"
#include "qrsim/state/werner.hpp"

#include <algorithm>

namespace qrsim::state {

std::string to_string(Fate fate) {
    switch (fate) {
        case Fate::ConsumedBySwap: return "consumed_by_swap";
        case Fate::ConsumedByPurify: return "consumed_by_purify";
        case Fate::Sacrificed: return "sacrificed";
        case Fate::Delivered: return "delivered";
        case Fate::Destroyed: return "destroyed";
        case Fate::Discarded: return "discarded";
    }
    return "?";
}

double PairRecord::fidelity() const {
    if (const auto* f = std::get_if<double>(&representation)) return *f;
    return std::get<TwoQubitState>(representation).fidelity();
}

TwoQubitState PairRecord::exact() const {
    if (const auto* f = std::get_if<double>(&representation)) return make_werner(*f);
    return std::get<TwoQubitState>(representation);
}

Side PairRecord::side_of(const std::string& node) const {
    if (endpoint_a == node) return Side::A;
    if (endpoint_b == node) return Side::B;
    throw ProtocolError("node " + node + " holds no half of pair " + std::to_string(id));
}

void PairRecord::tag_leak(const std::string& attacker) {
    if (!leaked_to(attacker)) leak_tags.push_back(attacker);
}

bool PairRecord::leaked_to(const std::string& attacker) const {
    return std::find(leak_tags.begin(), leak_tags.end(), attacker) != leak_tags.end();
}

TwoQubitState swap_sides(const TwoQubitState& s) {
    static const int perm[4] = {0, 2, 1, 3};
    Matrix4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out(perm[r], perm[c]) = s.matrix()(r, c);
    return TwoQubitState::unchecked(out);
}

TwoQubitState oriented(const PairRecord& rec, const std::string& node, Side want) {
    const TwoQubitState s = rec.exact();
    return rec.side_of(node) == want ? s : swap_sides(s);
}

PairId PairStore::insert(PairRecord rec) {
    if (rec.endpoint_a == rec.endpoint_b)
        throw ProtocolError("pair endpoints must differ (" + rec.endpoint_a + ")");
    rec.id = next_id_++;
    const PairId id = rec.id;
    records_.emplace(id, std::move(rec));
    return id;
}

PairId PairStore::create_werner(const std::string& a, const std::string& b, double fidelity,
                                double now) {
    check_fidelity(fidelity);
    PairRecord rec;
    rec.endpoint_a = a;
    rec.endpoint_b = b;
    rec.created_at = rec.updated_at = now;
    rec.representation = std::clamp(fidelity, kMinFidelity, 1.0);
    return insert(std::move(rec));
}

PairId PairStore::create_exact(const std::string& a, const std::string& b, const TwoQubitState& s,
                               double now) {
    PairRecord rec;
    rec.endpoint_a = a;
    rec.endpoint_b = b;
    rec.created_at = rec.updated_at = now;
    rec.representation = s;
    return insert(std::move(rec));
}

const PairRecord& PairStore::history(PairId id) const {
    auto it = records_.find(id);
    if (it == records_.end()) throw ConsumedPairError("unknown pair " + std::to_string(id));
    return it->second;
}

const PairRecord& PairStore::get(PairId id) const {
    const PairRecord& rec = history(id);
    if (rec.fate) throw ConsumedPairError("pair " + std::to_string(id) + " already consumed");
    return rec;
}

PairRecord& PairStore::get_mut(PairId id) { return const_cast<PairRecord&>(get(id)); }

bool PairStore::is_live(PairId id) const {
    auto it = records_.find(id);
    return it != records_.end() && !it->second.fate;
}

void PairStore::promote(PairId id) {
    PairRecord& rec = get_mut(id);
    if (!rec.is_exact()) rec.representation = rec.exact();
}

void PairStore::set_state(PairId id, const TwoQubitState& s) { get_mut(id).representation = s; }

void PairStore::apply_channel(PairId id, const PauliChannel& ch, Side side) {
    if (ch.is_identity()) return;
    PairRecord& rec = get_mut(id);
    rec.representation = ch.apply(rec.exact(), side);
}

void PairStore::apply_local(PairId id, Side side, const Matrix2& u) {
    PairRecord& rec = get_mut(id);
    rec.representation = rec.exact().apply_local(side, u);
}

void PairStore::age(PairId id, double now, double tau_s) {
    PairRecord& rec = get_mut(id);
    const double dt = now - rec.updated_at;
    rec.updated_at = std::max(rec.updated_at, now);
    if (tau_s <= 0.0 || dt <= 0.0) return;
    if (auto* f = std::get_if<double>(&rec.representation)) {
        *f = decay_fidelity(*f, dt, tau_s);
    } else {
        const double lambda = std::exp(-dt / tau_s);
        const Matrix4 m = lambda * rec.exact().matrix() + (1.0 - lambda) * Matrix4::Identity() / 4.0;
        rec.representation = TwoQubitState::unchecked(m);
    }
}

PairRecord PairStore::consume(PairId id, Fate fate) {
    PairRecord& rec = get_mut(id);
    rec.fate = fate;
    rec.half_consumed[0] = rec.half_consumed[1] = true;
    rec.half_fate[0] = rec.half_fate[1] = fate;
    return rec;
}

void PairStore::consume_half(PairId id, Side side, Fate fate) {
    PairRecord& rec = get_mut(id);
    const int i = static_cast<int>(side);
    if (rec.half_consumed[i])
        throw ConsumedPairError("half of pair " + std::to_string(id) + " already consumed");
    rec.half_consumed[i] = true;
    rec.half_fate[i] = fate;
    if (!rec.half_consumed[1 - i]) return;
    static const Fate order[] = {Fate::Sacrificed, Fate::Delivered, Fate::Destroyed, Fate::Discarded,
                                 Fate::ConsumedBySwap, Fate::ConsumedByPurify};
    for (Fate f : order)
        if (rec.half_fate[0] == f || rec.half_fate[1] == f) {
            rec.fate = f;
            return;
        }
}

SwapOutput PairStore::swap(PairId left, PairId right, const std::string& node, double now,
                           Rng& rng) {
    const PairRecord& l = get(left);
    const PairRecord& r = get(right);
    const std::string x = l.endpoint(other(l.side_of(node)));
    const std::string y = r.endpoint(other(r.side_of(node)));
    if (l.half_consumed[0] || l.half_consumed[1] || r.half_consumed[0] || r.half_consumed[1])
        throw ProtocolError("cannot swap a partially consumed pair");

    PairRecord out;
    out.endpoint_a = x;
    out.endpoint_b = y;
    out.created_at = out.updated_at = now;
    for (const auto& t : l.leak_tags) out.tag_leak(t);
    for (const auto& t : r.leak_tags) out.tag_leak(t);

    BellIndex outcome;
    if (!l.is_exact() && !r.is_exact()) {
        outcome = kAllBellIndices[rng() >> 62];
        out.representation = swap_werner(std::get<double>(l.representation),
                                         std::get<double>(r.representation));
    } else {
        const TwoQubitState s1 = oriented(l, node, Side::B);
        const TwoQubitState s2 = oriented(r, node, Side::A);
        double probs[4];
        for (int k = 0; k < 4; ++k) {
            try {
                probs[k] = oracle_swap(s1, s2, kAllBellIndices[k]).probability;
            } catch (const ImpossibleBranch&) {
                probs[k] = 0.0;
            }
        }
        double u = uniform01(rng) * (probs[0] + probs[1] + probs[2] + probs[3]);
        int pick = 3;
        for (int k = 0; k < 4; ++k) {
            if (u < probs[k] && probs[k] > 0.0) {
                pick = k;
                break;
            }
            u -= probs[k];
        }
        while (probs[pick] <= 0.0) --pick;
        outcome = kAllBellIndices[pick];
        out.representation = oracle_swap(s1, s2, outcome).state;
    }
    consume(left, Fate::ConsumedBySwap);
    consume(right, Fate::ConsumedBySwap);
    return {insert(std::move(out)), outcome};
}

std::optional<PairId> PairStore::purify(PairId source, PairId target, double now, Rng& rng) {
    const PairRecord& s = get(source);
    const PairRecord& t = get(target);
    const bool same = (s.endpoint_a == t.endpoint_a && s.endpoint_b == t.endpoint_b) ||
                      (s.endpoint_a == t.endpoint_b && s.endpoint_b == t.endpoint_a);
    if (!same) throw ProtocolError("purification requires pairs between the same nodes");

    PairRecord out;
    out.endpoint_a = s.endpoint_a;
    out.endpoint_b = s.endpoint_b;
    out.created_at = out.updated_at = now;
    for (const auto& x : s.leak_tags) out.tag_leak(x);
    for (const auto& x : t.leak_tags) out.tag_leak(x);

    bool success;
    if (!s.is_exact() && !t.is_exact()) {
        const auto r = ::qrsim::state::purify(std::get<double>(s.representation),
                                              std::get<double>(t.representation), rng);
        success = r.success;
        out.representation = r.f_out;
    } else {
        const TwoQubitState ts = oriented(t, s.endpoint_a, Side::A);
        try {
            const auto r = oracle_purify(s.exact(), ts);
            success = bernoulli(rng, r.p_success);
            out.representation = r.post_state;
        } catch (const ImpossibleBranch&) {
            success = false;
        }
    }
    consume(source, Fate::ConsumedByPurify);
    consume(target, Fate::ConsumedByPurify);
    if (!success) return std::nullopt;
    return insert(std::move(out));
}

std::vector<PairId> PairStore::live_ids() const {
    std::vector<PairId> out;
    for (const auto& [id, rec] : records_)
        if (!rec.fate) out.push_back(id);
    return out;
}

std::map<Fate, std::size_t> PairStore::fate_counts() const {
    std::map<Fate, std::size_t> out;
    for (const auto& [id, rec] : records_)
        if (rec.fate) ++out[*rec.fate];
    return out;
}

}  // namespace qrsim::state
