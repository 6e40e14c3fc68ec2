#pragma once

#include "qrsim/rng.hpp"
#include "qrsim/state/pair_store.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace qrsim::engine {

/// Success-path trajectory of symmetric pumping from Werner pairs of fidelity `base`.
struct PurifyTrajectory {
    std::vector<double> level_fidelity;  // level 0 = base
    int levels = 0;                      // levels needed to reach the target
    int rounds = 0;                      // 2^levels - 1 successful rounds
    int pairs_needed = 1;                // 2^levels raw pairs
    bool reachable = false;              // target reached within the budget
};

PurifyTrajectory purify_trajectory(double base, double target, int budget);

/// Greedy symmetric pumping as a binary counter: equal-level pairs are purified as soon as
/// two exist. Stops when a pair reaches the target or when `budget` raw pairs have been fed
/// since the last pair it produced.
class PurifyPump {
public:
    PurifyPump(double target, int budget) : target_(target), budget_(budget) {}

    /// Feeds one raw pair. Returns a pair at or above the target when one forms.
    std::optional<state::PairId> feed(state::PairStore& store, state::PairId pair, double now, Rng& rng,
                                      const std::function<void(state::PairId)>& before_round = {});

    bool exhausted() const { return fed_ >= budget_; }
    /// Removes and returns the best parked pair; every other parked pair is left for `drain`.
    std::optional<state::PairId> take_best(const state::PairStore& store);
    /// Empties the pump, returning every parked pair, and resets the budget count.
    std::vector<state::PairId> drain();

    int fed() const { return fed_; }
    int rounds() const { return rounds_; }
    int failures() const { return failures_; }
    std::size_t parked() const { return stack_.size(); }

private:
    double target_;
    int budget_;
    int fed_ = 0;
    int rounds_ = 0;
    int failures_ = 0;
    std::vector<std::pair<int, state::PairId>> stack_;  // (level, pair)
};

struct PurifyResult {
    std::optional<state::PairId> pair;  // pair meeting the target, if any
    int rounds = 0;
    int consumed = 0;  // raw pairs drawn from the supply
    bool target_met = false;
};

/// Pumps pairs from `supply` until the target is met, the budget is spent or the supply
/// runs dry. Parked leftovers are discarded.
PurifyResult purify_until(state::PairStore& store, const std::function<std::optional<state::PairId>()>& supply,
                          double f_target, int budget, double now, Rng& rng);

}  // namespace qrsim::engine
