#include "qrsim/engine/purification.hpp"

#include "qrsim/state/werner.hpp"

#include <algorithm>

namespace qrsim::engine {

PurifyTrajectory purify_trajectory(double base, double target, int budget) {
    PurifyTrajectory t;
    t.level_fidelity.push_back(base);
    double f = base;
    while (f < target) {
        const double next = state::purify_odds(f, f).f_out;
        if (next <= f + 1e-15) return t;
        if ((1 << (t.levels + 1)) > budget) return t;
        f = next;
        ++t.levels;
        t.level_fidelity.push_back(f);
    }
    t.reachable = true;
    t.pairs_needed = 1 << t.levels;
    t.rounds = t.pairs_needed - 1;
    return t;
}

std::optional<state::PairId> PurifyPump::feed(state::PairStore& store, state::PairId pair, double now, Rng& rng,
                                              const std::function<void(state::PairId)>& before_round) {
    ++fed_;
    if (store.get(pair).fidelity() >= target_) {
        fed_ = 0;
        return pair;
    }
    stack_.emplace_back(0, pair);
    while (stack_.size() >= 2 && stack_[stack_.size() - 1].first == stack_[stack_.size() - 2].first) {
        const auto [level, top] = stack_.back();
        stack_.pop_back();
        const auto below = stack_.back().second;
        stack_.pop_back();
        if (before_round) {
            before_round(top);
            before_round(below);
        }
        ++rounds_;
        auto out = store.purify(top, below, now, rng);
        if (!out) {
            ++failures_;
            continue;
        }
        if (store.get(*out).fidelity() >= target_) {
            fed_ = 0;
            return out;
        }
        stack_.emplace_back(level + 1, *out);
    }
    return std::nullopt;
}

std::optional<state::PairId> PurifyPump::take_best(const state::PairStore& store) {
    if (stack_.empty()) return std::nullopt;
    auto best = std::max_element(stack_.begin(), stack_.end(), [&](const auto& x, const auto& y) {
        return store.get(x.second).fidelity() < store.get(y.second).fidelity();
    });
    const auto id = best->second;
    stack_.erase(best);
    return id;
}

std::vector<state::PairId> PurifyPump::drain() {
    std::vector<state::PairId> out;
    for (const auto& [_, id] : stack_) out.push_back(id);
    stack_.clear();
    fed_ = 0;
    return out;
}

PurifyResult purify_until(state::PairStore& store, const std::function<std::optional<state::PairId>()>& supply,
                          double f_target, int budget, double now, Rng& rng) {
    PurifyResult r;
    PurifyPump pump(f_target, budget);
    while (!pump.exhausted()) {
        auto raw = supply();
        if (!raw) break;
        ++r.consumed;
        if (auto done = pump.feed(store, *raw, now, rng)) {
            r.pair = done;
            r.target_met = true;
            break;
        }
    }
    r.rounds = pump.rounds();
    for (auto id : pump.drain()) store.consume(id, state::Fate::Discarded);
    return r;
}

}  // namespace qrsim::engine
