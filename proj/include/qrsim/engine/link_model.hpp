#pragma once

#include "qrsim/network/topology.hpp"
#include "qrsim/rng.hpp"
#include "qrsim/state/pair_store.hpp"

#include <optional>

namespace qrsim::engine {

/// Fiber transmittance 10^(-alpha L / 10).
double transmittance(double attenuation_db_per_km, double length_km);

/// Per-attempt heralded success probability of a link.
/// MemoryToMemory: eta(L); MemoriesAndBSA: eta(L/2)^2 * cap; MemoriesAndEPPS: eta(L/2)^2.
double attempt_probability(const net::LinkSpec& link);

/// One physical attempt. On success a base-fidelity pair between the link ends is created.
std::optional<state::PairId> attempt_link(state::PairStore& store, const net::LinkSpec& link, double now, Rng& rng);

/// Number of attempts up to and including the first success (geometric, support 1, 2, ...).
long attempts_until_success(double p, Rng& rng);

}  // namespace qrsim::engine
