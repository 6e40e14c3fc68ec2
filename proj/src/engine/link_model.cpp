#include "qrsim/engine/link_model.hpp"

#include "qrsim/error.hpp"

#include <cmath>
#include <limits>

namespace qrsim::engine {

double transmittance(double attenuation_db_per_km, double length_km) {
    return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

double attempt_probability(const net::LinkSpec& link) {
    switch (link.architecture) {
        case net::Architecture::MemoryToMemory:
            return transmittance(link.attenuation_db_per_km, link.length_km);
        case net::Architecture::MemoriesAndBSA: {
            const double half = transmittance(link.attenuation_db_per_km, link.length_km / 2.0);
            return half * half * link.bsa_success_cap;
        }
        case net::Architecture::MemoriesAndEPPS: {
            const double half = transmittance(link.attenuation_db_per_km, link.length_km / 2.0);
            return half * half;
        }
    }
    throw ConfigError("unknown link architecture");
}

std::optional<state::PairId> attempt_link(state::PairStore& store, const net::LinkSpec& link, double now, Rng& rng) {
    if (!bernoulli(rng, attempt_probability(link))) return std::nullopt;
    return store.create_werner(link.a, link.b, link.base_fidelity, now);
}

long attempts_until_success(double p, Rng& rng) {
    if (!(p > 0.0)) throw DomainError("link success probability must be positive");
    if (p >= 1.0) return 1;
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (k >= static_cast<double>(std::numeric_limits<long>::max() / 2)) return std::numeric_limits<long>::max() / 2;
    return static_cast<long>(k) + 1;
}

}  // namespace qrsim::engine
