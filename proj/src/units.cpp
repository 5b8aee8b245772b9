#include "isac/units.hpp"

#include <cmath>

namespace isac {

double db_to_lin(double db) {
    if (std::isinf(db)) return db > 0 ? kInf : 0.0;
    return std::pow(10.0, db / 10.0);
}

double lin_to_db(double lin) {
    if (lin <= 0.0) return -kInf;
    return 10.0 * std::log10(lin);
}

double dbm_to_watts(double dbm) { return db_to_lin(dbm) * 1e-3; }

double watts_to_dbm(double watts) { return lin_to_db(watts * 1e3); }

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

cplx complex_gaussian(Rng& rng, double power) {
    // Box-Muller keeps the stream layout independent of the standard library's
    // normal_distribution caching, so results match across toolchains.
    constexpr double kTwoPow53 = 9007199254740992.0;
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) / kTwoPow53;
    const double u2 = static_cast<double>(rng() >> 11) / kTwoPow53;
    const double r = std::sqrt(-std::log(u1) * power);
    const double th = 2.0 * kPi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

} // namespace isac
