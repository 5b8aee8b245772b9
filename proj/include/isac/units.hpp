#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace isac {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

/// Speed of light in vacuum [m/s].
inline constexpr double kC0 = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown for malformed or inconsistent configuration (CLI maps it to a JSON error).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// dB helpers. Every dB <-> linear conversion in the library goes through these.
double db_to_lin(double db);
double lin_to_db(double lin);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Derive an independent RNG for (seed, stream, index); used for per-trial streams.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Circular complex Gaussian sample with E|z|^2 = power.
cplx complex_gaussian(Rng& rng, double power);

} // namespace isac
