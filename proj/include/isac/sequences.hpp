#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/units.hpp"

namespace isac {

//==============================================================================
// Chip sequences
//==============================================================================

/**
 * @brief Unit-modulus code vector. Construction rejects any chip with |c| != 1.
 */
class ChipSequence {
public:
    ChipSequence() = default;
    explicit ChipSequence(std::vector<cplx> chips);
    static ChipSequence from_signs(const std::vector<int>& signs);

    std::size_t size() const { return chips_.size(); }
    bool empty() const { return chips_.empty(); }
    const cplx& operator[](std::size_t i) const { return chips_[i]; }
    const std::vector<cplx>& chips() const { return chips_; }

    /// True when every chip is exactly +1 or -1.
    bool is_biphase() const;
    /// Signs of a biphase sequence; throws if it is not biphase.
    std::vector<int> signs() const;
    ChipSequence negated() const;
    double energy() const;

    bool operator==(const ChipSequence& o) const { return chips_ == o.chips_; }

private:
    std::vector<cplx> chips_;
};

struct ComplementaryPair {
    ChipSequence a;
    ChipSequence b;
};

/// High/low codes carried by one pulse.
struct PulseCodes {
    ChipSequence high;
    ChipSequence low;
};

/**
 * @brief The four-pulse inverse-phase set:
 * (a_H, a_L), (b_H, b_L), (a_H, -a_L), (b_H, -b_L).
 * PRI k uses pulse k mod 4.
 */
struct SequenceSet {
    std::size_t H = 0;
    std::size_t L = 0;
    std::array<PulseCodes, 4> pulses;

    const PulseCodes& pulse(std::size_t k) const { return pulses[k % 4]; }
};

/// Aperiodic correlation over lags min_lag..min_lag+values.size()-1.
struct Correlation {
    long min_lag = 0;
    std::vector<cplx> values;

    long max_lag() const { return min_lag + static_cast<long>(values.size()) - 1; }
    /// Value at a lag; zero outside the stored support.
    cplx at(long lag) const;
};

struct SetVerification {
    double autocorr_residual_high = 0.0;
    double autocorr_residual_low = 0.0;
    double cross_residual = 0.0;
    bool exact() const {
        return autocorr_residual_high == 0.0 && autocorr_residual_low == 0.0 && cross_residual == 0.0;
    }
};

/// Recursive Golay pair of the given power-of-two length; throws std::invalid_argument otherwise.
ComplementaryPair golay_pair(std::size_t length);

bool is_power_of_two(std::size_t n);

/// R_x(tau) = sum_i x[i+tau] conj(x[i]), lags -(N-1)..N-1.
Correlation acf(const ChipSequence& x);

/// R_{x,y}(tau) = sum_i x[i+tau] conj(y[i]), lags -(Ny-1)..Nx-1.
Correlation ccf(const ChipSequence& x, const ChipSequence& y);

/// Generic complex cross-correlation with the same lag convention as ccf.
/// Uses direct summation when both inputs have length <= 256, FFT otherwise.
Correlation cross_correlate(const std::vector<cplx>& x, const std::vector<cplx>& y);

SequenceSet build_sequence_set(std::size_t H, std::size_t L);

/// Residuals of the complementary and cross-cancellation identities. Biphase sets
/// are checked in integer arithmetic.
SetVerification verify_set(const SequenceSet& set);

// JSON: biphase sequences as arrays of +-1 integers, otherwise arrays of [re, im].
nlohmann::json to_json(const ChipSequence& s);
ChipSequence chip_sequence_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SequenceSet& set);
SequenceSet sequence_set_from_json(const nlohmann::json& j);

} // namespace isac
