#pragma once

#include <cstddef>
#include <vector>

#include "isac/sequences.hpp"
#include "isac/units.hpp"

namespace isac {

/**
 * @brief Dual-power pulse parameters, all in linear SI units.
 *
 * PRI layout in chips: [H high | N_r recovery | L low | S silent], M = H+N_r+L+S.
 */
struct PulseConfig {
    double P_h = dbm_to_watts(53.0);   // W
    double P_l = dbm_to_watts(35.0);   // W
    std::size_t H = 128;
    std::size_t L = 64;
    std::size_t N_r = 0;
    std::size_t S = 700;
    double T_p = 1e-8;      // chip duration, 1/B
    double T = 0.125e-3;    // PRI
    std::size_t K = 32;
    double f_c = 28e9;
    double B = 100e6;

    /// Reference parameters: 28 GHz, 100 MHz, 32 PRIs, 53/35 dBm, 8.92 us symbol.
    static PulseConfig reference();

    std::size_t M() const { return H + N_r + L + S; }
    /// Number of fast-time delay bins processed (N_r + L + S).
    std::size_t delay_bins() const { return N_r + L + S; }
    /// First chip index at which the receiver samples.
    std::size_t rx_on() const { return H + N_r; }
    double wavelength() const { return kC0 / f_c; }
    /// Range spanned by one delay bin, c0*T_p/2.
    double range_per_bin() const { return kC0 * T_p / 2.0; }
    double symbol_duration() const { return static_cast<double>(M()) * T_p; }

    /// Throws ConfigError if any invariant is violated.
    void validate() const;
};

struct TransmitPri {
    std::vector<cplx> chips;
    std::size_t pri_index = 0;
};

/// Chip vector of PRI k; PRI k carries pulse k mod 4 of the set.
TransmitPri build_pri(const PulseConfig& cfg, const SequenceSet& set, std::size_t k);

/// Fraction of symbols spent on sensing when one sensing symbol is inserted per slot.
double frame_overhead(int symbols_per_slot);

} // namespace isac
