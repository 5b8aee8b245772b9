#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "isac/units.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct Target {
    double range_m = 0.0;
    double velocity_mps = 0.0;  // radial, positive = closing
    double rcs_m2 = 0.0;
};

struct ChannelConfig {
    double G_t = 100.0;                     // linear
    double G_r = 100.0;                     // linear
    double wavelength_m = kC0 / 28e9;
    double N0_w_per_hz = dbm_to_watts(-174.0);
    double noise_figure_db = 5.0;
    double sic_db = 110.0;                  // +inf means perfect cancellation
    std::uint64_t rng_seed = 1;
    bool fractional_delay = false;

    static ChannelConfig for_pulse(const PulseConfig& pcfg);

    /// |beta|^2 = 10^(-sic_db/10).
    double beta2() const { return db_to_lin(-sic_db); }
    /// Per-sample noise power N0*B*NF.
    double noise_power(double bandwidth_hz) const {
        return N0_w_per_hz * bandwidth_hz * db_to_lin(noise_figure_db);
    }
    void validate() const;
};

/// Two-way radar equation |alpha|^2 = G_t G_r lambda^2 sigma / ((4 pi)^3 R^4).
double channel_gain(const Target& t, const ChannelConfig& cfg);
/// Same law with the range given directly (used by the analytic metrics).
double channel_gain(double range_m, double rcs_m2, const ChannelConfig& cfg);

/// Nearest chip bin of the round-trip delay, never below 1.
std::size_t delay_bin(double range_m, const PulseConfig& pcfg);
/// Range at the centre of delay bin n.
double bin_range(std::size_t n, const PulseConfig& pcfg);
double doppler_hz(double velocity_mps, double carrier_hz);

struct ReceivedPri {
    std::vector<cplx> samples;
    std::size_t pri_index = 0;
};

/**
 * @brief Receive-side model: where the receiver samples and where RSI lands.
 *
 * The default follows the dual-power pulse: the receiver opens at H+N_r and the
 * low-power segment leaks into it. Baselines override the fields.
 */
struct RxModel {
    std::size_t rx_on = 0;       // first sampled chip
    std::size_t rsi_begin = 0;   // RSI window [rsi_begin, rsi_end)
    std::size_t rsi_end = 0;
    double rsi_tx_power = 0.0;   // transmit power that leaks as RSI (W)
    bool cyclic_echo = false;    // echo wraps around the symbol (cyclic-prefix model)

    static RxModel dual_power(const PulseConfig& pcfg);
};

/// Per-target state fixed over one CPI.
struct EchoState {
    double delay_chips = 0.0;   // integer unless fractional delays are enabled
    cplx alpha;                 // complex amplitude with random phase
    double doppler_hz = 0.0;
};

/**
 * @brief Channel realization for one CPI. Target phases are drawn at construction;
 * receive() adds fresh RSI and noise per PRI.
 */
class CpiChannel {
public:
    CpiChannel(const std::vector<Target>& targets, const ChannelConfig& cfg, const PulseConfig& pcfg,
               Rng& rng, RxModel model);
    CpiChannel(const std::vector<Target>& targets, const ChannelConfig& cfg, const PulseConfig& pcfg,
               Rng& rng)
        : CpiChannel(targets, cfg, pcfg, rng, RxModel::dual_power(pcfg)) {}

    /// Gated echoes only (no RSI, no noise).
    ReceivedPri echo(const TransmitPri& pulse) const;
    /// Echoes + RSI + thermal noise.
    ReceivedPri receive(const TransmitPri& pulse, Rng& rng) const;

    const std::vector<EchoState>& echoes() const { return echoes_; }
    const RxModel& model() const { return model_; }

private:
    ChannelConfig cfg_;
    PulseConfig pcfg_;
    RxModel model_;
    std::vector<EchoState> echoes_;
};

/// Single-PRI convenience: draws target phases and one PRI of RSI/noise from rng.
ReceivedPri simulate_rx(const TransmitPri& pulse, const std::vector<Target>& targets, const ChannelConfig& cfg,
                        const PulseConfig& pcfg, Rng& rng);

} // namespace isac
