#include "isac/waveform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

PulseConfig PulseConfig::reference() { return PulseConfig{}; }

void PulseConfig::validate() const {
    if (H == 0 || L == 0) throw ConfigError("H and L must be positive");
    if (L > H) throw ConfigError("L must not exceed H");
    if (S <= H + N_r + L) throw ConfigError("silent period must satisfy S > H + N_r + L");
    if (K == 0 || K % 4 != 0) throw ConfigError("K must be a positive multiple of 4");
    if (!(P_l > 0.0) || !(P_h >= P_l)) throw ConfigError("powers must satisfy P_h >= P_l > 0");
    if (!(T_p > 0.0) || !(T > 0.0) || !(f_c > 0.0) || !(B > 0.0))
        throw ConfigError("timing and frequency parameters must be positive");
    if (symbol_duration() > T * (1.0 + 1e-12)) throw ConfigError("symbol duration exceeds the PRI");
}

TransmitPri build_pri(const PulseConfig& cfg, const SequenceSet& set, std::size_t k) {
    if (k >= cfg.K) throw std::out_of_range("PRI index " + std::to_string(k) + " outside CPI");
    if (set.H != cfg.H || set.L != cfg.L) throw std::invalid_argument("sequence set does not match H/L");
    TransmitPri tx;
    tx.pri_index = k;
    tx.chips.assign(cfg.M(), cplx{});
    const auto& p = set.pulse(k);
    const double ah = std::sqrt(cfg.P_h);
    const double al = std::sqrt(cfg.P_l);
    for (std::size_t i = 0; i < cfg.H; ++i) tx.chips[i] = ah * p.high[i];
    for (std::size_t i = 0; i < cfg.L; ++i) tx.chips[cfg.rx_on() + i] = al * p.low[i];
    return tx;
}

double frame_overhead(int symbols_per_slot) {
    if (symbols_per_slot < 1) throw std::domain_error("symbols_per_slot must be >= 1");
    return 1.0 / static_cast<double>(symbols_per_slot);
}

} // namespace isac
