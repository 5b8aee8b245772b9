#include "isac/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

ChannelConfig ChannelConfig::for_pulse(const PulseConfig& pcfg) {
    ChannelConfig c;
    c.wavelength_m = pcfg.wavelength();
    return c;
}

void ChannelConfig::validate() const {
    if (!(G_t > 0.0) || !(G_r > 0.0)) throw ConfigError("antenna gains must be positive");
    if (!(wavelength_m > 0.0)) throw ConfigError("wavelength must be positive");
    if (!(N0_w_per_hz > 0.0)) throw ConfigError("noise density must be positive");
    if (std::isnan(sic_db) || std::isnan(noise_figure_db)) throw ConfigError("SIC / noise figure must be numbers");
}

double channel_gain(double range_m, double rcs_m2, const ChannelConfig& cfg) {
    if (!(range_m > 0.0)) throw std::domain_error("range must be positive");
    const double four_pi = 4.0 * kPi;
    const double r2 = range_m * range_m;
    return cfg.G_t * cfg.G_r * cfg.wavelength_m * cfg.wavelength_m * rcs_m2 /
           (four_pi * four_pi * four_pi * r2 * r2);
}

double channel_gain(const Target& t, const ChannelConfig& cfg) { return channel_gain(t.range_m, t.rcs_m2, cfg); }

std::size_t delay_bin(double range_m, const PulseConfig& pcfg) {
    const double n = std::round(2.0 * range_m / (kC0 * pcfg.T_p));
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

double bin_range(std::size_t n, const PulseConfig& pcfg) { return static_cast<double>(n) * pcfg.range_per_bin(); }

double doppler_hz(double velocity_mps, double carrier_hz) { return 2.0 * velocity_mps * carrier_hz / kC0; }

RxModel RxModel::dual_power(const PulseConfig& pcfg) {
    RxModel m;
    m.rx_on = pcfg.rx_on();
    m.rsi_begin = pcfg.rx_on();
    m.rsi_end = pcfg.rx_on() + pcfg.L;
    m.rsi_tx_power = pcfg.P_l;
    return m;
}

CpiChannel::CpiChannel(const std::vector<Target>& targets, const ChannelConfig& cfg, const PulseConfig& pcfg,
                       Rng& rng, RxModel model)
    : cfg_(cfg), pcfg_(pcfg), model_(model) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    echoes_.reserve(targets.size());
    for (const auto& t : targets) {
        EchoState e;
        const double exact = 2.0 * t.range_m / (kC0 * pcfg.T_p);
        e.delay_chips = cfg.fractional_delay ? exact : static_cast<double>(delay_bin(t.range_m, pcfg));
        e.alpha = std::polar(std::sqrt(channel_gain(t, cfg)), phase(rng));
        e.doppler_hz = doppler_hz(t.velocity_mps, pcfg.f_c);
        echoes_.push_back(e);
    }
}

ReceivedPri CpiChannel::echo(const TransmitPri& pulse) const {
    const std::size_t M = pulse.chips.size();
    ReceivedPri y;
    y.pri_index = pulse.pri_index;
    y.samples.assign(M, cplx{});
    const long m = static_cast<long>(M);
    auto tx = [&](long idx) -> cplx {
        if (model_.cyclic_echo) return pulse.chips[static_cast<std::size_t>(((idx % m) + m) % m)];
        return (idx >= 0 && idx < m) ? pulse.chips[static_cast<std::size_t>(idx)] : cplx{};
    };
    const double t_k = static_cast<double>(pulse.pri_index) * pcfg_.T;
    for (const auto& e : echoes_) {
        const cplx a = e.alpha * std::polar(1.0, 2.0 * kPi * e.doppler_hz * t_k);
        const long n0 = static_cast<long>(std::floor(e.delay_chips));
        const double frac = e.delay_chips - static_cast<double>(n0);
        for (std::size_t i = model_.rx_on; i < M; ++i) {
            const long src = static_cast<long>(i) - n0;
            cplx v = tx(src);
            if (frac != 0.0) v = (1.0 - frac) * v + frac * tx(src - 1);
            y.samples[i] += a * v;
        }
    }
    return y;
}

ReceivedPri CpiChannel::receive(const TransmitPri& pulse, Rng& rng) const {
    ReceivedPri y = echo(pulse);
    const double rsi_power = cfg_.beta2() * model_.rsi_tx_power;
    const double noise = cfg_.noise_power(pcfg_.B);
    for (std::size_t i = model_.rx_on; i < y.samples.size(); ++i) {
        if (rsi_power > 0.0 && i >= model_.rsi_begin && i < model_.rsi_end)
            y.samples[i] += complex_gaussian(rng, rsi_power);
        y.samples[i] += complex_gaussian(rng, noise);
    }
    return y;
}

ReceivedPri simulate_rx(const TransmitPri& pulse, const std::vector<Target>& targets, const ChannelConfig& cfg,
                        const PulseConfig& pcfg, Rng& rng) {
    CpiChannel ch(targets, cfg, pcfg, rng);
    return ch.receive(pulse, rng);
}

} // namespace isac
