#include "isac/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "isac/fft.hpp"
#include "isac/parallel.hpp"

namespace isac {

DetectionReport run_detector(const RdMap& map, const CfarConfig& cfg, Detector det) {
    return det == Detector::Hierarchical ? hierarchical_detect(map, cfg) : cfar_2d(map, cfg);
}

namespace {

RdMap noise_map(std::size_t rows, std::size_t cols, Rng& rng) {
    RdMap m;
    m.rows = rows;
    m.cols = cols;
    m.zero_doppler_col = (cols - 1) / 2;
    m.power.resize(rows * cols);
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : m.power) v = expo(rng);
    return m;
}

std::size_t false_alarms(Detector det, const CfarConfig& cfg, std::size_t rows, std::size_t cols,
                         std::size_t maps, std::uint64_t seed) {
    std::vector<std::size_t> count(maps, 0);
    parallel_for(maps, [&](std::size_t i) {
        Rng rng = make_rng(seed, 0xfa, i);
        count[i] = run_detector(noise_map(rows, cols, rng), cfg, det).detections.size();
    });
    std::size_t total = 0;
    for (auto c : count) total += c;
    return total;
}

} // namespace

double empirical_pfa(Detector det, const CfarConfig& cfg, std::size_t rows, std::size_t cols, std::size_t maps,
                     std::uint64_t seed) {
    const auto fa = false_alarms(det, cfg, rows, cols, maps, seed);
    return static_cast<double>(fa) / static_cast<double>(rows * cols * maps);
}

double calibrate_detector_alpha(Detector det, const CfarConfig& cfg, std::size_t rows, std::size_t cols,
                                std::size_t min_cells, std::uint64_t seed) {
    cfg.validate();
    if (rows == 0 || cols == 0) throw std::invalid_argument("empty calibration map");
    const std::size_t maps = std::max<std::size_t>(1, (min_cells + rows * cols - 1) / (rows * cols));
    const double allowed = cfg.p_fa * static_cast<double>(maps * rows * cols);
    CfarConfig c = cfg;
    auto rate_ok = [&](double a) {
        c.alpha = a;
        return static_cast<double>(false_alarms(det, c, rows, cols, maps, seed)) <= allowed;
    };
    // Smallest alpha whose false-alarm count stays within budget, bisected in log space.
    double lo = 1.0, hi = 2.0 * ca_cfar_alpha(cfg.training_cells, cfg.p_fa);
    while (!rate_ok(hi)) hi *= 2.0;
    for (int i = 0; i < 18; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (rate_ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

//==============================================================================
// LFM
//==============================================================================

LfmConfig LfmConfig::matched_to(const PulseConfig& p) {
    LfmConfig c;
    c.duration = static_cast<double>(p.H) * p.T_p;
    c.bandwidth = p.B;
    c.power = p.P_h;
    c.T = p.T;
    c.K = p.K;
    c.rsi_power = p.P_l;
    return c;
}

std::size_t LfmConfig::chips(double T_p) const { return static_cast<std::size_t>(std::llround(duration / T_p)); }

void LfmConfig::validate(double T_p) const {
    if (!(power > 0.0) || !(bandwidth > 0.0) || !(duration > 0.0)) throw ConfigError("LFM parameters must be positive");
    if (duration * bandwidth <= 1.0) throw ConfigError("LFM time-bandwidth product must exceed 1");
    if (chips(T_p) == 0) throw ConfigError("LFM pulse shorter than one chip");
}

std::vector<cplx> lfm_chirp(const LfmConfig& cfg, double T_p) {
    const std::size_t n = cfg.chips(T_p);
    std::vector<cplx> c(n);
    const double k = cfg.bandwidth / cfg.duration;  // chirp rate
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * T_p;
        c[i] = std::polar(1.0, kPi * k * t * t - kPi * cfg.bandwidth * t);
    }
    return c;
}

std::size_t lfm_min_bin(const LfmConfig& cfg, const PulseConfig& grid) { return cfg.chips(grid.T_p) + grid.N_r; }

PipelineOutput lfm_pipeline(const std::vector<Target>& targets, const LfmConfig& cfg, const ChannelConfig& ccfg,
                            const PulseConfig& grid, const CfarConfig& cfar, Rng& rng, Detector det) {
    cfg.validate(grid.T_p);
    const std::size_t M = grid.M();
    const std::size_t N = cfg.chips(grid.T_p);
    if (N + grid.N_r >= M) throw ConfigError("LFM pulse does not fit the symbol");
    const auto chirp = lfm_chirp(cfg, grid.T_p);

    RxModel model;
    model.rx_on = N + grid.N_r;
    model.rsi_begin = model.rx_on;
    model.rsi_end = cfg.full_window_rsi ? M : model.rx_on;
    model.rsi_tx_power = cfg.rsi_power;
    PulseConfig tgrid = grid;
    tgrid.T = cfg.T;
    CpiChannel ch(targets, ccfg, tgrid, rng, model);

    const std::size_t nfft = fft::next_pow2(M + N);
    std::vector<cplx> filt(nfft, cplx{});
    const double amp = std::sqrt(cfg.power);
    for (std::size_t i = 0; i < N; ++i) filt[i] = amp * chirp[i];
    fft::forward(filt);
    const double norm = 1.0 / (static_cast<double>(nfft) * std::sqrt(cfg.power * static_cast<double>(N)));
    for (auto& v : filt) v = std::conj(v) * norm;

    TransmitPri tx;
    tx.chips.assign(M, cplx{});
    for (std::size_t i = 0; i < N; ++i) tx.chips[i] = amp * chirp[i];

    const std::size_t bins = grid.delay_bins();
    FastTimeMatrix D(bins, cfg.K);
    std::vector<cplx> buf(nfft);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        tx.pri_index = k;
        const auto y = ch.receive(tx, rng);
        std::fill(buf.begin(), buf.end(), cplx{});
        std::copy(y.samples.begin(), y.samples.end(), buf.begin());
        fft::forward(buf);
        for (std::size_t i = 0; i < nfft; ++i) buf[i] *= filt[i];
        fft::inverse(buf);
        for (std::size_t n = 1; n <= bins; ++n) D.at(n - 1, k) = buf[n];
    }
    PipelineOutput out;
    out.map = rd_map(D, cfg.K, tgrid);
    out.report = run_detector(out.map, cfar, det);
    const std::size_t min_bin = lfm_min_bin(cfg, grid);
    std::erase_if(out.report.detections, [&](const Detection& d) { return d.row + 1 < min_bin; });
    return out;
}

//==============================================================================
// OFDM
//==============================================================================

void OfdmSensingConfig::validate() const {
    if (!(power > 0.0)) throw ConfigError("OFDM power must be positive");
    if (duty != 1.0) throw ConfigError("OFDM sensing is modelled as continuous (duty = 1)");
}

PipelineOutput ofdm_pipeline(const std::vector<Target>& targets, const OfdmSensingConfig& cfg,
                             const ChannelConfig& ccfg, const PulseConfig& grid, const CfarConfig& cfar, Rng& rng,
                             Detector det) {
    cfg.validate();
    const std::size_t M = grid.M();
    RxModel model;
    model.rx_on = 0;
    model.rsi_begin = 0;
    model.rsi_end = M;
    model.rsi_tx_power = cfg.power;
    model.cyclic_echo = true;
    CpiChannel ch(targets, ccfg, grid, rng, model);

    const std::size_t bins = grid.delay_bins();
    FastTimeMatrix D(bins, grid.K);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    const double amp = std::sqrt(cfg.power / static_cast<double>(M));
    const double norm = 1.0 / (static_cast<double>(M) * std::sqrt(cfg.power * static_cast<double>(M)));
    TransmitPri tx;
    std::vector<cplx> X(M), Y(M);
    for (std::size_t k = 0; k < grid.K; ++k) {
        for (auto& v : X) v = std::polar(1.0, phase(rng));
        tx.chips = X;
        fft::inverse(tx.chips);
        for (auto& v : tx.chips) v *= amp;
        tx.pri_index = k;
        const auto y = ch.receive(tx, rng);
        // Circular correlation with the known symbol through its spectrum.
        Y = y.samples;
        fft::forward(Y);
        std::vector<cplx> Xs = tx.chips;
        fft::forward(Xs);
        for (std::size_t i = 0; i < M; ++i) Y[i] *= std::conj(Xs[i]) * norm;
        fft::inverse(Y);
        for (std::size_t n = 1; n <= bins; ++n) D.at(n - 1, k) = Y[n % M];
    }
    PipelineOutput out;
    out.map = rd_map(D, grid.K, grid);
    out.report = run_detector(out.map, cfar, det);
    return out;
}

//==============================================================================
// Analytic
//==============================================================================

double lfm_metric(std::size_t n, double sigma, const LfmConfig& cfg, const MetricParams& p) {
    if (n < cfg.chips(p.T_p) + p.N_r) return 0.0;
    const double alpha2 = p.gain_per_rcs(p.range_of(static_cast<double>(n))) * sigma;
    return static_cast<double>(cfg.K) * alpha2 * cfg.power * static_cast<double>(cfg.chips(p.T_p)) / p.N0B;
}

double ofdm_metric(std::size_t n, double sigma, const OfdmSensingConfig& cfg, std::size_t M, const MetricParams& p) {
    const double alpha2 = p.gain_per_rcs(p.range_of(static_cast<double>(n))) * sigma;
    return p.K * alpha2 * cfg.power * static_cast<double>(M) / (p.beta2 * cfg.power + p.N0B);
}

double lfm_min_rcs(std::size_t n, const LfmConfig& cfg, const MetricParams& p) {
    const double f1 = lfm_metric(n, 1.0, cfg, p);
    return f1 > 0.0 ? p.rho / f1 : kInf;
}

double ofdm_min_rcs(std::size_t n, const OfdmSensingConfig& cfg, std::size_t M, const MetricParams& p) {
    return p.rho / ofdm_metric(n, 1.0, cfg, M, p);
}

} // namespace isac
