#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "isac/channel.hpp"
#include "isac/detection.hpp"
#include "isac/metrics.hpp"
#include "isac/receiver.hpp"
#include "isac/waveform.hpp"

namespace isac {

enum class Detector { Hierarchical, Cfar2d };

DetectionReport run_detector(const RdMap& map, const CfarConfig& cfg, Detector det);

/// Fraction of cells declared detected by `det` on `maps` i.i.d. unit exponential noise maps.
double empirical_pfa(Detector det, const CfarConfig& cfg, std::size_t rows, std::size_t cols, std::size_t maps,
                     std::uint64_t seed);

/**
 * @brief Threshold factor giving `det` an overall false-alarm rate of cfg.p_fa per cell.
 * Bisects alpha on a fixed set of exponential noise maps (at least min_cells cells), so
 * detectors with different decision logic can be compared at equal P_FA.
 */
double calibrate_detector_alpha(Detector det, const CfarConfig& cfg, std::size_t rows, std::size_t cols,
                                std::size_t min_cells, std::uint64_t seed);

struct PipelineOutput {
    RdMap map;
    DetectionReport report;
};

//==============================================================================
// Half-duplex LFM pulse
//==============================================================================

struct LfmConfig {
    double duration = 1.28e-6;   // T_h
    double bandwidth = 100e6;    // B
    double power = dbm_to_watts(53.0);
    double T = 0.125e-3;
    std::size_t K = 32;
    /// Receiver stays open after the pulse and sees RSI from a concurrent
    /// communication signal of power rsi_power over the whole window.
    bool full_window_rsi = false;
    double rsi_power = dbm_to_watts(35.0);

    static LfmConfig matched_to(const PulseConfig& p);
    std::size_t chips(double T_p) const;
    void validate(double T_p) const;
};

/// Unit-modulus chirp sweeping -B/2..B/2 over the pulse, sampled at the chip rate.
std::vector<cplx> lfm_chirp(const LfmConfig& cfg, double T_p);

/// Chirp transmit, receiver gated off for the pulse plus recovery, matched filter,
/// slow-time FFT and detection. Detections inside the blind range are discarded.
PipelineOutput lfm_pipeline(const std::vector<Target>& targets, const LfmConfig& cfg, const ChannelConfig& ccfg,
                            const PulseConfig& grid, const CfarConfig& cfar, Rng& rng,
                            Detector det = Detector::Hierarchical);

/// First delay bin an LFM receiver can see (pulse length plus recovery).
std::size_t lfm_min_bin(const LfmConfig& cfg, const PulseConfig& grid);

//==============================================================================
// Continuous OFDM sensing
//==============================================================================

struct OfdmSensingConfig {
    double power = dbm_to_watts(35.0);  // continuous transmit power, defaults to P_l
    double duty = 1.0;
    void validate() const;
};

/// Random unit-modulus subcarrier symbols per PRI, cyclic echo, full-window RSI of
/// power |beta|^2 * power, circular correlation with the known symbol, slow-time FFT.
PipelineOutput ofdm_pipeline(const std::vector<Target>& targets, const OfdmSensingConfig& cfg,
                             const ChannelConfig& ccfg, const PulseConfig& grid, const CfarConfig& cfar, Rng& rng,
                             Detector det = Detector::Hierarchical);

//==============================================================================
// Analytic baseline metrics
//==============================================================================

/// K |alpha|^2 P T_h B / N0B outside the blind range, 0 inside it.
double lfm_metric(std::size_t n, double sigma, const LfmConfig& cfg, const MetricParams& p);
/// K |alpha|^2 P M / (|beta|^2 P + N0B).
double ofdm_metric(std::size_t n, double sigma, const OfdmSensingConfig& cfg, std::size_t M, const MetricParams& p);
double lfm_min_rcs(std::size_t n, const LfmConfig& cfg, const MetricParams& p);
double ofdm_min_rcs(std::size_t n, const OfdmSensingConfig& cfg, std::size_t M, const MetricParams& p);

} // namespace isac
