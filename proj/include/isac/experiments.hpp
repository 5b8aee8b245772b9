#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isac/baselines.hpp"
#include "isac/config.hpp"
#include "isac/metrics.hpp"
#include "isac/receiver.hpp"

namespace isac {

inline constexpr const char* kCodeVersion = "isac-sim 1.0.0";

struct Provenance {
    std::string config_hash;  // FNV-1a of the JSON config snapshot
    std::uint64_t seed = 0;
    std::string code_version = kCodeVersion;
};
Provenance make_provenance(const ScenarioConfig& cfg);
nlohmann::json to_json(const Provenance& p);

/**
 * @brief Dual-power transmit/receive chain reused across Monte Carlo trials.
 * Branch outputs are simulated once per CPI; any number of weight profiles can
 * then be applied to them.
 */
class ProposalChain {
public:
    explicit ProposalChain(const ScenarioConfig& cfg);

    std::vector<BranchOutputs> simulate(const std::vector<Target>& targets, Rng& rng) const;
    RdMap map(const std::vector<BranchOutputs>& cpi, const WeightProfile& w) const;
    WeightProfile weights(const WeightMode& mode) const;

    const MetricParams& metrics() const { return metrics_; }
    const SequenceSet& set() const { return set_; }
    const ScenarioConfig& config() const { return cfg_; }

private:
    ScenarioConfig cfg_;
    SequenceSet set_;
    MatchedFilterBank bank_;
    MetricParams metrics_;
    std::vector<TransmitPri> pulses_;  // one per set member
};

/// Doppler index (FFT-shifted, column minus zero column) closest to a radial velocity.
long doppler_index_of(double velocity_mps, const PulseConfig& p, std::size_t m_fft);

/// True if some detection lies within +-1 range bin and +-1 Doppler bin (circular) of the truth.
bool target_hit(const DetectionReport& rep, const RdMap& map, std::size_t bin, long doppler_index);

/// 95% Wilson score interval (lower, upper).
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

std::vector<double> range_grid(const ScenarioConfig& cfg);

struct PdPoint {
    double range_m = 0;
    std::size_t bin = 0;
    std::size_t hits = 0;
    std::size_t trials = 0;
    double pd = 0;
    double ci_low = 0;
    double ci_high = 0;
    double ci_half() const { return 0.5 * (ci_high - ci_low); }
};

struct PdCurve {
    std::string label;
    std::vector<PdPoint> points;
};

/// Detection probability versus range for several weight modes on shared simulations.
std::vector<PdCurve> run_pd_vs_range(const ScenarioConfig& cfg, const std::vector<WeightMode>& modes);
/// Single curve for cfg.waveform / cfg.weight_mode / cfg.detector.
PdCurve run_pd_vs_range(const ScenarioConfig& cfg);

struct RcsPoint {
    double range_m = 0;
    std::size_t bin = 0;
    double sic_db = 0;
    double proposal_dbsm = 0;
    double lfm_dbsm = 0;
    double ofdm_dbsm = 0;
    double monte_carlo_dbsm = 0;  // NaN unless Monte Carlo mode ran
};

/// Analytic minimum detectable RCS (and optionally Monte Carlo) for every SIC level in cfg.sic_list_db.
std::vector<RcsPoint> run_min_rcs(const ScenarioConfig& cfg);

/// RCS in dBsm at which the simulated P_d crosses 0.9 at one delay bin (bisection in dB).
double monte_carlo_min_rcs(const ScenarioConfig& cfg, std::size_t bin, double lo_dbsm, double hi_dbsm,
                           double tol_db = 0.25);

struct TargetOutcome {
    Target target;
    std::size_t bin = 0;
    std::size_t hits = 0;
    std::size_t trials = 0;
    bool detected() const { return 2 * hits > trials; }
};

struct MultiTargetResult {
    std::string baseline;
    std::vector<TargetOutcome> proposal;
    std::vector<TargetOutcome> reference;
    std::size_t proposal_detected() const;
    std::size_t reference_detected() const;
};

/// Targets at the given delay bins with the given RCS values (dBsm), static.
std::vector<Target> targets_at_bins(const std::vector<std::size_t>& bins, const std::vector<double>& rcs_dbsm,
                                    const PulseConfig& p);

/// Proposal (optimal weights) against one baseline on the configured targets; majority vote over trials.
MultiTargetResult run_multi_target(const ScenarioConfig& cfg, WaveformKind baseline);

struct DetectorCompareResult {
    PdCurve hierarchical;
    PdCurve cfar2d;
    double max_range_hierarchical = 0;  // interpolated P_d = 0.9 crossing
    double max_range_2d = 0;
    // Crossings of the Wilson bound curves: [pessimistic, optimistic].
    std::pair<double, double> range_ci_hierarchical;
    std::pair<double, double> range_ci_2d;
    double alpha_hierarchical = 0;  // threshold factors actually used
    double alpha_2d = 0;
};

/// Both detectors on identical proposal RD maps over the configured range grid. With
/// cfg.compare_equal_pfa each detector is first calibrated to the same overall P_FA.
DetectorCompareResult run_detector_compare(const ScenarioConfig& cfg);

/// Range where a curve (in increasing range) last stays at or above `level` before first dropping below it,
/// linearly interpolated; `which` selects pd (0), ci_low (-1) or ci_high (+1).
double crossing_range(const PdCurve& c, double level, int which = 0);

// Serialization helpers.
void write_pd_csv(const std::vector<PdCurve>& curves, const std::string& path);
void write_rcs_csv(const std::vector<RcsPoint>& pts, const std::string& path);
nlohmann::json to_json(const PdCurve& c);
nlohmann::json to_json(const MultiTargetResult& r);
nlohmann::json to_json(const DetectorCompareResult& r);

} // namespace isac
