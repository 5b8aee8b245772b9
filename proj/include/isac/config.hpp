#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/baselines.hpp"
#include "isac/channel.hpp"
#include "isac/detection.hpp"
#include "isac/waveform.hpp"

namespace isac {

enum class ExperimentKind { RdMap, PdVsRange, MinRcs, MultiTarget, DetectorCompare, MetricSweep, SequenceVerify };

enum class WaveformKind { Proposal, Lfm, Ofdm };

struct WeightMode {
    enum Kind { Optimal, Fixed, HighOnly, LowOnly } kind = Optimal;
    double w = 1.0;  // used by Fixed

    static WeightMode parse(const std::string& s);
    std::string str() const;
};

enum class RangeGrid { Log, Linear };

/**
 * @brief Full scenario: physics, detector, targets and experiment controls.
 *
 * Loaded from a key = value text file. Powers are in dBm, durations in
 * microseconds, frequencies in GHz/MHz, as in the parameter table.
 */
struct ScenarioConfig {
    PulseConfig pulse;
    ChannelConfig channel = ChannelConfig::for_pulse(PulseConfig{});
    CfarConfig cfar;
    LfmConfig lfm = LfmConfig::matched_to(PulseConfig{});
    OfdmSensingConfig ofdm;
    std::vector<Target> targets;

    ExperimentKind experiment = ExperimentKind::RdMap;
    WaveformKind waveform = WaveformKind::Proposal;
    Detector detector = Detector::Hierarchical;
    WeightMode weight_mode;
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    double rho_db = 15.0;
    std::size_t m_fft = 0;  // 0 means K
    DopplerWindow doppler_window = DopplerWindow::Rectangular;

    // Sweep controls.
    double range_min_m = 10.0;
    double range_max_m = 1140.0;
    std::size_t range_points = 40;
    RangeGrid range_grid = RangeGrid::Log;
    double sweep_rcs_dbsm = -10.0;
    double sweep_velocity_mps = 0.0;
    std::vector<double> sic_list_db{100.0, 110.0, 120.0};
    bool monte_carlo_min_rcs = false;
    /// Detector comparison: calibrate each detector to the same overall P_FA (true)
    /// or use the analytic per-test factor for both (false).
    bool compare_equal_pfa = true;
    std::size_t calibration_cells = 10'000'000;

    std::size_t fft_size() const { return m_fft == 0 ? pulse.K : m_fft; }
    void validate() const;
};

/// Parse key = value text. Unknown keys and malformed values raise ConfigError.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

std::string experiment_name(ExperimentKind k);
ExperimentKind parse_experiment(const std::string& s);

/// Machine-readable snapshot of the effective configuration.
nlohmann::json to_json(const ScenarioConfig& cfg);

} // namespace isac
