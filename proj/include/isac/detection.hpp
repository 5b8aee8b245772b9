#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/receiver.hpp"

namespace isac {

struct CfarConfig {
    std::size_t guard_cells = 4;      // total, split evenly around the CUT
    std::size_t training_cells = 16;  // total
    double p_fa = 1e-5;
    double alpha = 0.0;               // 0 selects the analytic CA factor
    /// Second range pass that drops first-pass detections from other CUTs' training cells.
    bool censor_range = true;

    double alpha_cfar() const;
    void validate() const;
};

/// Analytic CA-CFAR factor t_c (p_fa^(-1/t_c) - 1) for exponentially distributed cells.
double ca_cfar_alpha(std::size_t t_c, double p_fa);

/// Monte Carlo estimate of the CA factor: the (1 - p_fa) quantile of CUT / mean(training)
/// over `trials` independent exponential draws.
double calibrate_alpha(std::size_t t_c, double p_fa, std::size_t trials, std::uint64_t seed);

enum class Axis { Range, Doppler };

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
};

/**
 * @brief Training cells along one axis, as two half-open index ranges.
 * Near an edge the cells missing on one side are moved to the other so the
 * total stays t_c whenever the axis is long enough.
 */
struct TrainingWindow {
    std::size_t left_begin = 0, left_end = 0;
    std::size_t right_begin = 0, right_end = 0;
    std::size_t size() const { return (left_end - left_begin) + (right_end - right_begin); }
};

TrainingWindow training_window(std::size_t pos, std::size_t extent, std::size_t g_c, std::size_t t_c);

struct CfarDecision {
    bool detected = false;
    double threshold = 0.0;
    double noise_estimate = 0.0;
    std::size_t cells_used = 0;
};

/// Cells strictly greater than every available neighbour in the 3x3 block.
std::vector<Cell> local_maxima(const RdMap& map);

/// 1D CA-CFAR on one cell. `excluded` (row-major mask, may be null) removes cells
/// from the training set; the window then grows outward on that side.
CfarDecision cfar_1d(const RdMap& map, Cell cell, Axis axis, const CfarConfig& cfg,
                     const std::vector<char>* excluded = nullptr);

struct Detection {
    std::size_t row = 0;   // delay bin = row + 1
    std::size_t col = 0;
    double power = 0.0;
    double range_threshold = 0.0;
    double doppler_threshold = 0.0;
};

struct DetectionReport {
    std::vector<Detection> detections;
    std::size_t local_maxima = 0;
    std::size_t stage1_candidates = 0;
};

/// Local maxima, then range-axis CFAR, then Doppler-axis CFAR on the survivors.
DetectionReport hierarchical_detect(const RdMap& map, const CfarConfig& cfg);

/// 2D CA-CFAR over every cell with a square annulus: guard half-width gh, training
/// ring out to half-width wh, where (2wh+1)^2 - (2gh+1)^2 = t_c when such a pair exists.
DetectionReport cfar_2d(const RdMap& map, const CfarConfig& cfg);

struct Annulus {
    std::size_t guard_half = 0;
    std::size_t outer_half = 0;
    std::size_t cells() const { return (2 * outer_half + 1) * (2 * outer_half + 1) - (2 * guard_half + 1) * (2 * guard_half + 1); }
};
/// Annulus used by cfar_2d for the given training count.
Annulus annulus_for(const CfarConfig& cfg);

nlohmann::json to_json(const DetectionReport& rep, const RdMap& map);
void write_detections_csv(const DetectionReport& rep, const RdMap& map, const std::string& path);

} // namespace isac
