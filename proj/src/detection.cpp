#include "isac/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace isac {

double ca_cfar_alpha(std::size_t t_c, double p_fa) {
    const double t = static_cast<double>(t_c);
    return t * (std::pow(p_fa, -1.0 / t) - 1.0);
}

double CfarConfig::alpha_cfar() const { return alpha > 0.0 ? alpha : ca_cfar_alpha(training_cells, p_fa); }

void CfarConfig::validate() const {
    if (guard_cells % 2 != 0 || training_cells % 2 != 0)
        throw ConfigError("guard and training cell counts must be even");
    if (training_cells < 2) throw ConfigError("need at least 2 training cells");
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("p_fa must lie in (0, 1)");
    if (alpha < 0.0) throw ConfigError("alpha must be positive (or 0 for the analytic value)");
}

double calibrate_alpha(std::size_t t_c, double p_fa, std::size_t trials, std::uint64_t seed) {
    if (trials == 0 || t_c == 0) throw std::invalid_argument("calibration needs trials and training cells");
    Rng rng = make_rng(seed, 0xca1);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> ratio(trials);
    for (auto& r : ratio) {
        const double cut = expo(rng);
        double s = 0.0;
        for (std::size_t i = 0; i < t_c; ++i) s += expo(rng);
        r = cut / (s / static_cast<double>(t_c));
    }
    const auto q = static_cast<std::size_t>(std::floor((1.0 - p_fa) * static_cast<double>(trials - 1)));
    std::nth_element(ratio.begin(), ratio.begin() + static_cast<long>(q), ratio.end());
    return ratio[q];
}

TrainingWindow training_window(std::size_t pos, std::size_t extent, std::size_t g_c, std::size_t t_c) {
    if (extent < g_c + t_c + 1)
        throw ConfigError("axis extent " + std::to_string(extent) + " too small for guard+training cells");
    if (pos >= extent) throw std::out_of_range("CUT outside axis");
    const std::size_t g = g_c / 2;
    const std::size_t avail_left = pos > g ? pos - g : 0;
    const std::size_t avail_right = extent - 1 - pos > g ? extent - 1 - pos - g : 0;
    std::size_t left = std::min(t_c / 2, avail_left);
    std::size_t right = std::min(t_c - left, avail_right);
    left = std::min(t_c - right, avail_left);
    TrainingWindow w;
    w.left_end = pos > g ? pos - g : 0;
    w.left_begin = w.left_end - left;
    w.right_begin = pos + g + 1;
    w.right_end = w.right_begin + right;
    return w;
}

std::vector<Cell> local_maxima(const RdMap& map) {
    std::vector<Cell> out;
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            const double v = map.at(r, c);
            bool peak = true;
            for (int dr = -1; dr <= 1 && peak; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long>(map.rows) || cc >= static_cast<long>(map.cols))
                        continue;
                    if (!(v > map.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)))) {
                        peak = false;
                        break;
                    }
                }
            }
            if (peak) out.push_back({r, c});
        }
    }
    return out;
}

CfarDecision cfar_1d(const RdMap& map, Cell cell, Axis axis, const CfarConfig& cfg, const std::vector<char>* excluded) {
    const bool range = axis == Axis::Range;
    const std::size_t extent = range ? map.rows : map.cols;
    const std::size_t pos = range ? cell.row : cell.col;
    const TrainingWindow w = training_window(pos, extent, cfg.guard_cells, cfg.training_cells);

    auto flat = [&](std::size_t i) { return range ? i * map.cols + cell.col : cell.row * map.cols + i; };
    double sum = 0.0;
    std::size_t used = 0;
    if (!excluded) {
        for (std::size_t i = w.left_begin; i < w.left_end; ++i) sum += map.power[flat(i)];
        for (std::size_t i = w.right_begin; i < w.right_end; ++i) sum += map.power[flat(i)];
        used = w.size();
    } else {
        // Walk outward from the guard band, skipping excluded cells; a side that hits
        // the edge hands its remaining quota to the other side.
        const auto& mask = *excluded;
        long li = static_cast<long>(w.left_end) - 1;
        std::size_t ri = w.right_begin;
        auto take_left = [&](std::size_t quota) {
            std::size_t got = 0;
            for (; got < quota && li >= 0; --li) {
                const std::size_t f = flat(static_cast<std::size_t>(li));
                if (mask[f]) continue;
                sum += map.power[f];
                ++got;
            }
            return got;
        };
        auto take_right = [&](std::size_t quota) {
            std::size_t got = 0;
            for (; got < quota && ri < extent; ++ri) {
                const std::size_t f = flat(ri);
                if (mask[f]) continue;
                sum += map.power[f];
                ++got;
            }
            return got;
        };
        const std::size_t want_left = w.left_end - w.left_begin;
        const std::size_t want_right = w.right_end - w.right_begin;
        std::size_t got_left = take_left(want_left);
        std::size_t got_right = take_right(want_right + (want_left - got_left));
        const std::size_t short_right = want_right + (want_left - got_left) - got_right;
        got_left += take_left(short_right);
        used = got_left + got_right;
    }
    CfarDecision d;
    d.cells_used = used;
    if (used == 0) {
        d.threshold = kInf;
        return d;
    }
    d.noise_estimate = sum / static_cast<double>(used);
    d.threshold = cfg.alpha_cfar() * d.noise_estimate;
    d.detected = map.at(cell.row, cell.col) > d.threshold;
    return d;
}

DetectionReport hierarchical_detect(const RdMap& map, const CfarConfig& cfg) {
    DetectionReport rep;
    const auto cand = local_maxima(map);
    rep.local_maxima = cand.size();
    if (cand.empty()) return rep;

    // Stage 1: range-axis CFAR over the local maxima.
    std::vector<CfarDecision> d1(cand.size());
    std::vector<char> pass(cand.size(), 0);
    std::vector<char> mask(map.rows * map.cols, 0);
    bool any = false;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        d1[i] = cfar_1d(map, cand[i], Axis::Range, cfg);
        if (d1[i].detected) {
            pass[i] = 1;
            mask[cand[i].row * map.cols + cand[i].col] = 1;
            any = true;
        }
    }
    if (cfg.censor_range && any) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (pass[i]) continue;
            d1[i] = cfar_1d(map, cand[i], Axis::Range, cfg, &mask);
            if (d1[i].detected) pass[i] = 2;
        }
    }
    std::vector<std::size_t> stage1;
    std::fill(mask.begin(), mask.end(), 0);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (!pass[i]) continue;
        stage1.push_back(i);
        mask[cand[i].row * map.cols + cand[i].col] = 1;
    }
    rep.stage1_candidates = stage1.size();

    // Stage 2: Doppler-axis CFAR, other stage-1 candidates excluded from training.
    for (std::size_t i : stage1) {
        const auto d2 = cfar_1d(map, cand[i], Axis::Doppler, cfg, &mask);
        if (!d2.detected) continue;
        rep.detections.push_back({cand[i].row, cand[i].col, map.at(cand[i].row, cand[i].col), d1[i].threshold,
                                  d2.threshold});
    }
    return rep;
}

Annulus annulus_for(const CfarConfig& cfg) {
    const std::size_t t = cfg.training_cells;
    for (long g = static_cast<long>(cfg.guard_cells / 2); g >= 0; --g) {
        const std::size_t inner = static_cast<std::size_t>((2 * g + 1) * (2 * g + 1));
        for (std::size_t w = static_cast<std::size_t>(g) + 1;; ++w) {
            const std::size_t outer = (2 * w + 1) * (2 * w + 1);
            if (outer - inner == t) return {static_cast<std::size_t>(g), w};
            if (outer - inner > t) break;
        }
    }
    throw ConfigError("no square annulus holds exactly " + std::to_string(t) + " training cells");
}

DetectionReport cfar_2d(const RdMap& map, const CfarConfig& cfg) {
    const Annulus a = annulus_for(cfg);
    const std::size_t span = 2 * a.outer_half + 1;
    if (map.rows < span || map.cols < span) throw ConfigError("map too small for the 2D training annulus");
    const double alpha = cfg.alpha_cfar();
    const long gh = static_cast<long>(a.guard_half), wh = static_cast<long>(a.outer_half);
    DetectionReport rep;
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            double sum = 0.0;
            std::size_t used = 0;
            for (long dr = -wh; dr <= wh; ++dr) {
                const long rr = static_cast<long>(r) + dr;
                if (rr < 0 || rr >= static_cast<long>(map.rows)) continue;
                for (long dc = -wh; dc <= wh; ++dc) {
                    if (std::abs(dr) <= gh && std::abs(dc) <= gh) continue;
                    const long cc = static_cast<long>(c) + dc;
                    if (cc < 0 || cc >= static_cast<long>(map.cols)) continue;
                    sum += map.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                    ++used;
                }
            }
            const double thr = alpha * sum / static_cast<double>(used);
            if (map.at(r, c) > thr) rep.detections.push_back({r, c, map.at(r, c), thr, thr});
        }
    }
    rep.stage1_candidates = rep.detections.size();
    return rep;
}

nlohmann::json to_json(const DetectionReport& rep, const RdMap& map) {
    nlohmann::json j;
    j["local_maxima"] = rep.local_maxima;
    j["stage1_candidates"] = rep.stage1_candidates;
    j["detections"] = nlohmann::json::array();
    for (const auto& d : rep.detections) {
        j["detections"].push_back({{"range_bin", d.row + 1},
                                   {"doppler_bin", map.doppler_index(d.col)},
                                   {"range_m", map.range_of_row(d.row)},
                                   {"velocity_mps", map.velocity_of_col(d.col)},
                                   {"power", d.power},
                                   {"range_threshold", d.range_threshold},
                                   {"doppler_threshold", d.doppler_threshold}});
    }
    return j;
}

void write_detections_csv(const DetectionReport& rep, const RdMap& map, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "range_bin,doppler_bin,range_m,velocity_mps,power,range_threshold,doppler_threshold\n";
    f << std::setprecision(12);
    for (const auto& d : rep.detections)
        f << d.row + 1 << ',' << map.doppler_index(d.col) << ',' << map.range_of_row(d.row) << ','
          << map.velocity_of_col(d.col) << ',' << d.power << ',' << d.range_threshold << ','
          << d.doppler_threshold << '\n';
}

} // namespace isac
