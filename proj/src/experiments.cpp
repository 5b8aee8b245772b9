#include "isac/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "isac/parallel.hpp"

namespace isac {

namespace {

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Streams of the per-trial generator, so different experiments never share draws.
enum Stream : std::uint64_t {
    kPdStream = 1,
    kMinRcsStream = 2,
    kMultiStream = 3,
    kCompareStream = 4,
};

std::uint64_t trial_index(std::size_t point, std::size_t trial) {
    return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint64_t>(trial);
}

PdPoint make_point(double range_m, std::size_t bin, std::size_t hits, std::size_t trials) {
    PdPoint p;
    p.range_m = range_m;
    p.bin = bin;
    p.hits = hits;
    p.trials = trials;
    p.pd = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
    auto [lo, hi] = wilson_interval(hits, trials);
    p.ci_low = lo;
    p.ci_high = hi;
    return p;
}

std::string weight_label(const WeightMode& m) { return "proposal_w_" + m.str(); }

// One CPI of a baseline waveform, returned as a map plus detections.
PipelineOutput baseline_cpi(const ScenarioConfig& cfg, WaveformKind kind, const std::vector<Target>& targets,
                            Rng& rng) {
    if (kind == WaveformKind::Lfm)
        return lfm_pipeline(targets, cfg.lfm, cfg.channel, cfg.pulse, cfg.cfar, rng, cfg.detector);
    return ofdm_pipeline(targets, cfg.ofdm, cfg.channel, cfg.pulse, cfg.cfar, rng, cfg.detector);
}

const char* waveform_label(WaveformKind k) {
    switch (k) {
        case WaveformKind::Proposal: return "proposal";
        case WaveformKind::Lfm: return "lfm";
        case WaveformKind::Ofdm: return "ofdm";
    }
    return "?";
}

} // namespace

//------------------------------------------------------------------------------

Provenance make_provenance(const ScenarioConfig& cfg) {
    Provenance p;
    p.config_hash = fnv1a_hex(to_json(cfg).dump());
    p.seed = cfg.seed;
    return p;
}

nlohmann::json to_json(const Provenance& p) {
    return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"code_version", p.code_version}};
}

//------------------------------------------------------------------------------

ProposalChain::ProposalChain(const ScenarioConfig& cfg)
    : cfg_(cfg),
      set_(build_sequence_set(cfg.pulse.H, cfg.pulse.L)),
      bank_(cfg.pulse, set_),
      metrics_(MetricParams::make(cfg.pulse, cfg.channel, cfg.cfar, set_, cfg.rho_db)) {
    for (std::size_t k = 0; k < 4; ++k) pulses_.push_back(build_pri(cfg_.pulse, set_, k));
}

std::vector<BranchOutputs> ProposalChain::simulate(const std::vector<Target>& targets, Rng& rng) const {
    CpiChannel ch(targets, cfg_.channel, cfg_.pulse, rng);
    std::vector<BranchOutputs> out;
    out.reserve(cfg_.pulse.K);
    for (std::size_t k = 0; k < cfg_.pulse.K; ++k) {
        TransmitPri tx = pulses_[k % 4];
        tx.pri_index = k;
        out.push_back(bank_.correlate(ch.receive(tx, rng)));
    }
    return out;
}

RdMap ProposalChain::map(const std::vector<BranchOutputs>& cpi, const WeightProfile& w) const {
    return rd_map(assemble(cpi, w, cfg_.pulse), cfg_.fft_size(), cfg_.pulse, cfg_.doppler_window);
}

WeightProfile ProposalChain::weights(const WeightMode& mode) const {
    const std::size_t bins = cfg_.pulse.delay_bins();
    switch (mode.kind) {
        case WeightMode::Optimal: return optimal_weight_profile(metrics_);
        case WeightMode::Fixed: return WeightProfile::constant(mode.w, bins);
        case WeightMode::HighOnly: return WeightProfile::high_only(bins);
        case WeightMode::LowOnly: return WeightProfile::low_only(bins);
    }
    throw std::logic_error("unknown weight mode");
}

//------------------------------------------------------------------------------

long doppler_index_of(double velocity_mps, const PulseConfig& p, std::size_t m_fft) {
    const double fd = doppler_hz(velocity_mps, p.f_c);
    const long m = static_cast<long>(m_fft);
    long idx = std::lround(fd * p.T * static_cast<double>(m_fft));
    idx %= m;
    if (idx < 0) idx += m;
    // Fold into the shifted layout: columns 0..m-1 hold indices -zero..m-1-zero.
    const long zero = (m - 1) / 2;
    if (idx > m - 1 - zero) idx -= m;
    return idx;
}

bool target_hit(const DetectionReport& rep, const RdMap& map, std::size_t bin, long doppler_index) {
    const long m = static_cast<long>(map.cols);
    for (const auto& d : rep.detections) {
        const long dr = static_cast<long>(d.row + 1) - static_cast<long>(bin);
        if (std::abs(dr) > 1) continue;
        long dc = (map.doppler_index(d.col) - doppler_index) % m;
        if (dc < 0) dc += m;
        dc = std::min(dc, m - dc);
        if (dc <= 1) return true;
    }
    return false;
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<double> range_grid(const ScenarioConfig& cfg) {
    const std::size_t n = cfg.range_points;
    std::vector<double> r(n);
    if (n == 1) {
        r[0] = cfg.range_min_m;
        return r;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        r[i] = cfg.range_grid == RangeGrid::Log
                   ? cfg.range_min_m * std::pow(cfg.range_max_m / cfg.range_min_m, t)
                   : cfg.range_min_m + t * (cfg.range_max_m - cfg.range_min_m);
    }
    return r;
}

//------------------------------------------------------------------------------

std::vector<PdCurve> run_pd_vs_range(const ScenarioConfig& cfg, const std::vector<WeightMode>& modes) {
    cfg.validate();
    const ProposalChain chain(cfg);
    std::vector<WeightProfile> profiles;
    for (const auto& m : modes) profiles.push_back(chain.weights(m));

    const auto ranges = range_grid(cfg);
    const std::size_t T = cfg.trials;
    const double rcs = db_to_lin(cfg.sweep_rcs_dbsm);
    const long dop = doppler_index_of(cfg.sweep_velocity_mps, cfg.pulse, cfg.fft_size());

    // hit[(mode * points + point) * T + trial]
    std::vector<char> hit(modes.size() * ranges.size() * T, 0);
    parallel_for(ranges.size() * T, [&](std::size_t job) {
        const std::size_t i = job / T, t = job % T;
        Rng rng = make_rng(cfg.seed, kPdStream, trial_index(i, t));
        const std::vector<Target> targets{{ranges[i], cfg.sweep_velocity_mps, rcs}};
        const std::size_t bin = delay_bin(ranges[i], cfg.pulse);
        const auto cpi = chain.simulate(targets, rng);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const RdMap map = chain.map(cpi, profiles[m]);
            const auto rep = run_detector(map, cfg.cfar, cfg.detector);
            hit[(m * ranges.size() + i) * T + t] = target_hit(rep, map, bin, dop);
        }
    });

    std::vector<PdCurve> curves;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        PdCurve c;
        c.label = weight_label(modes[m]);
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            std::size_t h = 0;
            for (std::size_t t = 0; t < T; ++t) h += hit[(m * ranges.size() + i) * T + t];
            c.points.push_back(make_point(ranges[i], delay_bin(ranges[i], cfg.pulse), h, T));
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

PdCurve run_pd_vs_range(const ScenarioConfig& cfg) {
    if (cfg.waveform == WaveformKind::Proposal) return run_pd_vs_range(cfg, {cfg.weight_mode}).front();

    cfg.validate();
    const auto ranges = range_grid(cfg);
    const std::size_t T = cfg.trials;
    const double rcs = db_to_lin(cfg.sweep_rcs_dbsm);
    const long dop = doppler_index_of(cfg.sweep_velocity_mps, cfg.pulse, cfg.fft_size());
    std::vector<char> hit(ranges.size() * T, 0);
    parallel_for(ranges.size() * T, [&](std::size_t job) {
        const std::size_t i = job / T, t = job % T;
        Rng rng = make_rng(cfg.seed, kPdStream, trial_index(i, t));
        const std::vector<Target> targets{{ranges[i], cfg.sweep_velocity_mps, rcs}};
        const auto out = baseline_cpi(cfg, cfg.waveform, targets, rng);
        hit[job] = target_hit(out.report, out.map, delay_bin(ranges[i], cfg.pulse), dop);
    });
    PdCurve c;
    c.label = waveform_label(cfg.waveform);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        std::size_t h = 0;
        for (std::size_t t = 0; t < T; ++t) h += hit[i * T + t];
        c.points.push_back(make_point(ranges[i], delay_bin(ranges[i], cfg.pulse), h, T));
    }
    return c;
}

//------------------------------------------------------------------------------

double monte_carlo_min_rcs(const ScenarioConfig& cfg, std::size_t bin, double lo_dbsm, double hi_dbsm,
                           double tol_db) {
    const ProposalChain chain(cfg);
    const WeightProfile w = chain.weights(cfg.weight_mode);
    const double range = bin_range(bin, cfg.pulse);
    const long dop = doppler_index_of(cfg.sweep_velocity_mps, cfg.pulse, cfg.fft_size());
    const std::size_t T = cfg.trials;

    // Common random numbers across RCS values keep the estimate close to monotone.
    auto pd_at = [&](double dbsm) {
        std::vector<char> hit(T, 0);
        const std::vector<Target> targets{{range, cfg.sweep_velocity_mps, db_to_lin(dbsm)}};
        parallel_for(T, [&](std::size_t t) {
            Rng rng = make_rng(cfg.seed, kMinRcsStream, trial_index(bin, t));
            const RdMap map = chain.map(chain.simulate(targets, rng), w);
            hit[t] = target_hit(run_detector(map, cfg.cfar, cfg.detector), map, bin, dop);
        });
        std::size_t h = 0;
        for (char c : hit) h += c;
        return static_cast<double>(h) / static_cast<double>(T);
    };

    // Widen the bracket if needed, then bisect in dB.
    for (int i = 0; i < 8 && pd_at(hi_dbsm) < 0.9; ++i) hi_dbsm += 10.0;
    for (int i = 0; i < 8 && pd_at(lo_dbsm) >= 0.9; ++i) lo_dbsm -= 10.0;
    while (hi_dbsm - lo_dbsm > tol_db) {
        const double mid = 0.5 * (lo_dbsm + hi_dbsm);
        if (pd_at(mid) >= 0.9)
            hi_dbsm = mid;
        else
            lo_dbsm = mid;
    }
    return 0.5 * (lo_dbsm + hi_dbsm);
}

std::vector<RcsPoint> run_min_rcs(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto ranges = range_grid(cfg);
    std::vector<RcsPoint> out;
    for (double sic : cfg.sic_list_db) {
        ScenarioConfig c = cfg;
        c.channel.sic_db = sic;
        const auto set = build_sequence_set(c.pulse.H, c.pulse.L);
        const auto mp = MetricParams::make(c.pulse, c.channel, c.cfar, set, c.rho_db);
        for (double r : ranges) {
            RcsPoint p;
            p.range_m = r;
            p.bin = delay_bin(r, c.pulse);
            p.sic_db = sic;
            p.proposal_dbsm = lin_to_db(min_detectable_rcs(p.bin, mp.rho, mp));
            p.lfm_dbsm = lin_to_db(lfm_min_rcs(p.bin, c.lfm, mp));
            p.ofdm_dbsm = lin_to_db(ofdm_min_rcs(p.bin, c.ofdm, c.pulse.M(), mp));
            p.monte_carlo_dbsm = std::numeric_limits<double>::quiet_NaN();
            if (c.monte_carlo_min_rcs && std::isfinite(p.proposal_dbsm))
                p.monte_carlo_dbsm = monte_carlo_min_rcs(c, p.bin, p.proposal_dbsm - 3.0, p.proposal_dbsm + 3.0);
            out.push_back(p);
        }
    }
    return out;
}

//------------------------------------------------------------------------------

std::size_t MultiTargetResult::proposal_detected() const {
    return static_cast<std::size_t>(std::count_if(proposal.begin(), proposal.end(),
                                                  [](const TargetOutcome& o) { return o.detected(); }));
}

std::size_t MultiTargetResult::reference_detected() const {
    return static_cast<std::size_t>(std::count_if(reference.begin(), reference.end(),
                                                  [](const TargetOutcome& o) { return o.detected(); }));
}

std::vector<Target> targets_at_bins(const std::vector<std::size_t>& bins, const std::vector<double>& rcs_dbsm,
                                    const PulseConfig& p) {
    if (bins.size() != rcs_dbsm.size()) throw std::invalid_argument("bins and rcs lists differ in length");
    std::vector<Target> t;
    for (std::size_t i = 0; i < bins.size(); ++i) t.push_back({bin_range(bins[i], p), 0.0, db_to_lin(rcs_dbsm[i])});
    return t;
}

MultiTargetResult run_multi_target(const ScenarioConfig& cfg, WaveformKind baseline) {
    cfg.validate();
    if (cfg.targets.empty()) throw ConfigError("multi_target needs at least one target");
    if (baseline == WaveformKind::Proposal) throw ConfigError("baseline must be lfm or ofdm");
    const ProposalChain chain(cfg);
    const WeightProfile w = chain.weights(cfg.weight_mode);
    const std::size_t T = cfg.trials, nt = cfg.targets.size();

    std::vector<std::size_t> bins;
    std::vector<long> dops;
    for (const auto& t : cfg.targets) {
        bins.push_back(delay_bin(t.range_m, cfg.pulse));
        dops.push_back(doppler_index_of(t.velocity_mps, cfg.pulse, cfg.fft_size()));
    }

    std::vector<char> prop(T * nt, 0), ref(T * nt, 0);
    parallel_for(T, [&](std::size_t t) {
        Rng rng = make_rng(cfg.seed, kMultiStream, trial_index(0, t));
        const RdMap map = chain.map(chain.simulate(cfg.targets, rng), w);
        const auto rep = run_detector(map, cfg.cfar, cfg.detector);
        Rng rng_b = make_rng(cfg.seed, kMultiStream, trial_index(1, t));
        const auto out = baseline_cpi(cfg, baseline, cfg.targets, rng_b);
        for (std::size_t j = 0; j < nt; ++j) {
            prop[t * nt + j] = target_hit(rep, map, bins[j], dops[j]);
            ref[t * nt + j] = target_hit(out.report, out.map, bins[j], dops[j]);
        }
    });

    MultiTargetResult r;
    r.baseline = waveform_label(baseline);
    for (std::size_t j = 0; j < nt; ++j) {
        TargetOutcome p{cfg.targets[j], bins[j], 0, T}, b{cfg.targets[j], bins[j], 0, T};
        for (std::size_t t = 0; t < T; ++t) {
            p.hits += prop[t * nt + j];
            b.hits += ref[t * nt + j];
        }
        r.proposal.push_back(p);
        r.reference.push_back(b);
    }
    return r;
}

//------------------------------------------------------------------------------

double crossing_range(const PdCurve& c, double level, int which) {
    auto val = [&](const PdPoint& p) { return which < 0 ? p.ci_low : which > 0 ? p.ci_high : p.pd; };
    const auto& pts = c.points;
    if (pts.empty()) return 0.0;
    // Walk outward from the last point at or above the level that precedes the final drop.
    std::size_t last = pts.size();
    for (std::size_t i = pts.size(); i-- > 0;) {
        if (val(pts[i]) >= level) {
            last = i;
            break;
        }
    }
    if (last == pts.size()) return 0.0;
    if (last + 1 == pts.size()) return pts[last].range_m;
    const double v0 = val(pts[last]), v1 = val(pts[last + 1]);
    const double f = (v0 - level) / (v0 - v1);
    return pts[last].range_m + f * (pts[last + 1].range_m - pts[last].range_m);
}

DetectorCompareResult run_detector_compare(const ScenarioConfig& cfg) {
    cfg.validate();
    const ProposalChain chain(cfg);
    const WeightProfile w = chain.weights(cfg.weight_mode);
    const auto ranges = range_grid(cfg);
    const std::size_t T = cfg.trials;
    const double rcs = db_to_lin(cfg.sweep_rcs_dbsm);
    const long dop = doppler_index_of(cfg.sweep_velocity_mps, cfg.pulse, cfg.fft_size());

    CfarConfig c1 = cfg.cfar, c2 = cfg.cfar;
    if (cfg.compare_equal_pfa) {
        const std::size_t rows = cfg.pulse.delay_bins(), cols = cfg.fft_size();
        c1.alpha = calibrate_detector_alpha(Detector::Hierarchical, cfg.cfar, rows, cols, cfg.calibration_cells,
                                            cfg.seed);
        c2.alpha = calibrate_detector_alpha(Detector::Cfar2d, cfg.cfar, rows, cols, cfg.calibration_cells, cfg.seed);
    }

    std::vector<char> h1(ranges.size() * T, 0), h2(ranges.size() * T, 0);
    parallel_for(ranges.size() * T, [&](std::size_t job) {
        const std::size_t i = job / T, t = job % T;
        Rng rng = make_rng(cfg.seed, kCompareStream, trial_index(i, t));
        const std::vector<Target> targets{{ranges[i], cfg.sweep_velocity_mps, rcs}};
        const std::size_t bin = delay_bin(ranges[i], cfg.pulse);
        const RdMap map = chain.map(chain.simulate(targets, rng), w);
        h1[job] = target_hit(hierarchical_detect(map, c1), map, bin, dop);
        h2[job] = target_hit(cfar_2d(map, c2), map, bin, dop);
    });

    DetectorCompareResult r;
    r.alpha_hierarchical = c1.alpha_cfar();
    r.alpha_2d = c2.alpha_cfar();
    r.hierarchical.label = "hierarchical_1d";
    r.cfar2d.label = "cfar_2d";
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        std::size_t a = 0, b = 0;
        for (std::size_t t = 0; t < T; ++t) {
            a += h1[i * T + t];
            b += h2[i * T + t];
        }
        const std::size_t bin = delay_bin(ranges[i], cfg.pulse);
        r.hierarchical.points.push_back(make_point(ranges[i], bin, a, T));
        r.cfar2d.points.push_back(make_point(ranges[i], bin, b, T));
    }
    r.max_range_hierarchical = crossing_range(r.hierarchical, 0.9);
    r.max_range_2d = crossing_range(r.cfar2d, 0.9);
    r.range_ci_hierarchical = {crossing_range(r.hierarchical, 0.9, -1), crossing_range(r.hierarchical, 0.9, +1)};
    r.range_ci_2d = {crossing_range(r.cfar2d, 0.9, -1), crossing_range(r.cfar2d, 0.9, +1)};
    return r;
}

//------------------------------------------------------------------------------

void write_pd_csv(const std::vector<PdCurve>& curves, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << std::setprecision(10);
    f << "curve,range_m,delay_bin,hits,trials,pd,ci_low,ci_high\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            f << c.label << ',' << p.range_m << ',' << p.bin << ',' << p.hits << ',' << p.trials << ',' << p.pd
              << ',' << p.ci_low << ',' << p.ci_high << '\n';
}

void write_rcs_csv(const std::vector<RcsPoint>& pts, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << std::setprecision(10);
    f << "sic_dB,range_m,delay_bin,proposal_dBsm,lfm_dBsm,ofdm_dBsm,monte_carlo_dBsm\n";
    for (const auto& p : pts)
        f << p.sic_db << ',' << p.range_m << ',' << p.bin << ',' << p.proposal_dbsm << ',' << p.lfm_dbsm << ','
          << p.ofdm_dbsm << ',' << p.monte_carlo_dbsm << '\n';
}

nlohmann::json to_json(const PdCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points)
        pts.push_back({{"range_m", p.range_m}, {"delay_bin", p.bin}, {"hits", p.hits}, {"trials", p.trials},
                       {"pd", p.pd}, {"ci_low", p.ci_low}, {"ci_high", p.ci_high}});
    return {{"label", c.label}, {"points", pts}};
}

nlohmann::json to_json(const MultiTargetResult& r) {
    auto side = [](const std::vector<TargetOutcome>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& o : v)
            a.push_back({{"range_m", o.target.range_m},
                         {"rcs_dBsm", lin_to_db(o.target.rcs_m2)},
                         {"delay_bin", o.bin},
                         {"hits", o.hits},
                         {"trials", o.trials},
                         {"detected", o.detected()}});
        return a;
    };
    return {{"baseline", r.baseline},
            {"proposal", side(r.proposal)},
            {"reference", side(r.reference)},
            {"proposal_detected", r.proposal_detected()},
            {"reference_detected", r.reference_detected()}};
}

nlohmann::json to_json(const DetectorCompareResult& r) {
    return {{"hierarchical", to_json(r.hierarchical)},
            {"cfar_2d", to_json(r.cfar2d)},
            {"max_range_hierarchical_m", r.max_range_hierarchical},
            {"max_range_2d_m", r.max_range_2d},
            {"range_ci_hierarchical_m", {r.range_ci_hierarchical.first, r.range_ci_hierarchical.second}},
            {"range_ci_2d_m", {r.range_ci_2d.first, r.range_ci_2d.second}},
            {"alpha_hierarchical", r.alpha_hierarchical},
            {"alpha_2d", r.alpha_2d}};
}

} // namespace isac
