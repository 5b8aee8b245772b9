#include "isac/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace isac {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d < 0 || d != std::floor(d)) throw ConfigError("key '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' must be true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

// Chip count of a duration, which must be an integer multiple of T_p.
std::size_t chips_of(const std::string& key, double us, double T_p) {
    const double n = us * 1e-6 / T_p;
    const double r = std::round(n);
    if (r < 0 || std::abs(n - r) > 1e-6 * std::max(1.0, r))
        throw ConfigError("key '" + key + "' is not a whole number of chips");
    return static_cast<std::size_t>(r);
}

} // namespace

WeightMode WeightMode::parse(const std::string& s) {
    WeightMode m;
    if (s == "optimal") return m;
    if (s == "high_only" || s == "0") {
        m.kind = HighOnly;
        return m;
    }
    if (s == "low_only" || s == "inf") {
        m.kind = LowOnly;
        return m;
    }
    std::string v = s.rfind("fixed:", 0) == 0 ? s.substr(6) : s;
    m.kind = Fixed;
    m.w = to_double("weight_mode", v);
    if (!(m.w >= 0.0)) throw ConfigError("fixed weight must be nonnegative");
    if (std::isinf(m.w)) m.kind = LowOnly;
    return m;
}

std::string WeightMode::str() const {
    switch (kind) {
        case Optimal: return "optimal";
        case HighOnly: return "high_only";
        case LowOnly: return "low_only";
        case Fixed: {
            std::ostringstream os;
            os << "fixed:" << w;
            return os.str();
        }
    }
    return "optimal";
}

std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::RdMap: return "rdmap";
        case ExperimentKind::PdVsRange: return "pd_vs_range";
        case ExperimentKind::MinRcs: return "min_rcs";
        case ExperimentKind::MultiTarget: return "multi_target";
        case ExperimentKind::DetectorCompare: return "detector_compare";
        case ExperimentKind::MetricSweep: return "metric_sweep";
        case ExperimentKind::SequenceVerify: return "sequence_verify";
    }
    return "rdmap";
}

ExperimentKind parse_experiment(const std::string& s) {
    for (auto k : {ExperimentKind::RdMap, ExperimentKind::PdVsRange, ExperimentKind::MinRcs,
                   ExperimentKind::MultiTarget, ExperimentKind::DetectorCompare, ExperimentKind::MetricSweep,
                   ExperimentKind::SequenceVerify})
        if (experiment_name(k) == s) return k;
    throw ConfigError("unknown experiment '" + s + "'");
}

void ScenarioConfig::validate() const {
    pulse.validate();
    channel.validate();
    cfar.validate();
    ofdm.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (m_fft != 0 && m_fft < pulse.K) throw ConfigError("m_fft must be >= K");
    if (!(range_min_m > 0.0) || !(range_max_m >= range_min_m)) throw ConfigError("invalid range sweep bounds");
    if (range_points < 1) throw ConfigError("range_points must be >= 1");
    if (weight_mode.kind == WeightMode::Fixed && !(weight_mode.w >= 0.0))
        throw ConfigError("fixed weight must be nonnegative");
    for (const auto& t : targets)
        if (!(t.range_m > 0.0) || t.rcs_m2 < 0.0) throw ConfigError("targets need positive range and RCS");
    const double max_range = static_cast<double>(pulse.delay_bins()) * pulse.range_per_bin();
    if (range_max_m > max_range + pulse.range_per_bin())
        throw ConfigError("range_max_m exceeds the modelled delay window");
}

ScenarioConfig parse_scenario(const std::string& text) {
    std::multimap<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        kv.emplace(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    ScenarioConfig c;
    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    PulseConfig& p = c.pulse;
    if (auto v = take("f_c_GHz")) p.f_c = to_double("f_c_GHz", *v) * 1e9;
    if (auto v = take("B_MHz")) p.B = to_double("B_MHz", *v) * 1e6;
    p.T_p = 1.0 / p.B;
    if (auto v = take("T_p_us")) p.T_p = to_double("T_p_us", *v) * 1e-6;
    if (auto v = take("T_us")) p.T = to_double("T_us", *v) * 1e-6;
    if (auto v = take("K")) p.K = to_count("K", *v);
    if (auto v = take("P_h_dBm")) p.P_h = dbm_to_watts(to_double("P_h_dBm", *v));
    if (auto v = take("P_l_dBm")) p.P_l = dbm_to_watts(to_double("P_l_dBm", *v));

    const std::size_t M_default = p.M();
    if (auto v = take("T_h_us")) p.H = chips_of("T_h_us", to_double("T_h_us", *v), p.T_p);
    if (auto v = take("T_l_us")) p.L = chips_of("T_l_us", to_double("T_l_us", *v), p.T_p);
    if (auto v = take("T_r_us")) p.N_r = chips_of("T_r_us", to_double("T_r_us", *v), p.T_p);
    if (auto v = take("H")) p.H = to_count("H", *v);
    if (auto v = take("L")) p.L = to_count("L", *v);
    if (auto v = take("N_r")) p.N_r = to_count("N_r", *v);
    std::size_t M = M_default;
    if (auto v = take("T_t_us")) M = chips_of("T_t_us", to_double("T_t_us", *v), p.T_p);
    if (M <= p.H + p.N_r + p.L) throw ConfigError("symbol too short for the pulse layout");
    p.S = M - p.H - p.N_r - p.L;
    if (auto v = take("S")) {
        p.S = to_count("S", *v);
        if (take("T_t_us") && p.M() != M) throw ConfigError("S inconsistent with T_t_us");
    }

    ChannelConfig& ch = c.channel;
    ch = ChannelConfig::for_pulse(p);
    if (auto v = take("N0_dBm_per_Hz")) ch.N0_w_per_hz = dbm_to_watts(to_double("N0_dBm_per_Hz", *v));
    if (auto v = take("noise_figure_dB")) ch.noise_figure_db = to_double("noise_figure_dB", *v);
    if (auto v = take("G_t_dBi")) ch.G_t = db_to_lin(to_double("G_t_dBi", *v));
    if (auto v = take("G_r_dBi")) ch.G_r = db_to_lin(to_double("G_r_dBi", *v));
    if (auto v = take("SIC_dB")) ch.sic_db = to_double("SIC_dB", *v);
    if (auto v = take("fractional_delay")) ch.fractional_delay = to_bool("fractional_delay", *v);

    CfarConfig& cf = c.cfar;
    if (auto v = take("guard_cells")) cf.guard_cells = to_count("guard_cells", *v);
    if (auto v = take("training_cells")) cf.training_cells = to_count("training_cells", *v);
    if (auto v = take("P_FA")) cf.p_fa = to_double("P_FA", *v);
    if (auto v = take("alpha_cfar")) cf.alpha = to_double("alpha_cfar", *v);
    if (auto v = take("censor_range")) cf.censor_range = to_bool("censor_range", *v);
    if (auto v = take("rho_dB")) c.rho_db = to_double("rho_dB", *v);

    c.lfm = LfmConfig::matched_to(p);
    if (auto v = take("lfm_full_window_rsi")) c.lfm.full_window_rsi = to_bool("lfm_full_window_rsi", *v);
    c.ofdm.power = p.P_l;
    if (auto v = take("ofdm_power_dBm")) c.ofdm.power = dbm_to_watts(to_double("ofdm_power_dBm", *v));

    if (auto v = take("experiment")) c.experiment = parse_experiment(*v);
    if (auto v = take("waveform")) {
        if (*v == "proposal") c.waveform = WaveformKind::Proposal;
        else if (*v == "lfm") c.waveform = WaveformKind::Lfm;
        else if (*v == "ofdm") c.waveform = WaveformKind::Ofdm;
        else throw ConfigError("unknown waveform '" + *v + "'");
    }
    if (auto v = take("detector")) {
        if (*v == "hierarchical") c.detector = Detector::Hierarchical;
        else if (*v == "2d") c.detector = Detector::Cfar2d;
        else throw ConfigError("unknown detector '" + *v + "'");
    }
    if (auto v = take("weight_mode")) c.weight_mode = WeightMode::parse(*v);
    if (auto v = take("trials")) c.trials = to_count("trials", *v);
    if (auto v = take("seed")) {
        c.seed = static_cast<std::uint64_t>(to_count("seed", *v));
        ch.rng_seed = c.seed;
    }
    if (auto v = take("m_fft")) c.m_fft = to_count("m_fft", *v);
    if (auto v = take("doppler_window")) {
        if (*v == "rect") c.doppler_window = DopplerWindow::Rectangular;
        else if (*v == "hann") c.doppler_window = DopplerWindow::Hann;
        else throw ConfigError("doppler_window must be rect or hann");
    }
    if (auto v = take("range_min_m")) c.range_min_m = to_double("range_min_m", *v);
    if (auto v = take("range_max_m")) c.range_max_m = to_double("range_max_m", *v);
    if (auto v = take("range_points")) c.range_points = to_count("range_points", *v);
    if (auto v = take("range_grid")) {
        if (*v == "log") c.range_grid = RangeGrid::Log;
        else if (*v == "linear") c.range_grid = RangeGrid::Linear;
        else throw ConfigError("range_grid must be log or linear");
    }
    if (auto v = take("rcs_dBsm")) c.sweep_rcs_dbsm = to_double("rcs_dBsm", *v);
    if (auto v = take("velocity_mps")) c.sweep_velocity_mps = to_double("velocity_mps", *v);
    if (auto v = take("sic_list_dB")) {
        c.sic_list_db.clear();
        for (const auto& s : split(*v, ',')) c.sic_list_db.push_back(to_double("sic_list_dB", s));
    }
    if (auto v = take("monte_carlo_min_rcs")) c.monte_carlo_min_rcs = to_bool("monte_carlo_min_rcs", *v);
    if (auto v = take("compare_thresholds")) {
        if (*v == "equal_pfa") c.compare_equal_pfa = true;
        else if (*v == "analytic") c.compare_equal_pfa = false;
        else throw ConfigError("compare_thresholds must be equal_pfa or analytic");
    }
    if (auto v = take("calibration_cells")) c.calibration_cells = to_count("calibration_cells", *v);

    auto range = kv.equal_range("target");
    for (auto it = range.first; it != range.second; ++it) {
        const auto parts = split(it->second, ',');
        if (parts.size() != 3) throw ConfigError("target needs range_m, velocity_mps, rcs_dBsm");
        c.targets.push_back({to_double("target", parts[0]), to_double("target", parts[1]),
                             db_to_lin(to_double("target", parts[2]))});
    }

    static const char* known[] = {
        "f_c_GHz", "B_MHz", "T_p_us", "T_us", "K", "P_h_dBm", "P_l_dBm", "T_h_us", "T_l_us", "T_r_us", "T_t_us",
        "H", "L", "N_r", "S", "N0_dBm_per_Hz", "noise_figure_dB", "G_t_dBi", "G_r_dBi", "SIC_dB",
        "fractional_delay", "guard_cells", "training_cells", "P_FA", "alpha_cfar", "censor_range", "rho_dB",
        "lfm_full_window_rsi", "ofdm_power_dBm", "experiment", "waveform", "detector", "weight_mode", "trials",
        "seed", "m_fft", "doppler_window", "range_min_m", "range_max_m", "range_points", "range_grid",
        "rcs_dBsm", "velocity_mps", "sic_list_dB", "monte_carlo_min_rcs", "compare_thresholds",
        "calibration_cells", "target"};
    for (const auto& [k, v] : kv)
        if (std::find(std::begin(known), std::end(known), k) == std::end(known))
            throw ConfigError("unknown key '" + k + "'");
        else if (k != "target" && kv.count(k) > 1)
            throw ConfigError("key '" + k + "' given more than once");

    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

nlohmann::json to_json(const ScenarioConfig& c) {
    const auto& p = c.pulse;
    nlohmann::json j;
    j["pulse"] = {{"P_h_W", p.P_h}, {"P_l_W", p.P_l}, {"H", p.H}, {"L", p.L}, {"N_r", p.N_r}, {"S", p.S},
                  {"M", p.M()}, {"T_p_s", p.T_p}, {"T_s", p.T}, {"K", p.K}, {"f_c_Hz", p.f_c}, {"B_Hz", p.B}};
    j["channel"] = {{"G_t", c.channel.G_t}, {"G_r", c.channel.G_r}, {"wavelength_m", c.channel.wavelength_m},
                    {"N0_W_per_Hz", c.channel.N0_w_per_hz}, {"noise_figure_dB", c.channel.noise_figure_db},
                    {"SIC_dB", std::isinf(c.channel.sic_db) ? nlohmann::json("inf") : nlohmann::json(c.channel.sic_db)},
                    {"fractional_delay", c.channel.fractional_delay}};
    j["cfar"] = {{"guard_cells", c.cfar.guard_cells}, {"training_cells", c.cfar.training_cells},
                 {"P_FA", c.cfar.p_fa}, {"alpha_cfar", c.cfar.alpha_cfar()}, {"censor_range", c.cfar.censor_range}};
    j["targets"] = nlohmann::json::array();
    for (const auto& t : c.targets)
        j["targets"].push_back({{"range_m", t.range_m}, {"velocity_mps", t.velocity_mps},
                                {"rcs_dBsm", lin_to_db(t.rcs_m2)}});
    j["experiment"] = experiment_name(c.experiment);
    j["waveform"] = c.waveform == WaveformKind::Proposal ? "proposal" : c.waveform == WaveformKind::Lfm ? "lfm" : "ofdm";
    j["detector"] = c.detector == Detector::Hierarchical ? "hierarchical" : "2d";
    j["weight_mode"] = c.weight_mode.str();
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["rho_dB"] = c.rho_db;
    j["m_fft"] = c.fft_size();
    j["doppler_window"] = c.doppler_window == DopplerWindow::Hann ? "hann" : "rect";
    j["sweep"] = {{"range_min_m", c.range_min_m}, {"range_max_m", c.range_max_m},
                  {"range_points", c.range_points}, {"range_grid", c.range_grid == RangeGrid::Log ? "log" : "linear"},
                  {"rcs_dBsm", c.sweep_rcs_dbsm}, {"velocity_mps", c.sweep_velocity_mps},
                  {"sic_list_dB", c.sic_list_db}, {"monte_carlo_min_rcs", c.monte_carlo_min_rcs}};
    j["ofdm_power_W"] = c.ofdm.power;
    j["lfm_full_window_rsi"] = c.lfm.full_window_rsi;
    j["compare_thresholds"] = c.compare_equal_pfa ? "equal_pfa" : "analytic";
    j["calibration_cells"] = c.calibration_cells;
    return j;
}

} // namespace isac
