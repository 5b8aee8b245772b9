// Command-line front end: one subcommand per experiment, results written to an output directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "isac/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isac;

namespace {

struct Options {
    std::string config;
    std::string out = "isac_out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> sic_db;
    std::optional<std::string> weight_mode;
};

ScenarioConfig effective_config(const Options& o, ExperimentKind kind) {
    ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_scenario(o.config);
    cfg.experiment = kind;
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.channel.rng_seed = *o.seed;
    }
    if (o.trials) cfg.trials = *o.trials;
    if (o.sic_db) cfg.channel.sic_db = *o.sic_db;
    if (o.weight_mode) cfg.weight_mode = WeightMode::parse(*o.weight_mode);
    cfg.validate();
    return cfg;
}

void write_json(const json& j, const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot open " + p.string());
    f << j.dump(2) << '\n';
}

json run_rdmap(const ScenarioConfig& cfg, const fs::path& dir) {
    Rng rng = make_rng(cfg.seed, 0);
    RdMap map;
    DetectionReport rep;
    if (cfg.waveform == WaveformKind::Proposal) {
        const ProposalChain chain(cfg);
        map = chain.map(chain.simulate(cfg.targets, rng), chain.weights(cfg.weight_mode));
        rep = run_detector(map, cfg.cfar, cfg.detector);
    } else if (cfg.waveform == WaveformKind::Lfm) {
        auto out = lfm_pipeline(cfg.targets, cfg.lfm, cfg.channel, cfg.pulse, cfg.cfar, rng, cfg.detector);
        map = std::move(out.map);
        rep = std::move(out.report);
    } else {
        auto out = ofdm_pipeline(cfg.targets, cfg.ofdm, cfg.channel, cfg.pulse, cfg.cfar, rng, cfg.detector);
        map = std::move(out.map);
        rep = std::move(out.report);
    }
    write_rd_csv(map, (dir / "rd_map.csv").string());
    write_rd_binary(map, (dir / "rd_map").string());
    write_detections_csv(rep, map, (dir / "detections.csv").string());
    return {{"map", rd_metadata(map)}, {"detections", to_json(rep, map)}};
}

json run_experiment(const ScenarioConfig& cfg, const fs::path& dir) {
    switch (cfg.experiment) {
        case ExperimentKind::RdMap: return run_rdmap(cfg, dir);
        case ExperimentKind::PdVsRange: {
            const PdCurve c = run_pd_vs_range(cfg);
            write_pd_csv({c}, (dir / "pd_vs_range.csv").string());
            return {{"curve", to_json(c)}, {"success_rule", "detection within +-1 range bin and +-1 Doppler bin"}};
        }
        case ExperimentKind::MinRcs: {
            const auto pts = run_min_rcs(cfg);
            write_rcs_csv(pts, (dir / "min_rcs.csv").string());
            return {{"points", pts.size()}, {"monte_carlo", cfg.monte_carlo_min_rcs}};
        }
        case ExperimentKind::MultiTarget: {
            json j = json::object();
            for (WaveformKind b : {WaveformKind::Ofdm, WaveformKind::Lfm}) {
                const auto r = run_multi_target(cfg, b);
                j[r.baseline] = to_json(r);
            }
            return j;
        }
        case ExperimentKind::DetectorCompare: {
            const auto r = run_detector_compare(cfg);
            write_pd_csv({r.hierarchical, r.cfar2d}, (dir / "detector_compare.csv").string());
            return to_json(r);
        }
        case ExperimentKind::MetricSweep: {
            const auto set = build_sequence_set(cfg.pulse.H, cfg.pulse.L);
            const auto mp = MetricParams::make(cfg.pulse, cfg.channel, cfg.cfar, set, cfg.rho_db);
            const auto rows = metric_sweep(mp, db_to_lin(cfg.sweep_rcs_dbsm));
            write_metric_csv(rows, (dir / "metric_sweep.csv").string());
            return {{"rows", rows.size()}, {"rcs_dBsm", cfg.sweep_rcs_dbsm}};
        }
        case ExperimentKind::SequenceVerify: {
            const auto set = build_sequence_set(cfg.pulse.H, cfg.pulse.L);
            const auto v = verify_set(set);
            write_json(to_json(set), dir / "sequence_set.json");
            return {{"autocorr_residual_high", v.autocorr_residual_high},
                    {"autocorr_residual_low", v.autocorr_residual_low},
                    {"cross_residual", v.cross_residual},
                    {"exact", v.exact()}};
        }
    }
    return {};
}

int execute(const Options& o, ExperimentKind kind) {
    ScenarioConfig cfg;
    try {
        cfg = effective_config(o, kind);
    } catch (const std::exception& e) {
        std::cout << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    try {
        const fs::path dir(o.out);
        fs::create_directories(dir);
        write_json(to_json(cfg), dir / "config.json");
        json summary{{"experiment", experiment_name(kind)}, {"provenance", to_json(make_provenance(cfg))}};
        summary["result"] = run_experiment(cfg, dir);
        write_json(summary, dir / "summary.json");
        std::cout << summary.dump() << '\n';
    } catch (const ConfigError& e) {
        std::cout << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cout << json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-power phase-coded ISAC sensing simulator"};
    app.require_subcommand(1);

    Options opt;
    const ExperimentKind kinds[] = {ExperimentKind::RdMap,       ExperimentKind::PdVsRange,
                                    ExperimentKind::MinRcs,      ExperimentKind::MultiTarget,
                                    ExperimentKind::DetectorCompare, ExperimentKind::MetricSweep,
                                    ExperimentKind::SequenceVerify};
    std::optional<ExperimentKind> chosen;
    for (ExperimentKind k : kinds) {
        auto* sub = app.add_subcommand(experiment_name(k), "Run the " + experiment_name(k) + " experiment");
        sub->add_option("-c,--config", opt.config, "Scenario file (key = value)");
        sub->add_option("-o,--out", opt.out, "Output directory");
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--trials", opt.trials, "Monte Carlo trials per point");
        sub->add_option("--sic-db", opt.sic_db, "SIC depth in dB");
        sub->add_option("--weight-mode", opt.weight_mode, "optimal | high_only | low_only | fixed:<w>");
        sub->callback([&chosen, k] { chosen = k; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return execute(opt, *chosen);
}
