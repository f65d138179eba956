#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "homsim/counting.hpp"
#include "homsim/errors.hpp"
#include "homsim/sources.hpp"

// Run configuration: the experiment description plus grid and output
// settings, loadable from a JSON file. The committed defaults reproduce the
// published operating table of the two sources.

namespace homsim {

struct RunConfig {
    ExperimentConfig experiment;
    int grid_points = 512;
    double grid_span_factor = 8.0;
    DurationRule duration_rule = DurationRule::kQuadrature;

    std::vector<std::string> validate() const {
        auto warnings = experiment.validate();
        if (grid_points < 128 || (grid_points & (grid_points - 1)) != 0)
            throw ConfigError("config: /grid/points must be a power of two >= 128");
        if (grid_span_factor < 8.0)
            throw ConfigError("config: /grid/span_factor must be >= 8");
        return warnings;
    }

    FrequencyGrid signal_grid(const SourceSpec& src) const {
        FrequencyGrid g = grid_for_filter(src.signal_filter, grid_points, grid_span_factor);
        g.validate();
        return g;
    }
    // Both sources share one idler grid (the states must be compared on it);
    // sized by the wider of the two idler filters.
    FrequencyGrid idler_grid() const {
        const FilterSpec& wider =
            experiment.source_a.idler_filter.bandwidth_angular() >=
                    experiment.source_b.idler_filter.bandwidth_angular()
                ? experiment.source_a.idler_filter
                : experiment.source_b.idler_filter;
        FrequencyGrid g = grid_for_filter(wider, grid_points, grid_span_factor);
        g.validate();
        return g;
    }
};

// Operating parameters of the two sources as published: 1064 nm / 7 ps /
// 0.7 nm / 80 MHz pump; MF 20 cm with 150 pm signal and 600 pm idler
// filters; PPLN/W 2 cm with 500 pm signal and 600 pm idler filters and
// 6 ps of pump-signal walk-off; mu = 0.05 pairs per pulse. Detector arms
// are calibrated from the trigger/coincidence rates (100/80 kHz, 1/0.5 kHz);
// the fibre source's Raman rate and the gated InGaAs dark probability are
// calibrated to the measured background (0.145 counts/min) and CAR (~20).
inline RunConfig paper_default_config() {
    RunConfig cfg;

    PumpPulse pump;
    pump.center_wavelength_nm = 1064.0;
    pump.duration_fwhm_ps = 7.0;
    pump.bandwidth_fwhm_nm = 0.7;
    pump.repetition_rate_mhz = 80.0;

    SourceSpec mf;
    mf.name = "MF";
    mf.process = PairProcess::kFwm;
    mf.medium_length_cm = 20.0;
    mf.pump = pump;
    mf.signal_filter = {FilterShape::kRectangular, 809.2, 150.0};
    mf.idler_filter = {FilterShape::kRectangular, 1553.3, 600.0};
    mf.pairs_per_pulse = 0.05;
    mf.walkoff_rate_ps_per_cm = 0.0;  // fibre length chosen to null it
    mf.noise_photons_per_pulse = 0.005;

    SourceSpec ppln;
    ppln.name = "PPLN/W";
    ppln.process = PairProcess::kTwm;
    ppln.medium_length_cm = 2.0;
    ppln.pump = pump;
    ppln.signal_filter = {FilterShape::kRectangular, 809.2, 500.0};
    ppln.idler_filter = {FilterShape::kRectangular, 1553.3, 600.0};
    ppln.pairs_per_pulse = 0.05;
    ppln.walkoff_rate_ps_per_cm = 3.0;  // 6 ps over 2 cm
    ppln.noise_photons_per_pulse = 0.0;

    const ArmEfficiencies eff_mf = calibrate_efficiencies(100.0, 1.0, 80.0, 0.05);
    const ArmEfficiencies eff_ppln = calibrate_efficiencies(80.0, 0.5, 80.0, 0.05);

    cfg.experiment.source_a = mf;
    cfg.experiment.source_b = ppln;
    cfg.experiment.det_signal_a = {eff_mf.signal_arm, 1e-6, false};
    cfg.experiment.det_signal_b = {eff_ppln.signal_arm, 1e-6, false};
    cfg.experiment.det_idler_a = {eff_mf.idler_arm, 3e-4, true};
    cfg.experiment.det_idler_b = {eff_ppln.idler_arm, 3e-4, true};
    cfg.experiment.splitter_reflectivity = 0.5;
    cfg.experiment.acquisition_per_point_min = 56.0;
    cfg.experiment.delays_ps = default_delays();
    cfg.experiment.rng_seed = 0;
    return cfg;
}

namespace detail {

template <typename T>
T json_field(const nlohmann::json& node, const std::string& path, const char* key) {
    if (!node.contains(key))
        throw ConfigError("config: missing field " + path + "/" + key);
    try {
        return node.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: field " + path + "/" + key + " has the wrong type");
    }
}

template <typename T>
T json_field_or(const nlohmann::json& node, const std::string& path, const char* key,
                T fallback) {
    if (!node.contains(key)) return fallback;
    return json_field<T>(node, path, key);
}

inline FilterSpec parse_filter(const nlohmann::json& node, const std::string& path) {
    FilterSpec f;
    const std::string shape = json_field<std::string>(node, path, "shape");
    if (shape == "rectangular")
        f.shape = FilterShape::kRectangular;
    else if (shape == "gaussian")
        f.shape = FilterShape::kGaussian;
    else
        throw ConfigError("config: " + path + "/shape must be rectangular|gaussian");
    f.center_wavelength_nm = json_field<double>(node, path, "center_wavelength_nm");
    f.bandwidth_fwhm_pm = json_field<double>(node, path, "bandwidth_fwhm_pm");
    return f;
}

inline SourceSpec parse_source(const nlohmann::json& node, const std::string& path,
                               const PumpPulse& pump) {
    SourceSpec s;
    s.name = json_field_or<std::string>(node, path, "name", path);
    const std::string process = json_field<std::string>(node, path, "process");
    if (process == "twm")
        s.process = PairProcess::kTwm;
    else if (process == "fwm")
        s.process = PairProcess::kFwm;
    else
        throw ConfigError("config: " + path + "/process must be twm|fwm");
    s.medium_length_cm = json_field<double>(node, path, "medium_length_cm");
    s.pump = pump;
    if (!node.contains("signal_filter") || !node.contains("idler_filter"))
        throw ConfigError("config: " + path + " needs signal_filter and idler_filter");
    s.signal_filter = parse_filter(node.at("signal_filter"), path + "/signal_filter");
    s.idler_filter = parse_filter(node.at("idler_filter"), path + "/idler_filter");
    s.pairs_per_pulse = json_field<double>(node, path, "pairs_per_pulse");
    s.walkoff_rate_ps_per_cm =
        json_field_or<double>(node, path, "walkoff_rate_ps_per_cm", 0.0);
    s.noise_photons_per_pulse =
        json_field_or<double>(node, path, "noise_photons_per_pulse", 0.0);
    return s;
}

inline DetectorSpec parse_detector(const nlohmann::json& node, const std::string& path) {
    DetectorSpec d;
    d.efficiency = json_field<double>(node, path, "efficiency");
    d.dark_prob_per_gate = json_field_or<double>(node, path, "dark_prob_per_gate", 0.0);
    d.gated = json_field_or<bool>(node, path, "gated", true);
    return d;
}

}  // namespace detail

// Loads a configuration from JSON text. Missing seed means seed 0, not
// entropy. Errors identify the offending field by its JSON-pointer path.
inline RunConfig load_config(const nlohmann::json& root) {
    RunConfig cfg = paper_default_config();

    if (root.contains("pump")) {
        const auto& p = root.at("pump");
        PumpPulse pump;
        pump.center_wavelength_nm = detail::json_field<double>(p, "/pump", "center_wavelength_nm");
        pump.duration_fwhm_ps = detail::json_field<double>(p, "/pump", "duration_fwhm_ps");
        pump.bandwidth_fwhm_nm = detail::json_field<double>(p, "/pump", "bandwidth_fwhm_nm");
        pump.repetition_rate_mhz = detail::json_field<double>(p, "/pump", "repetition_rate_mhz");
        cfg.experiment.source_a.pump = pump;
        cfg.experiment.source_b.pump = pump;
    }
    if (root.contains("source_a"))
        cfg.experiment.source_a = detail::parse_source(root.at("source_a"), "/source_a",
                                                       cfg.experiment.source_a.pump);
    if (root.contains("source_b"))
        cfg.experiment.source_b = detail::parse_source(root.at("source_b"), "/source_b",
                                                       cfg.experiment.source_b.pump);
    if (root.contains("detectors")) {
        const auto& d = root.at("detectors");
        if (d.contains("signal_a"))
            cfg.experiment.det_signal_a = detail::parse_detector(d.at("signal_a"), "/detectors/signal_a");
        if (d.contains("signal_b"))
            cfg.experiment.det_signal_b = detail::parse_detector(d.at("signal_b"), "/detectors/signal_b");
        if (d.contains("idler_a"))
            cfg.experiment.det_idler_a = detail::parse_detector(d.at("idler_a"), "/detectors/idler_a");
        if (d.contains("idler_b"))
            cfg.experiment.det_idler_b = detail::parse_detector(d.at("idler_b"), "/detectors/idler_b");
    }
    cfg.experiment.splitter_reflectivity =
        detail::json_field_or<double>(root, "", "splitter_reflectivity",
                                      cfg.experiment.splitter_reflectivity);
    cfg.experiment.acquisition_per_point_min =
        detail::json_field_or<double>(root, "", "acquisition_per_point_min",
                                      cfg.experiment.acquisition_per_point_min);
    if (root.contains("scan")) {
        const auto& s = root.at("scan");
        const double lo = detail::json_field<double>(s, "/scan", "delay_min_ps");
        const double hi = detail::json_field<double>(s, "/scan", "delay_max_ps");
        const int n = detail::json_field<int>(s, "/scan", "points");
        if (n < 1 || (n > 1 && hi <= lo))
            throw ConfigError("config: /scan range must be increasing with points >= 1");
        cfg.experiment.delays_ps.clear();
        for (int k = 0; k < n; ++k) {
            cfg.experiment.delays_ps.push_back(
                n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
        }
    }
    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        cfg.grid_points = detail::json_field_or<int>(g, "/grid", "points", cfg.grid_points);
        cfg.grid_span_factor =
            detail::json_field_or<double>(g, "/grid", "span_factor", cfg.grid_span_factor);
    }
    if (root.contains("delta_t_rule")) {
        const std::string rule = root.at("delta_t_rule").get<std::string>();
        if (rule == "quadrature")
            cfg.duration_rule = DurationRule::kQuadrature;
        else if (rule == "linear")
            cfg.duration_rule = DurationRule::kLinear;
        else
            throw ConfigError("config: /delta_t_rule must be quadrature|linear");
    }
    cfg.experiment.rng_seed =
        detail::json_field_or<std::uint64_t>(root, "", "rng_seed", 0);
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return load_config(root);
}

}  // namespace homsim
