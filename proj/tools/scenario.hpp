#pragma once

// Scenario file: one JSON object with optional sections
//   seed, rx, loop, vco, rffe, noise, calibration, sweep
// Unknown keys anywhere are rejected.

#include "aiot/aiot.hpp"

#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

namespace aiot::cli {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CalibrationSection {
    double duration_s = 3e-3;
    double carrier_power_dbm = -60.0;
    CalibrationOptions options{};
};

struct SweepSection {
    std::size_t payload_bits = 1000;
    std::size_t trials = 10;
    unsigned workers = 0;
    BurstLayout layout{};
};

struct ChannelNoise {
    bool enabled = false;
    NoiseSpec spec{};
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    RxConfig rx{};
    LoopParams loop{};
    VcoModel vco{};
    RffeConfig rffe{};
    ChannelNoise noise{};
    CalibrationSection calibration{};
    SweepSection sweep{};

    void validate() const {
        rx.validate();
        loop.validate();
        vco.validate();
        rffe.validate();
        if (noise.enabled) noise.spec.validate();
        calibration.options.schmitt.validate();
        if (!(calibration.duration_s > 0.0)) throw ConfigError("calibration.duration_s must be positive");
        if (calibration.options.lock_hold_cycles < 1) throw ConfigError("calibration.lock_hold_cycles must be >= 1");
        if (sweep.trials < 1) throw ConfigError("sweep.trials must be >= 1");
        if (sweep.payload_bits < 1) throw ConfigError("sweep.payload_bits must be >= 1");
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    }
}

template <class T>
void get(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for '" + where + "." + key + "'");
    }
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::get;
    ScenarioConfig c;
    check_keys(j, "", {"seed", "rx", "loop", "vco", "rffe", "noise", "calibration", "sweep"});
    get(j, "seed", c.seed, "");
    if (j.contains("rx")) {
        const auto& s = j["rx"];
        check_keys(s, "rx", {"f_carrier", "cbw", "f_if_target", "bw_stepA", "bw_stepC", "snr_min", "margin",
                             "symbol_rate", "guard_band_hz", "recenter_on_measured_if", "lock_loss_factor",
                             "lock_loss_symbols"});
        get(s, "f_carrier", c.rx.f_carrier, "rx");
        get(s, "cbw", c.rx.cbw, "rx");
        get(s, "f_if_target", c.rx.f_if_target, "rx");
        get(s, "bw_stepA", c.rx.bw_stepA, "rx");
        get(s, "bw_stepC", c.rx.bw_stepC, "rx");
        get(s, "snr_min", c.rx.snr_min, "rx");
        get(s, "margin", c.rx.margin, "rx");
        get(s, "symbol_rate", c.rx.symbol_rate, "rx");
        get(s, "guard_band_hz", c.rx.guard_band_hz, "rx");
        get(s, "recenter_on_measured_if", c.rx.recenter_on_measured_if, "rx");
        get(s, "lock_loss_factor", c.rx.lock_loss_factor, "rx");
        get(s, "lock_loss_symbols", c.rx.lock_loss_symbols, "rx");
    }
    if (j.contains("loop")) {
        const auto& s = j["loop"];
        check_keys(s, "loop", {"i_cp", "c_loop", "r_loop", "k_vco", "f_ref", "dead_zone", "pulse_width",
                               "cp_mismatch", "v_min", "v_max", "v_mid"});
        get(s, "i_cp", c.loop.i_cp, "loop");
        get(s, "c_loop", c.loop.c_loop, "loop");
        get(s, "r_loop", c.loop.r_loop, "loop");
        get(s, "k_vco", c.loop.k_vco, "loop");
        get(s, "f_ref", c.loop.f_ref, "loop");
        get(s, "dead_zone", c.loop.dead_zone, "loop");
        get(s, "pulse_width", c.loop.pulse_width, "loop");
        get(s, "cp_mismatch", c.loop.cp_mismatch, "loop");
        get(s, "v_min", c.loop.v_min, "loop");
        get(s, "v_max", c.loop.v_max, "loop");
        get(s, "v_mid", c.loop.v_mid, "loop");
    }
    if (j.contains("vco")) {
        const auto& s = j["vco"];
        check_keys(s, "vco", {"f_nominal", "init_offset_ppm", "drift_ppm_rms", "duty"});
        get(s, "f_nominal", c.vco.f_nominal, "vco");
        get(s, "init_offset_ppm", c.vco.init_offset_ppm, "vco");
        get(s, "drift_ppm_rms", c.vco.drift_ppm_rms, "vco");
        get(s, "duty", c.vco.duty, "vco");
    }
    if (j.contains("rffe")) {
        const auto& s = j["rffe"];
        check_keys(s, "rffe", {"gm", "cap", "gyrator_positive", "gain_db", "nf_db", "irr_db", "if_hz", "cbw_hz",
                               "noise_enabled", "flicker_enabled", "flicker_corner_hz", "oob_profile"});
        get(s, "gm", c.rffe.gm, "rffe");
        get(s, "cap", c.rffe.cap, "rffe");
        get(s, "gyrator_positive", c.rffe.gyrator_positive, "rffe");
        get(s, "gain_db", c.rffe.gain_db, "rffe");
        get(s, "nf_db", c.rffe.nf_db, "rffe");
        get(s, "irr_db", c.rffe.irr_db, "rffe");
        get(s, "if_hz", c.rffe.if_hz, "rffe");
        get(s, "cbw_hz", c.rffe.cbw_hz, "rffe");
        get(s, "noise_enabled", c.rffe.noise_enabled, "rffe");
        get(s, "flicker_enabled", c.rffe.flicker_enabled, "rffe");
        get(s, "flicker_corner_hz", c.rffe.flicker_corner_hz, "rffe");
        if (s.contains("oob_profile")) {
            c.rffe.oob_profile.clear();
            if (!s["oob_profile"].is_array()) throw ConfigError("rffe.oob_profile must be an array of [offset_hz, rejection_db]");
            for (const auto& a : s["oob_profile"]) {
                if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
                    throw ConfigError("rffe.oob_profile entries must be [offset_hz, rejection_db]");
                }
                c.rffe.oob_profile.push_back({a[0].get<double>(), a[1].get<double>()});
            }
        } else if (s.contains("if_hz") || s.contains("cbw_hz")) {
            c.rffe.oob_profile = default_oob_profile(c.rffe.if_hz, c.rffe.cbw_hz);
        }
    }
    if (j.contains("noise")) {
        const auto& s = j["noise"];
        check_keys(s, "noise", {"enabled", "density_dbm_hz", "extra_nf_db"});
        get(s, "enabled", c.noise.enabled, "noise");
        get(s, "density_dbm_hz", c.noise.spec.density_dbm_hz, "noise");
        get(s, "extra_nf_db", c.noise.spec.extra_nf_db, "noise");
    }
    if (j.contains("calibration")) {
        const auto& s = j["calibration"];
        auto& o = c.calibration.options;
        check_keys(s, "calibration", {"duration_s", "carrier_power_dbm", "schmitt_high", "schmitt_low", "cal_if_bw",
                                      "envelope_gating", "gate_threshold", "gate_window_cycles", "lock_tol_hz",
                                      "lock_hold_cycles", "settle_window_s", "add_frontend_noise"});
        get(s, "duration_s", c.calibration.duration_s, "calibration");
        get(s, "carrier_power_dbm", c.calibration.carrier_power_dbm, "calibration");
        get(s, "schmitt_high", o.schmitt.v_high, "calibration");
        get(s, "schmitt_low", o.schmitt.v_low, "calibration");
        get(s, "cal_if_bw", o.cal_if_bw, "calibration");
        get(s, "envelope_gating", o.envelope_gating, "calibration");
        get(s, "gate_threshold", o.gate_threshold, "calibration");
        get(s, "gate_window_cycles", o.gate_window_cycles, "calibration");
        get(s, "lock_tol_hz", o.lock_tol_hz, "calibration");
        get(s, "lock_hold_cycles", o.lock_hold_cycles, "calibration");
        get(s, "settle_window_s", o.settle_window_s, "calibration");
        get(s, "add_frontend_noise", o.add_frontend_noise, "calibration");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"payload_bits", "trials", "workers", "gap_symbols", "preamble_symbols", "tail_symbols"});
        get(s, "payload_bits", c.sweep.payload_bits, "sweep");
        get(s, "trials", c.sweep.trials, "sweep");
        get(s, "workers", c.sweep.workers, "sweep");
        get(s, "gap_symbols", c.sweep.layout.gap_symbols, "sweep");
        get(s, "preamble_symbols", c.sweep.layout.preamble_symbols, "sweep");
        get(s, "tail_symbols", c.sweep.layout.tail_symbols, "sweep");
    }
    return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_scenario(j);
}

}  // namespace aiot::cli
