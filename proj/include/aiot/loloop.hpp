#pragma once

// Carrier-auxiliary IF-feedback LO calibration loop.
//
// Signal path, one simulation sample per step:
//   carrier -> LO rotation (VCO) -> IF band-pass -> PGA -> Schmitt I/Q
//   -> rotational frequency detector (sampled at the four quadrature edges
//   of f_ref) -> charge pump -> loop filter -> VCO control voltage.
//
// The detector emits one UP per full turn of the IF phasor relative to the
// reference when f_if > f_ref, one DN per turn when f_if < f_ref. UP raises
// V_ctrl, which raises f_lo and lowers f_if = f_carrier - f_lo.

#include "aiot/iffilter.hpp"
#include "aiot/rffe.hpp"
#include "aiot/sigcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aiot {

// --- Schmitt trigger ----------------------------------------------------------

struct SchmittConfig {
    double v_high = 0.15;
    double v_low = -0.15;

    void validate() const {
        if (!(v_high > v_low)) throw std::invalid_argument("Schmitt v_high must exceed v_low");
    }
    double window() const { return v_high - v_low; }
};

class SchmittTrigger {
public:
    explicit SchmittTrigger(SchmittConfig cfg, bool initial = false) : cfg_(cfg), state_(initial) { cfg_.validate(); }

    bool step(double x) {
        if (state_ && x < cfg_.v_low) state_ = false;
        else if (!state_ && x > cfg_.v_high) state_ = true;
        return state_;
    }
    bool state() const { return state_; }

private:
    SchmittConfig cfg_;
    bool state_;
};

inline std::vector<std::uint8_t> schmitt(std::span<const double> x, const SchmittConfig& cfg, bool initial = false) {
    SchmittTrigger st(cfg, initial);
    std::vector<std::uint8_t> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = st.step(x[i]) ? 1 : 0;
    return out;
}

// --- Rotational frequency detector ----------------------------------------------

enum class RfdEvent : std::uint8_t { None, Up, Dn };

inline const char* to_string(RfdEvent e) {
    switch (e) {
        case RfdEvent::Up: return "UP";
        case RfdEvent::Dn: return "DN";
        default: return "NONE";
    }
}

/// Quadrant of a Schmitt-shaped I/Q pair, counter-clockwise from (+,+).
inline int iq_quadrant(std::uint8_t i_bit, std::uint8_t q_bit) {
    if (i_bit && q_bit) return 0;
    if (!i_bit && q_bit) return 1;
    if (!i_bit && !q_bit) return 2;
    return 3;
}

/// Detector memory. `edge` counts the quadrature reference edges (0..3 within
/// one reference period); `last_quadrant` is the IF quadrant relative to the
/// reference phase at the previous edge, or -1 when unknown.
struct RfdState {
    int last_quadrant = -1;
    int edge = 0;
    /// The relative phase has reached quadrant 2 since the last 3|0 crossing.
    bool armed = true;
};

/// One quadrature reference edge. Crossing the 3->0 boundary of the relative
/// quadrant emits UP, 0->3 emits DN. A two-quadrant jump is ambiguous and is
/// absorbed without a pulse. A crossing only counts once the phase has been
/// to quadrant 2 since the previous one, so edge-timing jitter around the
/// boundary cannot produce UP/DN chatter.
inline std::pair<RfdEvent, RfdState> rfd_step(std::uint8_t i_bit, std::uint8_t q_bit, RfdState state) {
    const int rel = (iq_quadrant(i_bit, q_bit) - state.edge + 4) % 4;
    RfdEvent ev = RfdEvent::None;
    bool armed = state.armed || rel == 2;
    const bool crossed = (state.last_quadrant == 3 && rel == 0) || (state.last_quadrant == 0 && rel == 3);
    if (crossed) {
        if (armed) ev = rel == 0 ? RfdEvent::Up : RfdEvent::Dn;
        armed = false;
    }
    return {ev, RfdState{rel, (state.edge + 1) % 4, armed}};
}

/// Forget the relative quadrant (used while the detector is gated off).
inline RfdState rfd_hold(RfdState state) { return RfdState{-1, (state.edge + 1) % 4, state.armed}; }

// --- Charge pump, loop filter, VCO ----------------------------------------------

struct LoopParams {
    double i_cp = 5e-6;        // A
    double c_loop = 1e-9;      // F
    double r_loop = 0.0;       // ohm
    double k_vco = 20e6;       // Hz/V
    double f_ref = 1.035e6;    // Hz
    double dead_zone = 0.0;    // Hz
    double pulse_width = 0.0;  // s; 0 means one reference period
    double cp_mismatch = 1.0;  // DN/UP current ratio
    double v_min = 0.0;
    double v_max = 1.2;
    double v_mid = 0.6;

    void validate() const {
        if (!(i_cp > 0.0)) throw std::invalid_argument("i_cp must be positive");
        if (!(c_loop > 0.0)) throw std::invalid_argument("c_loop must be positive");
        if (!(r_loop >= 0.0)) throw std::invalid_argument("r_loop must be >= 0");
        if (!(k_vco > 0.0)) throw std::invalid_argument("k_vco must be positive");
        if (!(f_ref > 0.0)) throw std::invalid_argument("f_ref must be positive");
        if (!(dead_zone >= 0.0)) throw std::invalid_argument("dead_zone must be >= 0");
        if (!(pulse_width >= 0.0)) throw std::invalid_argument("pulse_width must be >= 0");
        if (!(cp_mismatch > 0.0)) throw std::invalid_argument("cp_mismatch must be positive");
        if (!(v_max > v_min) || v_mid < v_min || v_mid > v_max) throw std::invalid_argument("bad control-voltage rails");
    }
    double ref_period() const { return 1.0 / f_ref; }
    double pulse_duration() const { return pulse_width > 0.0 ? pulse_width : ref_period(); }
    /// LO frequency step produced by one UP pulse.
    double cp_quantum_hz() const { return i_cp * pulse_duration() / c_loop * k_vco; }
};

/// Applies one detector event for `dt` seconds to the loop-filter capacitor
/// voltage and returns the new capacitor voltage, clamped to the rails.
inline double charge_pump_and_filter(RfdEvent event, double dt, const LoopParams& p, double v_cap) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    double current = 0.0;
    if (event == RfdEvent::Up) current = p.i_cp;
    else if (event == RfdEvent::Dn) current = -p.i_cp * p.cp_mismatch;
    return std::clamp(v_cap + current * dt / p.c_loop, p.v_min, p.v_max);
}

/// Control voltage seen by the VCO while `current` flows: capacitor plus the
/// proportional drop across r_loop.
inline double control_voltage(double v_cap, double current, const LoopParams& p) {
    return std::clamp(v_cap + current * p.r_loop, p.v_min, p.v_max);
}

struct VcoModel {
    double f_nominal = 900e6 - 1.035e6;  // post-LUT centre, Hz
    double init_offset_ppm = 0.0;
    double drift_ppm_rms = 0.0;  // random-walk intensity, ppm per sqrt(second)
    double duty = 0.5;

    void validate() const {
        if (!(f_nominal > 0.0)) throw std::invalid_argument("VCO nominal frequency must be positive");
        if (duty != 0.5) throw std::invalid_argument("VCO duty cycle is fixed at 0.5");
        if (!(drift_ppm_rms >= 0.0)) throw std::invalid_argument("drift intensity must be >= 0");
    }
};

/// VCO state. `phase_cycles` is the LO phase relative to `f_reference`, the
/// nominal RF carrier that anchors the baseband-equivalent frame.
struct VcoState {
    double phase_cycles = 0.0;
    double drift_ppm = 0.0;
    double f_lo = 0.0;
};

/// Advances the VCO by dt. Returns the new state; the LO I/Q pair is
/// e^{j 2 pi phase}, i.e. I = cos, Q = sin of the same phase.
inline VcoState vco_step(double v_ctrl, double dt, const VcoModel& m, const LoopParams& p, double f_reference,
                         VcoState s, std::mt19937_64* rng = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (m.drift_ppm_rms > 0.0 && rng) {
        std::normal_distribution<double> g(0.0, m.drift_ppm_rms * std::sqrt(dt));
        s.drift_ppm += g(*rng);
    }
    s.f_lo = m.f_nominal * (1.0 + (m.init_offset_ppm + s.drift_ppm) * 1e-6) + p.k_vco * (v_ctrl - p.v_mid);
    s.phase_cycles += (s.f_lo - f_reference) * dt;
    s.phase_cycles -= std::floor(s.phase_cycles);
    return s;
}

inline cplx lo_iq(const VcoState& s) { return std::polar(1.0, 2.0 * M_PI * s.phase_cycles); }

// --- Transient engine -----------------------------------------------------------

struct TrajectoryRow {
    double t;
    double v_ctrl;
    double f_lo;
    double f_if;
    RfdEvent event;
};

using LoopTrajectory = std::vector<TrajectoryRow>;

/// Trajectory CSV: t_s,v_ctrl_v,f_lo_hz,f_if_hz,event with 12 significant digits.
inline void write_trajectory_csv(std::ostream& os, const LoopTrajectory& traj) {
    os << "t_s,v_ctrl_v,f_lo_hz,f_if_hz,event\n";
    char buf[160];
    for (const auto& r : traj) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%s\n", r.t, r.v_ctrl, r.f_lo, r.f_if, to_string(r.event));
        os << buf;
    }
}

/// First time |f_if - f_ref| <= tol has held for `hold` reference cycles.
inline std::optional<double> lock_detect(const LoopTrajectory& traj, double f_ref, double tol, int hold) {
    if (!(tol > 0.0)) throw std::invalid_argument("lock tolerance must be positive");
    if (hold < 1) throw std::invalid_argument("lock hold must be at least one cycle");
    const double need = hold / f_ref;
    std::optional<double> streak;
    for (const auto& r : traj) {
        if (std::abs(r.f_if - f_ref) <= tol) {
            if (!streak) streak = r.t;
            if (r.t - *streak >= need * (1.0 - 1e-9)) return r.t;
        } else {
            streak.reset();
        }
    }
    return std::nullopt;
}

struct CalibrationOptions {
    double f_carrier = 900e6;        // nominal carrier, anchors the baseband frame
    double carrier_offset_hz = 0.0;  // true carrier CFO, for the trajectory's f_if
    SchmittConfig schmitt{};
    double cal_if_bw = 2.0e6;        // IF band-pass used while calibrating
    double cal_if_center = 0.0;      // 0 means f_ref
    std::optional<double> agc_amplitude;  // IF amplitude that the PGA maps to 1.0
    bool envelope_gating = true;
    double gate_threshold = 0.5;     // of the normalized carrier amplitude
    double gate_window_cycles = 0.25;  // envelope averaging, reference periods
    double lock_tol_hz = 0.0;        // 0 means dead_zone + one CP quantum
    int lock_hold_cycles = 2;
    double settle_window_s = 1e-3;   // post-lock averaging window
    bool stop_when_settled = true;
    bool add_frontend_noise = false;
    std::uint64_t seed = 1;
    double initial_v_ctrl = std::numeric_limits<double>::quiet_NaN();  // NaN means v_mid
    double initial_drift_ppm = 0.0;
};

struct CalibrationResult {
    LoopTrajectory trajectory;
    bool locked = false;
    std::optional<double> lock_time_s;
    double lock_cycles = 0.0;
    double lock_tol_hz = 0.0;
    /// Mean IF and control voltage over the post-lock window (the hand-off
    /// point for the free-running LO).
    double settled_f_if = 0.0;
    double settled_v_ctrl = 0.0;
    double residual_hz = 0.0;
    /// Largest instantaneous |f_if - f_ref| inside the post-lock window.
    double max_post_lock_error_hz = 0.0;
    std::size_t samples_used = 0;
    std::size_t up_pulses = 0;
    std::size_t dn_pulses = 0;
    VcoState final_vco{};
};

/// Detector gain of the quadrant-rotation RFD: pulses per reference cycle per Hz.
inline double rfd_detector_gain(const LoopParams& p) { return 1.0 / p.f_ref; }

/// Closed-loop pole (Hz) of the linearized first-order frequency loop:
/// pulse rate = gain * f_ref * df, each pulse moves f by one CP quantum.
inline double analytic_pole(const LoopParams& p, double detector_gain) {
    p.validate();
    return p.cp_quantum_hz() * detector_gain * p.f_ref / (2.0 * M_PI);
}

/// Closed-loop simulation of the calibration loop over `duration` seconds of
/// `carrier` (or until settled when options.stop_when_settled).
inline CalibrationResult run_calibration(const SampledSignal& carrier, const RffeConfig& rffe, const LoopParams& loop,
                                         const VcoModel& vco, double duration, const CalibrationOptions& opt = {}) {
    loop.validate();
    vco.validate();
    opt.schmitt.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (loop.f_ref < 0.5e6 || loop.f_ref > 1.5e6) {
        throw std::invalid_argument("f_ref outside the 0.5-1.5 MHz low-frequency synthesizer range");
    }
    const double fs = carrier.sample_rate();
    const double dt = 1.0 / fs;
    if (fs < 16.0 * loop.f_ref) throw RateViolation("sample rate too low to resolve the reference edges");

    CalibrationResult res;
    res.lock_tol_hz = opt.lock_tol_hz > 0.0 ? opt.lock_tol_hz : loop.dead_zone + loop.cp_quantum_hz();

    const std::size_t n_total = std::min(carrier.size(), static_cast<std::size_t>(std::ceil(duration * fs)));
    if (n_total == 0) throw std::invalid_argument("carrier is empty");

    std::vector<cplx> noise;
    if (opt.add_frontend_noise && rffe.noise_enabled) {
        noise = gaussian_noise(n_total, kThermalFloorDbmHz + rffe.nf_db + 10.0 * std::log10(fs), opt.seed);
    }
    const double fe_gain = std::pow(10.0, rffe.gain_db / 20.0);

    double agc = 1.0;
    if (opt.agc_amplitude) {
        agc = 1.0 / *opt.agc_amplitude;
    } else {
        double peak_ms = 0.0;
        for (std::size_t i = 0; i < n_total; ++i) peak_ms = std::max(peak_ms, std::norm(carrier[i]));
        if (peak_ms <= 0.0) throw std::invalid_argument("carrier has no energy");
        agc = 1.0 / std::sqrt(peak_ms);
    }
    agc /= fe_gain;  // agc applies to the front-end output

    const double center = opt.cal_if_center > 0.0 ? opt.cal_if_center : loop.f_ref;
    ComplexBandpass bpf(center, opt.cal_if_bw, fs);

    SchmittTrigger st_i(opt.schmitt), st_q(opt.schmitt);
    RfdState rfd{};
    std::mt19937_64 rng(opt.seed ^ 0x9E3779B97F4A7C15ull);

    const auto gate_len = std::max<std::size_t>(1, static_cast<std::size_t>(opt.gate_window_cycles * fs / loop.f_ref));
    std::vector<double> env_ring(gate_len, 0.0);
    double env_sum = 0.0;
    std::size_t env_count = 0;

    // A CP pulse deposits exactly i_cp * tau of charge, spread over its samples.
    const auto pulse_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(loop.pulse_duration() * fs)));
    const double pulse_current = loop.i_cp * loop.pulse_duration() / (static_cast<double>(pulse_samples) * dt);
    struct Pulse {
        double current;
        std::size_t remaining;
    };
    std::deque<Pulse> pulses;

    double v_cap = std::isnan(opt.initial_v_ctrl) ? loop.v_mid : opt.initial_v_ctrl;
    VcoState vs{};
    vs.drift_ppm = opt.initial_drift_ppm;
    vs = vco_step(v_cap, dt, vco, loop, opt.f_carrier, vs, nullptr);
    vs.phase_cycles = 0.0;

    const double f_carrier_true = opt.f_carrier + opt.carrier_offset_hz;
    auto f_if_of = [&](const VcoState& s) { return f_carrier_true - s.f_lo; };

    res.trajectory.push_back({carrier.epoch(), v_cap, vs.f_lo, f_if_of(vs), RfdEvent::None});

    double ref_cycles = 0.0;
    long long last_quarter = 0;
    const double hold_time = opt.lock_hold_cycles / loop.f_ref;
    double streak_start = std::numeric_limits<double>::quiet_NaN();
    double settle_sum_f = 0.0, settle_sum_v = 0.0;
    std::size_t settle_n = 0;
    const auto settle_need = static_cast<std::size_t>(opt.settle_window_s * fs);

    std::size_t n = 0;
    for (; n < n_total; ++n) {
        const double t = carrier.time_at(n) + dt;

        cplx x = carrier[n];
        if (!noise.empty()) x += noise[n];
        cplx y = bpf.step(x * std::conj(lo_iq(vs)) * fe_gain) * agc;

        double mag = std::abs(y);
        env_sum += mag - env_ring[n % gate_len];
        env_ring[n % gate_len] = mag;
        env_count = std::min(env_count + 1, gate_len);
        const bool gate_open = !opt.envelope_gating || (env_sum / static_cast<double>(env_count)) >= opt.gate_threshold;

        const auto i_bit = static_cast<std::uint8_t>(st_i.step(y.real()));
        const auto q_bit = static_cast<std::uint8_t>(st_q.step(y.imag()));

        ref_cycles += loop.f_ref * dt;
        const auto quarter = static_cast<long long>(std::floor(ref_cycles * 4.0));
        RfdEvent ev = RfdEvent::None;
        const bool edge = quarter != last_quarter;
        if (edge) {
            last_quarter = quarter;
            if (gate_open) {
                auto [e, next] = rfd_step(i_bit, q_bit, rfd);
                ev = e;
                rfd = next;
            } else {
                rfd = rfd_hold(rfd);
            }
            if (ev == RfdEvent::Up) {
                pulses.push_back({pulse_current, pulse_samples});
                ++res.up_pulses;
            } else if (ev == RfdEvent::Dn) {
                pulses.push_back({-pulse_current * loop.cp_mismatch, pulse_samples});
                ++res.dn_pulses;
            }
        }

        double current = 0.0;
        for (auto& p : pulses) {
            current += p.current;
            --p.remaining;
        }
        while (!pulses.empty() && pulses.front().remaining == 0) pulses.pop_front();
        v_cap = std::clamp(v_cap + current * dt / loop.c_loop, loop.v_min, loop.v_max);
        const double v_ctrl = control_voltage(v_cap, current, loop);
        vs = vco_step(v_ctrl, dt, vco, loop, opt.f_carrier, vs, &rng);
        const double f_if = f_if_of(vs);

        if (edge) res.trajectory.push_back({t, v_ctrl, vs.f_lo, f_if, ev});

        if (!res.lock_time_s) {
            if (std::abs(f_if - loop.f_ref) <= res.lock_tol_hz) {
                if (std::isnan(streak_start)) streak_start = (n == 0) ? carrier.epoch() : t;
                if (t - streak_start >= hold_time * (1.0 - 1e-9)) res.lock_time_s = t - carrier.epoch();
            } else {
                streak_start = std::numeric_limits<double>::quiet_NaN();
            }
        } else {
            settle_sum_f += f_if;
            settle_sum_v += v_ctrl;
            res.max_post_lock_error_hz = std::max(res.max_post_lock_error_hz, std::abs(f_if - loop.f_ref));
            if (++settle_n >= settle_need && opt.stop_when_settled) {
                ++n;
                break;
            }
        }
    }
    res.samples_used = n;
    res.final_vco = vs;
    res.locked = res.lock_time_s.has_value();
    if (res.locked) {
        res.lock_cycles = *res.lock_time_s * loop.f_ref;
        if (settle_n > 0) {
            res.settled_f_if = settle_sum_f / static_cast<double>(settle_n);
            res.settled_v_ctrl = settle_sum_v / static_cast<double>(settle_n);
        } else {
            res.settled_f_if = f_if_of(vs);
            res.settled_v_ctrl = v_cap;
        }
        res.residual_hz = std::abs(res.settled_f_if - loop.f_ref);
    } else {
        res.settled_f_if = f_if_of(vs);
        res.settled_v_ctrl = v_cap;
        res.residual_hz = std::abs(res.settled_f_if - loop.f_ref);
    }
    return res;
}

}  // namespace aiot
