#pragma once

// Behavioral 4-path mixer-first front-end. The mixer, gyrator and TIA are
// collapsed into: LO rotation -> frequency-domain selectivity mask ->
// input-referred AWGN -> gain.

#include "aiot/fft.hpp"
#include "aiot/sigcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aiot {

/// (offset from LO in Hz, rejection in dB) anchor for the out-of-band profile.
struct OobAnchor {
    double offset_hz;
    double rejection_db;
};

/// Builds the default out-of-band profile: flat to cbw/2 + if, then a
/// first-order roll-off whose corner puts 40 MHz exactly 17 dB below 4 MHz.
inline std::vector<OobAnchor> default_oob_profile(double if_hz, double cbw_hz) {
    const double flat = cbw_hz / 2.0 + if_hz;
    const double near = 4e6, far = 40e6, delta_db = 17.0;
    const double a = near - flat, b = far - flat;
    const double ratio = std::pow(10.0, delta_db / 10.0);
    if (!(a > 0.0) || !(b * b > ratio * a * a)) {
        throw std::invalid_argument("flat passband too wide for the 4/40 MHz anchor");
    }
    const double inv_fc2 = (ratio - 1.0) / (b * b - ratio * a * a);
    auto rej = [&](double f) { return 10.0 * std::log10(1.0 + (f - flat) * (f - flat) * inv_fc2); };
    std::vector<OobAnchor> out{{flat, 0.0}};
    for (double f : {2e6, 4e6, 8e6, 16e6, 40e6, 100e6, 400e6}) {
        if (f > flat) out.push_back({f, rej(f)});
    }
    return out;
}

struct RffeConfig {
    double gm = 10.35e-6;            // S
    double cap = 20e-12;             // F
    bool gyrator_positive = true;    // wanted sideband above the LO
    double gain_db = 30.0;
    double nf_db = 12.0;
    double irr_db = 16.7;
    double if_hz = 1.035e6;
    double cbw_hz = 180e3;
    std::vector<OobAnchor> oob_profile = default_oob_profile(1.035e6, 180e3);
    bool noise_enabled = true;
    bool flicker_enabled = false;
    double flicker_corner_hz = 200e3;

    void validate() const {
        if (!(cap > 0.0)) throw std::invalid_argument("gyrator capacitance must be positive");
        if (!(gm >= 0.0)) throw std::invalid_argument("gyrator gm must be >= 0");
        if (!(irr_db >= 0.0)) throw std::invalid_argument("image rejection must be >= 0 dB");
        if (!(nf_db >= 0.0)) throw std::invalid_argument("noise figure must be >= 0 dB");
        if (!(if_hz > 0.0) || !(cbw_hz > 0.0)) throw std::invalid_argument("IF and channel bandwidth must be positive");
        if (oob_profile.empty()) throw std::invalid_argument("out-of-band profile needs at least one anchor");
        for (std::size_t i = 1; i < oob_profile.size(); ++i) {
            if (!(oob_profile[i].offset_hz > oob_profile[i - 1].offset_hz)) {
                throw std::invalid_argument("out-of-band anchors must have increasing offsets");
            }
            if (oob_profile[i].rejection_db < oob_profile[i - 1].rejection_db) {
                throw std::invalid_argument("out-of-band rejection must be non-decreasing");
            }
        }
        if (!(flicker_corner_hz >= 0.0)) throw std::invalid_argument("flicker corner must be >= 0");
    }
};

/// Passband shift of the gyrator-loaded N-path filter, 2*Gm/C, signed by direction.
inline double gyrator_shift(double gm, double cap, bool positive = true) {
    if (!(cap > 0.0)) throw std::invalid_argument("gyrator capacitance must be positive");
    double df = 2.0 * gm / cap;
    return positive ? df : -df;
}

/// Rotates by e^{-j 2 pi lo_offset t}; a tone at f moves to f - lo_offset.
inline SampledSignal downconvert(const SampledSignal& rf, double lo_offset_hz) {
    std::vector<cplx> out(rf.size());
    const double fs = rf.sample_rate();
    for (std::size_t i = 0; i < rf.size(); ++i) out[i] = rf[i] * rotation(-lo_offset_hz, i, fs);
    return SampledSignal(std::move(out), rf.sample_rate(), rf.epoch());
}

/// Out-of-band rejection at |offset|, interpolated in dB over log-frequency.
inline double oob_rejection_db(double abs_offset_hz, const std::vector<OobAnchor>& profile) {
    if (profile.empty() || abs_offset_hz <= profile.front().offset_hz) return 0.0;
    auto interp = [&](const OobAnchor& a, const OobAnchor& b) {
        double t = std::log(abs_offset_hz / a.offset_hz) / std::log(b.offset_hz / a.offset_hz);
        return a.rejection_db + t * (b.rejection_db - a.rejection_db);
    };
    for (std::size_t i = 1; i < profile.size(); ++i) {
        if (abs_offset_hz <= profile[i].offset_hz) return interp(profile[i - 1], profile[i]);
    }
    if (profile.size() == 1) return profile.front().rejection_db;
    return interp(profile[profile.size() - 2], profile.back());
}

/// Gain in dB at an offset from the LO. The wanted side (chosen by the
/// gyrator direction) is flat; the image side is lower by irr_db beyond
/// if/2, with a raised-cosine transition between DC and -if/2.
inline double selectivity_response(double offset_hz, const RffeConfig& cfg) {
    double x = cfg.gyrator_positive ? offset_hz : -offset_hz;
    double image = 0.0;
    if (x <= -cfg.if_hz / 2.0) {
        image = cfg.irr_db;
    } else if (x < 0.0) {
        double t = -x / (cfg.if_hz / 2.0);
        image = cfg.irr_db * 0.5 * (1.0 - std::cos(M_PI * t));
    }
    return cfg.gain_db - oob_rejection_db(std::abs(offset_hz), cfg.oob_profile) - image;
}

/// CSV (offset_hz, gain_db) sweep of the selectivity curve.
inline void write_response_csv(std::ostream& os, const RffeConfig& cfg, double f_min, double f_max, std::size_t points) {
    os << "offset_hz,gain_db\n";
    char buf[96];
    for (std::size_t i = 0; i < points; ++i) {
        double f = points == 1 ? f_min : f_min + (f_max - f_min) * static_cast<double>(i) / static_cast<double>(points - 1);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", f, selectivity_response(f, cfg));
        os << buf;
    }
}

/// Full front-end: downconvert, selectivity, input-referred noise, gain.
/// The noise density is -174 dBm/Hz + nf_db across the whole sample band.
inline SampledSignal apply_frontend(const SampledSignal& rf, const RffeConfig& cfg, double lo_offset_hz,
                                    std::uint64_t seed) {
    cfg.validate();
    const double fs = rf.sample_rate();
    if (std::abs(lo_offset_hz) >= fs / 2.0) throw RateViolation("LO offset not representable at this sample rate");
    auto x = std::move(downconvert(rf, lo_offset_hz)).release();
    const std::size_t n = x.size();
    if (n == 0) return SampledSignal({}, fs, rf.epoch());

    Fft fft(n);
    fft.forward(x);
    for (std::size_t k = 0; k < n; ++k) {
        double att_db = selectivity_response(bin_frequency(k, n, fs), cfg) - cfg.gain_db;
        x[k] *= std::pow(10.0, att_db / 20.0);
    }
    fft.inverse(x);

    if (cfg.noise_enabled) {
        auto noise = gaussian_noise(n, kThermalFloorDbmHz + cfg.nf_db + 10.0 * std::log10(fs), seed);
        if (cfg.flicker_enabled && cfg.flicker_corner_hz > 0.0) {
            fft.forward(noise);
            const double df = fs / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                double f = std::max(std::abs(bin_frequency(k, n, fs)), df);
                noise[k] *= std::sqrt(1.0 + cfg.flicker_corner_hz / f);
            }
            fft.inverse(noise);
        }
        for (std::size_t i = 0; i < n; ++i) x[i] += noise[i];
    }
    const double g = std::pow(10.0, cfg.gain_db / 20.0);
    for (auto& s : x) s *= g;
    return SampledSignal(std::move(x), fs, rf.epoch());
}

}  // namespace aiot
