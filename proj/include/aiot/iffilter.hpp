#pragma once

// Behavioral gm-C IF band-pass: a Butterworth low-pass prototype translated
// to +center by complex mixing, so only the positive-frequency IF passes.

#include "aiot/sigcore.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace aiot {

class ComplexBandpass {
public:
    static constexpr int kOrder = 6;

    ComplexBandpass(double center_hz, double bandwidth_hz, double sample_rate)
        : center_(center_hz), bw_(bandwidth_hz), fs_(sample_rate) {
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("IF bandwidth must be positive");
        if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
        if (bandwidth_hz / 2.0 >= sample_rate / 2.0) throw RateViolation("IF bandwidth exceeds Nyquist");
        const double k = std::tan(M_PI * (bandwidth_hz / 2.0) / sample_rate);
        for (int s = 0; s < kOrder / 2; ++s) {
            double theta = M_PI * (2.0 * s + 1.0) / (2.0 * kOrder);
            double q = 1.0 / (2.0 * std::cos(theta));
            double norm = 1.0 / (1.0 + k / q + k * k);
            auto& c = sections_[static_cast<std::size_t>(s)];
            c.b0 = k * k * norm;
            c.b1 = 2.0 * c.b0;
            c.b2 = c.b0;
            c.a1 = 2.0 * (k * k - 1.0) * norm;
            c.a2 = (1.0 - k / q + k * k) * norm;
        }
        step_ = std::polar(1.0, 2.0 * M_PI * center_hz / sample_rate);
    }

    double center() const { return center_; }
    double bandwidth() const { return bw_; }

    /// Passband group delay of the prototype at the center frequency, seconds.
    double group_delay() const {
        double sum = 0.0;
        for (int s = 0; s < kOrder / 2; ++s) sum += 2.0 * std::cos(M_PI * (2.0 * s + 1.0) / (2.0 * kOrder));
        return sum / (2.0 * M_PI * bw_ / 2.0);
    }

    cplx step(cplx x) {
        cplx v = x * std::conj(osc_);
        for (auto& c : sections_) {
            cplx y = c.b0 * v + c.z1;
            c.z1 = c.b1 * v - c.a1 * y + c.z2;
            c.z2 = c.b2 * v - c.a2 * y;
            v = y;
        }
        cplx out = v * osc_;
        osc_ *= step_;
        if (++count_ % 4096 == 0) osc_ /= std::abs(osc_);
        return out;
    }

    /// Analytic magnitude response in dB at frequency f (positive IF side).
    double response_db(double f_hz) const {
        double x = std::tan(M_PI * (f_hz - center_) / fs_) / std::tan(M_PI * (bw_ / 2.0) / fs_);
        return -10.0 * std::log10(1.0 + std::pow(x * x, kOrder));
    }

private:
    struct Section {
        double b0 = 0, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
        cplx z1{}, z2{};
    };
    double center_, bw_, fs_;
    std::array<Section, kOrder / 2> sections_{};
    cplx osc_{1.0, 0.0};
    cplx step_{1.0, 0.0};
    std::size_t count_ = 0;
};

/// Band-pass around +center with -3 dB width `bw`. Output is delayed by the
/// filter's group delay (see ComplexBandpass::group_delay).
inline SampledSignal if_filter(const SampledSignal& iq, double center_hz, double bw_hz) {
    if (!(bw_hz > 0.0)) throw std::invalid_argument("IF bandwidth must be positive");
    if (!(center_hz - bw_hz / 2.0 > 0.0)) throw std::invalid_argument("IF band must lie above DC");
    ComplexBandpass f(center_hz, bw_hz, iq.sample_rate());
    // Keep the output aligned to the input time base: the oscillator phase
    // starts at sample 0 of this signal.
    std::vector<cplx> out(iq.size());
    for (std::size_t i = 0; i < iq.size(); ++i) out[i] = f.step(iq[i]);
    return SampledSignal(std::move(out), iq.sample_rate(), iq.epoch());
}

}  // namespace aiot
