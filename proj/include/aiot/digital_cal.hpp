#pragma once

// Digital LO calibration alternatives: SAR code search and a counter-based
// digital FLL.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace aiot {

struct Band {
    double lo_hz;
    double hi_hz;
    double width() const { return hi_hz - lo_hz; }
};

/// Oscillator tuning for an n-bit SAR: code k sits at the centre of the k-th
/// of 2^n equal bins spanning the band.
inline double sar_code_frequency(std::uint32_t code, int n_bits, const Band& band) {
    const double lsb = band.width() / std::ldexp(1.0, n_bits);
    return band.lo_hz + (static_cast<double>(code) + 0.5) * lsb;
}

/// sign(f_lo - f_target) for the LO running at `f_lo`.
using FrequencyComparator = std::function<int(double f_lo)>;

struct SarResult {
    std::uint32_t code = 0;
    double f_lo = 0.0;
    int comparisons = 0;
    double lsb_hz = 0.0;
};

/// Successive approximation, MSB first, one comparison per bit. Each trial
/// code is compared half an LSB below its bin centre, so the final bin centre
/// is within LSB/2 of the target for a monotone comparator.
inline SarResult sar_calibrate(const FrequencyComparator& compare, int n_bits, const Band& band) {
    if (n_bits < 1 || n_bits > 30) throw std::invalid_argument("SAR width must be 1..30 bits");
    if (!(band.hi_hz > band.lo_hz)) throw std::invalid_argument("SAR band must be non-empty");
    SarResult r;
    r.lsb_hz = band.width() / std::ldexp(1.0, n_bits);
    for (int b = n_bits - 1; b >= 0; --b) {
        std::uint32_t trial = r.code | (1u << b);
        double edge = sar_code_frequency(trial, n_bits, band) - r.lsb_hz / 2.0;
        ++r.comparisons;
        if (compare(edge) <= 0) r.code = trial;
    }
    r.f_lo = sar_code_frequency(r.code, n_bits, band);
    return r;
}

/// True when the SAR result misses `target` by more than two LSBs, which only
/// happens with a non-monotone comparator.
inline bool sar_non_monotone(const SarResult& r, double target_hz) {
    return std::abs(r.f_lo - target_hz) > 2.0 * r.lsb_hz;
}

struct DfllParams {
    double f_if_initial = 550e3;   // IF at the initial code
    double counter_window = 10e-6; // s
    int target_count = 10;
    double gain = 5.0;             // codes per count of error
    double k_dco = 10e3;           // IF change per code, Hz
    int code_bits = 12;
    int max_iter = 64;
    std::uint64_t seed = 1;        // initial counter phase

    void validate() const {
        if (!(counter_window > 0.0)) throw std::invalid_argument("counter window must be positive");
        if (target_count < 0) throw std::invalid_argument("target count must be >= 0");
        if (!(k_dco > 0.0)) throw std::invalid_argument("DCO gain must be positive");
        if (code_bits < 1 || code_bits > 30) throw std::invalid_argument("DCO code width must be 1..30 bits");
        if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    }
    double quantum_hz() const { return 1.0 / counter_window; }
    double target_hz() const { return target_count / counter_window; }
};

struct DfllStep {
    int iteration;
    std::int64_t code;
    double f_if;
    std::int64_t count;
};

struct DfllResult {
    std::vector<DfllStep> trajectory;
    bool converged = false;
    bool limit_cycle = false;
    double final_error_hz = 0.0;
};

/// Counter-based digital FLL. Each iteration counts IF cycles in the window
/// (asynchronous counter, +-1 count quantization) and moves the DCO code by
/// gain * (target - count).
inline DfllResult dfll_calibrate(const DfllParams& p) {
    p.validate();
    const std::int64_t code_max = (std::int64_t{1} << p.code_bits) - 1;
    const std::int64_t code0 = code_max / 2;
    std::int64_t code = code0;
    std::mt19937_64 rng(p.seed);
    double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng);  // IF cycles

    DfllResult res;
    auto f_of = [&](std::int64_t c) { return p.f_if_initial + static_cast<double>(c - code0) * p.k_dco; };
    for (int it = 0; it < p.max_iter; ++it) {
        const double f = f_of(code);
        const double next = phase + f * p.counter_window;
        const auto count = static_cast<std::int64_t>(std::floor(next) - std::floor(phase));
        phase = next - std::floor(next);
        res.trajectory.push_back({it, code, f, count});
        const auto delta = static_cast<std::int64_t>(std::llround(p.gain * static_cast<double>(p.target_count - count)));
        code = std::clamp<std::int64_t>(code + delta, 0, code_max);
    }
    const double q = p.quantum_hz();
    res.final_error_hz = f_of(code) - p.target_hz();
    const std::size_t tail = std::min<std::size_t>(8, res.trajectory.size());
    double worst = std::abs(res.final_error_hz);
    for (std::size_t i = res.trajectory.size() - tail; i < res.trajectory.size(); ++i) {
        worst = std::max(worst, std::abs(res.trajectory[i].f_if - p.target_hz()));
    }
    res.limit_cycle = worst > 2.0 * q;
    res.converged = !res.limit_cycle && std::abs(res.final_error_hz) <= q;
    return res;
}

}  // namespace aiot
