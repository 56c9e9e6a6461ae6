#pragma once

// Signal representation, sources, AWGN and power arithmetic.
//
// Every signal is a complex envelope around the nominal RF carrier; RF
// frequencies appear as offsets. Powers are referenced to a 50 ohm load
// unless a caller passes another impedance.

#include "aiot/bitstream.hpp"
#include "aiot/fft.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aiot {

inline constexpr double kRefImpedance = 50.0;
inline constexpr double kThermalFloorDbmHz = -174.0;
inline constexpr double kDefaultSampleRate = 32.768e6;

/// Raised when a sample rate cannot represent the requested content.
class RateViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) {
    if (watts <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(watts) + 30.0;
}

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Power level in dBm. -inf means "below floor" (no power at all).
struct PowerDbm {
    double value = 0.0;

    double watts() const { return dbm_to_watts(value); }
    bool below_floor() const { return std::isinf(value) && value < 0; }
    static PowerDbm from_watts(double w) { return {watts_to_dbm(w)}; }
};

/// Additive noise description: thermal density plus an excess noise figure.
struct NoiseSpec {
    double density_dbm_hz = kThermalFloorDbmHz;
    double extra_nf_db = 0.0;

    void validate() const {
        if (!(density_dbm_hz <= -100.0)) throw std::invalid_argument("noise density must be <= -100 dBm/Hz");
        if (!(extra_nf_db >= 0.0)) throw std::invalid_argument("extra noise figure must be >= 0 dB");
    }
    /// Integrated noise power over `bandwidth_hz`.
    double power_dbm(double bandwidth_hz) const {
        return density_dbm_hz + 10.0 * std::log10(bandwidth_hz) + extra_nf_db;
    }
};

/// Complex baseband sample stream. Immutable once built.
class SampledSignal {
public:
    SampledSignal() = default;
    SampledSignal(std::vector<cplx> samples, double sample_rate, double epoch = 0.0)
        : samples_(std::move(samples)), sample_rate_(sample_rate), epoch_(epoch) {
        if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
            throw std::invalid_argument("sample rate must be positive");
        }
        if (!std::isfinite(epoch_)) throw std::invalid_argument("epoch must be finite");
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!std::isfinite(samples_[i].real()) || !std::isfinite(samples_[i].imag())) {
                throw std::invalid_argument("non-finite sample at index " + std::to_string(i));
            }
        }
    }

    std::span<const cplx> samples() const { return samples_; }
    const cplx& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    double sample_rate() const { return sample_rate_; }
    double epoch() const { return epoch_; }
    double duration() const { return static_cast<double>(samples_.size()) / sample_rate_; }
    double time_at(std::size_t i) const { return epoch_ + static_cast<double>(i) / sample_rate_; }

    /// Copy of samples [first, first+count) with the epoch moved accordingly.
    SampledSignal slice(std::size_t first, std::size_t count) const {
        if (first > samples_.size()) first = samples_.size();
        count = std::min(count, samples_.size() - first);
        return SampledSignal(std::vector<cplx>(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                                               samples_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                             sample_rate_, time_at(first));
    }

    SampledSignal scaled(double g) const {
        std::vector<cplx> out(samples_);
        for (auto& s : out) s *= g;
        return SampledSignal(std::move(out), sample_rate_, epoch_);
    }

    std::vector<cplx> release() && { return std::move(samples_); }

private:
    std::vector<cplx> samples_;
    double sample_rate_ = 1.0;
    double epoch_ = 0.0;
};

/// Phase 2*pi*f*n/fs reduced to [-pi, pi) before evaluation.
inline cplx rotation(double freq_hz, std::size_t n, double fs) {
    double cycles = freq_hz * static_cast<double>(n) / fs;
    cycles -= std::floor(cycles);
    return std::polar(1.0, 2.0 * M_PI * cycles);
}

/// Rectangular OOK on a carrier. A one is carrier-on at `power` into `ref_impedance`.
inline SampledSignal make_ook_carrier(const BitStream& bits, double symbol_rate, double cfo_hz, PowerDbm power,
                                      double sample_rate, double ref_impedance = kRefImpedance) {
    if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    if (!(ref_impedance > 0.0)) throw std::invalid_argument("reference impedance must be positive");
    if (sample_rate < 8.0 * (std::abs(cfo_hz) + symbol_rate)) {
        throw RateViolation("sample rate " + std::to_string(sample_rate) + " Hz is below 8x(|cfo|+symbol rate)");
    }
    auto n = static_cast<std::size_t>(std::llround(static_cast<double>(bits.size()) * sample_rate / symbol_rate));
    double amp = std::sqrt(power.watts() * ref_impedance);
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(static_cast<double>(i) * symbol_rate / sample_rate);
        if (k >= bits.size()) k = bits.size() - 1;
        if (bits[k]) out[i] = amp * rotation(cfo_hz, i, sample_rate);
    }
    return SampledSignal(std::move(out), sample_rate);
}

/// Mean-square amplitude delivered into `ref_impedance`.
inline PowerDbm measure_power(std::span<const cplx> x, double ref_impedance = kRefImpedance) {
    if (x.empty()) throw std::invalid_argument("cannot measure power of an empty signal");
    double acc = 0.0;
    for (const auto& s : x) acc += std::norm(s);
    return PowerDbm::from_watts(acc / static_cast<double>(x.size()) / ref_impedance);
}

inline PowerDbm measure_power(const SampledSignal& s, double ref_impedance = kRefImpedance) {
    return measure_power(s.samples(), ref_impedance);
}

/// Complex white Gaussian noise samples whose total power is `power_dbm`.
inline std::vector<cplx> gaussian_noise(std::size_t n, double power_dbm, std::uint64_t seed,
                                        double ref_impedance = kRefImpedance) {
    double sigma = std::sqrt(dbm_to_watts(power_dbm) * ref_impedance / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    std::vector<cplx> out(n);
    for (auto& s : out) {
        double re = g(rng);
        double im = g(rng);
        s = {re, im};
    }
    return out;
}

/// Adds noise with total power density + 10log10(bandwidth) + extra_nf.
/// Passing bandwidth = sample rate gives a per-Hz density of density + extra_nf.
inline SampledSignal add_awgn(const SampledSignal& signal, const NoiseSpec& noise, double bandwidth_hz,
                              std::uint64_t seed, double ref_impedance = kRefImpedance) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise bandwidth must be positive");
    noise.validate();
    auto n = gaussian_noise(signal.size(), noise.power_dbm(bandwidth_hz), seed, ref_impedance);
    for (std::size_t i = 0; i < n.size(); ++i) n[i] += signal[i];
    return SampledSignal(std::move(n), signal.sample_rate(), signal.epoch());
}

// Dump format: one JSON header line {"sample_rate":..,"epoch":..,"length":..}
// followed by interleaved re,im as little-endian float64.

inline void write_signal_binary(std::ostream& os, const SampledSignal& s) {
    nlohmann::json hdr{{"sample_rate", s.sample_rate()}, {"epoch", s.epoch()}, {"length", s.size()}};
    os << hdr.dump() << '\n';
    static_assert(std::endian::native == std::endian::little, "dump writer assumes a little-endian host");
    for (const auto& c : s.samples()) {
        double v[2] = {c.real(), c.imag()};
        os.write(reinterpret_cast<const char*>(v), sizeof v);
    }
}

inline SampledSignal read_signal_binary(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("missing signal dump header");
    auto hdr = nlohmann::json::parse(line);
    auto n = hdr.at("length").get<std::size_t>();
    std::vector<cplx> v(n);
    for (auto& c : v) {
        double d[2];
        if (!is.read(reinterpret_cast<char*>(d), sizeof d)) throw std::runtime_error("truncated signal dump");
        c = {d[0], d[1]};
    }
    return SampledSignal(std::move(v), hdr.at("sample_rate").get<double>(), hdr.at("epoch").get<double>());
}

/// CSV dump with the same JSON header line, then `t_s,re,im` rows.
inline void write_signal_csv(std::ostream& os, const SampledSignal& s) {
    nlohmann::json hdr{{"sample_rate", s.sample_rate()}, {"epoch", s.epoch()}, {"length", s.size()}};
    os << hdr.dump() << '\n' << "t_s,re,im\n";
    char buf[128];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g\n", s.time_at(i), s[i].real(), s[i].imag());
        os << buf;
    }
}

}  // namespace aiot
