#pragma once

// Three-step receiver: uncertain-IF (wide IF band) -> LO calibration ->
// approximate low-IF (narrow IF band, free-running calibrated LO).

#include "aiot/bitstream.hpp"
#include "aiot/iffilter.hpp"
#include "aiot/loloop.hpp"
#include "aiot/rffe.hpp"
#include "aiot/sigcore.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <random>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aiot {

// --- IF planning ---------------------------------------------------------------

struct IfCandidate {
    int n;
    double f_if_hz;
    /// Image channel position relative to the wanted carrier (low-side LO).
    double image_offset_hz;
};

struct IfPlan {
    double lower_bound_hz;
    std::vector<IfCandidate> candidates;
    double default_if_hz;
    std::string rationale;
};

/// IF candidates cbw/4 + n*cbw/2 that exceed 3*cbw. Every candidate puts its
/// image half a channel off the channel grid. The default is the first
/// candidate at or above `flicker_floor_hz`. A nonzero guard band widens the
/// channel raster to cbw + guard.
inline IfPlan plan_if(double cbw_hz, std::size_t count = 12, double flicker_floor_hz = 1e6, double guard_band_hz = 0.0) {
    if (!(cbw_hz > 0.0) || !std::isfinite(cbw_hz)) throw std::invalid_argument("channel bandwidth must be positive");
    if (!(guard_band_hz >= 0.0)) throw std::invalid_argument("guard band must be >= 0");
    cbw_hz += guard_band_hz;
    IfPlan plan;
    plan.lower_bound_hz = 3.0 * cbw_hz;
    auto f_of = [&](long long n) { return cbw_hz / 4.0 + cbw_hz / 2.0 * static_cast<double>(n); };
    // smallest n with f_of(n) > 3*cbw: n > 5.5
    const long long n0 = 6;
    for (std::size_t k = 0; k < count; ++k) {
        long long n = n0 + static_cast<long long>(k);
        double f = f_of(n);
        plan.candidates.push_back({static_cast<int>(n), f, -2.0 * f});
    }
    long long nd = std::max<long long>(n0, static_cast<long long>(std::ceil((flicker_floor_hz - cbw_hz / 4.0) / (cbw_hz / 2.0) - 1e-9)));
    plan.default_if_hz = f_of(nd);
    plan.rationale = "flicker/DC avoidance";
    return plan;
}

// --- Link budget ---------------------------------------------------------------

/// -174 dBm/Hz + 10log10(bw) + snr_min + nf + margin.
inline PowerDbm sensitivity_estimate(double bw_hz, double snr_min_db, double nf_db, double margin_db) {
    if (!(bw_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!std::isfinite(snr_min_db) || !std::isfinite(nf_db) || !std::isfinite(margin_db)) {
        throw std::invalid_argument("link budget terms must be finite");
    }
    return {kThermalFloorDbmHz + 10.0 * std::log10(bw_hz) + snr_min_db + nf_db + margin_db};
}

// --- OOK envelope demodulation -------------------------------------------------

class DemodError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ThresholdMode { Adaptive, Fixed };

struct ThresholdConfig {
    ThresholdMode mode = ThresholdMode::Adaptive;
    double fixed_level = 0.0;  // integrated |x| per sample, for Fixed
    int window_symbols = 16;
};

struct DemodOutput {
    BitStream bits;
    std::vector<double> soft;    // mean |x| per symbol
    std::vector<double> threshold;
    double timing_offset = 0.0;  // samples from the signal start to symbol 0
};

namespace detail {
inline std::vector<double> integrate_dump(std::span<const double> mag, double sps, double offset) {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        double a = offset + static_cast<double>(k) * sps;
        double b = a + sps;
        auto ia = static_cast<std::size_t>(std::ceil(a - 1e-9));
        if (b > static_cast<double>(mag.size()) + 1.0) break;
        auto ib = std::min(mag.size(), static_cast<std::size_t>(std::ceil(b - 1e-9)));
        if (ib <= ia) break;
        double s = 0.0;
        for (std::size_t i = ia; i < ib; ++i) s += mag[i];
        out.push_back(s / static_cast<double>(ib - ia));
    }
    return out;
}

inline std::pair<double, double> quartile_means(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t q = std::max<std::size_t>(1, v.size() / 4);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        lo += v[i];
        hi += v[v.size() - 1 - i];
    }
    return {lo / static_cast<double>(q), hi / static_cast<double>(q)};
}
}  // namespace detail

/// |x| -> symbol-rate integrate-and-dump -> threshold -> bits. Symbol timing
/// is the offset in [0, 1 symbol) that maximizes symbol-to-symbol contrast.
inline DemodOutput envelope_demod(const SampledSignal& iq_if, double symbol_rate, const ThresholdConfig& th = {}) {
    if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    const double sps = iq_if.sample_rate() / symbol_rate;
    if (sps < 2.0) throw DemodError("unresolvable symbol timing: fewer than 2 samples per symbol");
    if (static_cast<double>(iq_if.size()) < 2.0 * sps) {
        throw DemodError("unresolvable symbol timing: signal spans " + std::to_string(iq_if.size()) +
                         " samples, need at least 2 symbols of " + std::to_string(sps));
    }
    std::vector<double> mag(iq_if.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(iq_if[i]);

    constexpr int kPhases = 16;
    double best_metric = -1.0;
    DemodOutput out;
    for (int p = 0; p < kPhases; ++p) {
        double off = sps * p / kPhases;
        auto d = detail::integrate_dump(mag, sps, off);
        double metric = 0.0;
        for (std::size_t k = 1; k < d.size(); ++k) metric += std::abs(d[k] - d[k - 1]);
        metric /= static_cast<double>(std::max<std::size_t>(1, d.size() - 1));
        if (metric > best_metric * (1.0 + 1e-12)) {
            best_metric = metric;
            out.timing_offset = off;
            out.soft = std::move(d);
        }
    }

    const auto& d = out.soft;
    const std::size_t n = d.size();
    out.threshold.assign(n, th.fixed_level);
    if (th.mode == ThresholdMode::Adaptive) {
        auto [glo, ghi] = detail::quartile_means(d);
        double thr = (ghi - glo > 0.5 * ghi) ? 0.5 * (glo + ghi) : 0.5 * ghi;
        double ref_hi = ghi;
        const std::size_t half = static_cast<std::size_t>(std::max(1, th.window_symbols / 2));
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t a = k > half ? k - half : 0;
            std::size_t b = std::min(n, k + half);
            auto [lo, hi] = detail::quartile_means(std::vector<double>(d.begin() + static_cast<std::ptrdiff_t>(a),
                                                                       d.begin() + static_cast<std::ptrdiff_t>(b)));
            // a window holding only leakage or noise keeps the previous level
            if (hi - lo > 0.5 * hi && hi > 0.25 * ref_hi) {
                thr = 0.5 * (lo + hi);
                ref_hi = hi;
            }
            out.threshold[k] = thr;
        }
    }
    std::vector<std::uint8_t> bits(n);
    for (std::size_t k = 0; k < n; ++k) bits[k] = d[k] > out.threshold[k] ? 1 : 0;
    out.bits = BitStream(std::move(bits));
    return out;
}

// --- Receiver configuration and burst format -------------------------------------

struct RxConfig {
    double f_carrier = 900e6;
    double cbw = 180e3;
    double f_if_target = 1.035e6;
    double bw_stepA = 1.2e6;
    double bw_stepC = 180e3;
    double snr_min = 15.0;
    double margin = 6.0;
    double symbol_rate = 10e3;
    double guard_band_hz = 0.0;
    bool recenter_on_measured_if = true;
    double lock_loss_factor = 3.0;  // x lock tolerance
    int lock_loss_symbols = 8;

    void validate() const {
        if (!(cbw > 0.0)) throw std::invalid_argument("channel bandwidth must be positive");
        if (!(bw_stepA > bw_stepC) || !(bw_stepC >= cbw)) {
            throw std::invalid_argument("IF bandwidths must satisfy bw_stepA > bw_stepC >= cbw");
        }
        auto plan = plan_if(cbw, 64, 1e6, guard_band_hz);
        bool on_plan = std::any_of(plan.candidates.begin(), plan.candidates.end(),
                                   [&](const IfCandidate& c) { return std::abs(c.f_if_hz - f_if_target) < 1e-6; });
        if (!on_plan) throw std::invalid_argument("target IF is not on the IF plan for this channel bandwidth");
        if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
        if (f_if_target - bw_stepC / 2.0 <= 0.0) throw std::invalid_argument("narrow IF band must lie above DC");
    }
};

/// Burst: silent gap, carrier-on preamble, payload, silent tail. Lengths in symbols.
struct BurstLayout {
    std::size_t gap_symbols = 4;
    std::size_t preamble_symbols = 16;
    std::size_t tail_symbols = 2;
};

inline BitStream burst_bits(const BitStream& payload, const BurstLayout& layout) {
    std::vector<std::uint8_t> b(layout.gap_symbols, 0);
    b.insert(b.end(), layout.preamble_symbols, 1);
    b.insert(b.end(), payload.begin(), payload.end());
    b.insert(b.end(), layout.tail_symbols, 0);
    return BitStream(std::move(b));
}

inline SampledSignal make_burst(const BitStream& payload, const BurstLayout& layout, double symbol_rate, double cfo_hz,
                                PowerDbm power, double sample_rate) {
    return make_ook_carrier(burst_bits(payload, layout), symbol_rate, cfo_hz, power, sample_rate);
}

enum class RxMode { UncertainIF, Calibrating, ApproxLowIF };

inline const char* to_string(RxMode m) {
    switch (m) {
        case RxMode::UncertainIF: return "A";
        case RxMode::Calibrating: return "B";
        default: return "C";
    }
}

struct LinkReport {
    double sensitivity_dbm = 0.0;
    double ber = 0.0;
    std::size_t bit_errors = 0;
    std::size_t n_bits = 0;
    double snr_a_db = 0.0;
    double snr_c_db = 0.0;
    bool locked = false;
    double lock_time_s = 0.0;
    double lock_cycles = 0.0;
    double residual_hz = 0.0;
    double if_center_c_hz = 0.0;
    std::size_t erased_symbols = 0;
    std::vector<RxMode> modes;
};

struct ReceiveResult {
    LinkReport report;
    BitStream bits;
};

struct ReceiverModels {
    RffeConfig rffe{};
    LoopParams loop{};
    VcoModel vco{};
    CalibrationOptions cal{};
};

namespace detail {

inline double mean_power(std::span<const cplx> x, std::size_t a, std::size_t b) {
    b = std::min(b, x.size());
    if (b <= a) return 0.0;
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += std::norm(x[i]);
    return s / static_cast<double>(b - a);
}

inline double power_ratio_db(double on, double off) {
    if (off <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(std::max(on - off, 1e-300) / off);
}

/// Mean frequency of x from the averaged lag-`lag` autocorrelation phase.
inline double lag_frequency(std::span<const cplx> x, std::size_t a, std::size_t b, std::size_t lag, double fs) {
    cplx acc{};
    for (std::size_t i = a + lag; i < b; ++i) acc += x[i] * std::conj(x[i - lag]);
    return std::arg(acc) * fs / (2.0 * M_PI * static_cast<double>(lag));
}

}  // namespace detail

/// Runs the three-step receiver on one burst laid out per `layout` with
/// `n_payload` payload symbols. Receiver noise (-174 dBm/Hz + NF) is added
/// to `rf` once, so every mode sees the same noisy input.
inline ReceiveResult run_receive(const SampledSignal& rf, const RxConfig& cfg, const BurstLayout& layout,
                                 std::size_t n_payload, const ReceiverModels& models, std::uint64_t seed,
                                 const BitStream* reference = nullptr) {
    cfg.validate();
    models.rffe.validate();
    models.loop.validate();
    models.vco.validate();
    const double fs = rf.sample_rate();
    const double sps = fs / cfg.symbol_rate;
    auto at_symbol = [&](double k) { return static_cast<std::size_t>(std::llround(k * sps)); };
    const std::size_t pre_start = at_symbol(static_cast<double>(layout.gap_symbols));
    const std::size_t pay_start = at_symbol(static_cast<double>(layout.gap_symbols + layout.preamble_symbols));
    if (layout.gap_symbols < 1 || layout.preamble_symbols < 2) throw std::invalid_argument("burst needs a gap and a preamble");
    if (rf.size() < at_symbol(static_cast<double>(layout.gap_symbols + layout.preamble_symbols + n_payload))) {
        throw std::invalid_argument("signal shorter than the declared burst");
    }

    ReceiveResult out;
    LinkReport& rep = out.report;
    rep.sensitivity_dbm = sensitivity_estimate(cfg.bw_stepC, cfg.snr_min, models.rffe.nf_db, cfg.margin).value;
    rep.n_bits = n_payload;

    std::vector<cplx> x(rf.samples().begin(), rf.samples().end());
    if (models.rffe.noise_enabled) {
        auto noise = gaussian_noise(x.size(), kThermalFloorDbmHz + models.rffe.nf_db + 10.0 * std::log10(fs), seed);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
    }
    const SampledSignal noisy(std::move(x), fs, rf.epoch());
    const auto xs = noisy.samples();

    // Step A: wide IF band with the uncalibrated LO.
    rep.modes.push_back(RxMode::UncertainIF);
    VcoState vs{};
    vs = vco_step(models.loop.v_mid, 1.0 / fs, models.vco, models.loop, cfg.f_carrier, vs);
    vs.phase_cycles = 0.0;
    double agc_amp = 0.0;
    {
        ComplexBandpass wide(cfg.f_if_target, cfg.bw_stepA, fs);
        const double lo_off = vs.f_lo - cfg.f_carrier;
        const auto settle = static_cast<std::size_t>(std::ceil(sps / 4.0));
        double on = 0.0, off = 0.0;
        std::size_t non = 0, noff = 0;
        for (std::size_t i = 0; i < pay_start; ++i) {
            const double p = std::norm(wide.step(xs[i] * rotation(-lo_off, i, fs)));
            if (i >= settle && i < pre_start) off += p, ++noff;
            if (i >= pre_start + settle) on += p, ++non;
        }
        const double p_off = noff ? off / static_cast<double>(noff) : 0.0;
        const double p_on = non ? on / static_cast<double>(non) : 0.0;
        rep.snr_a_db = detail::power_ratio_db(p_on, p_off);
        if (!(p_on > 2.0 * p_off)) {
            out.bits = BitStream(std::vector<std::uint8_t>(n_payload, 0));
            rep.erased_symbols = n_payload;
            if (reference) {
                rep.bit_errors = n_payload;
                rep.ber = 1.0;
            }
            return out;
        }
        agc_amp = std::sqrt(p_on - p_off);
    }

    const std::size_t total_symbols = n_payload;
    std::vector<std::uint8_t> bits(total_symbols, 0);
    std::vector<bool> decided(total_symbols, false);
    double p1_sum = 0.0, p0_sum = 0.0;
    std::size_t p1_n = 0, p0_n = 0;

    std::size_t cal_from = pre_start;
    double v_start = models.loop.v_mid;
    double drift_start = 0.0;
    std::mt19937_64 drift_rng(seed ^ 0xD1B54A32D192ED03ull);
    bool first_cal = true;

    while (true) {
        // Step B: closed-loop calibration on the carrier.
        rep.modes.push_back(RxMode::Calibrating);
        CalibrationOptions co = models.cal;
        co.f_carrier = cfg.f_carrier;
        co.cal_if_bw = cfg.bw_stepA;
        co.cal_if_center = 0.0;
        co.agc_amplitude = agc_amp;
        co.add_frontend_noise = false;
        co.stop_when_settled = true;
        co.initial_v_ctrl = v_start;
        co.initial_drift_ppm = drift_start;
        co.seed = seed + 0x51ull;
        const std::size_t avail = xs.size() - cal_from;
        auto slice = noisy.slice(cal_from, avail);
        auto cal = run_calibration(slice, models.rffe, models.loop, models.vco, static_cast<double>(avail) / fs, co);
        if (!cal.locked) {
            rep.locked = false;
            break;
        }
        if (first_cal) {
            rep.locked = true;
            rep.lock_time_s = *cal.lock_time_s;
            rep.lock_cycles = cal.lock_cycles;
            rep.residual_hz = cal.residual_hz;
            first_cal = false;
        }

        // Step C: LO free-running at the settled control voltage.
        rep.modes.push_back(RxMode::ApproxLowIF);
        const double v_frozen = cal.settled_v_ctrl;
        VcoState lo = cal.final_vco;
        std::size_t i = cal_from + cal.samples_used;

        // Measure the residual IF on whatever carrier-on signal precedes the payload.
        ComplexBandpass monitor(models.loop.f_ref, cfg.bw_stepA, fs);
        double center = cfg.f_if_target;
        std::vector<cplx> mon_pre;
        std::size_t j = i;
        std::size_t first_symbol = (i <= pay_start) ? 0 : static_cast<std::size_t>(std::ceil((static_cast<double>(i - pay_start)) / sps));
        const std::size_t seg_begin = pay_start + at_symbol(static_cast<double>(first_symbol));
        for (; j < std::min(seg_begin, xs.size()); ++j) {
            mon_pre.push_back(monitor.step(xs[j] * std::conj(lo_iq(lo))));
            lo = vco_step(v_frozen, 1.0 / fs, models.vco, models.loop, cfg.f_carrier, lo, &drift_rng);
        }
        if (cfg.recenter_on_measured_if && mon_pre.size() > static_cast<std::size_t>(sps / 4.0)) {
            double f_est = detail::lag_frequency(mon_pre, mon_pre.size() / 4, mon_pre.size(), 8, fs);
            if (std::abs(f_est - models.loop.f_ref) < cfg.bw_stepA / 2.0) center = f_est;
        } else if (cfg.recenter_on_measured_if) {
            center = models.loop.f_ref;
        }
        rep.if_center_c_hz = center;

        ComplexBandpass narrow(center, cfg.bw_stepC, fs);
        // Warm the narrow filter over the tail of the preamble segment.
        for (std::size_t w = mon_pre.size() > 2048 ? mon_pre.size() - 2048 : 0; w < mon_pre.size(); ++w) {
            narrow.step(mon_pre[w]);
        }

        const double tol = cal.lock_tol_hz;
        std::vector<cplx> yc;
        yc.reserve(xs.size() - seg_begin);
        std::optional<std::size_t> lost_at;
        int bad_run = 0;
        std::size_t sym = first_symbol;
        std::vector<cplx> mon_sym;
        for (j = seg_begin; j < xs.size(); ++j) {
            const cplx d = xs[j] * std::conj(lo_iq(lo));
            lo = vco_step(v_frozen, 1.0 / fs, models.vco, models.loop, cfg.f_carrier, lo, &drift_rng);
            yc.push_back(narrow.step(d));
            mon_sym.push_back(monitor.step(d));
            const std::size_t sym_end = pay_start + at_symbol(static_cast<double>(sym + 1));
            if (j + 1 == sym_end) {
                if (sym < total_symbols) {
                    const double p = detail::mean_power(mon_sym, 0, mon_sym.size());
                    if (p > 0.25 * agc_amp * agc_amp) {
                        double f = detail::lag_frequency(mon_sym, mon_sym.size() / 4, mon_sym.size(), 8, fs);
                        bad_run = std::abs(f - center) > cfg.lock_loss_factor * tol ? bad_run + 1 : 0;
                    }
                    if (bad_run >= cfg.lock_loss_symbols) {
                        lost_at = j + 1;
                        ++sym;
                        break;
                    }
                }
                mon_sym.clear();
                ++sym;
            }
        }

        // Demodulate the symbols covered by this Step C segment.
        const std::size_t seg_symbols = std::min(sym, total_symbols) - std::min(first_symbol, total_symbols);
        if (seg_symbols > 0 && yc.size() >= 2 * static_cast<std::size_t>(sps)) {
            SampledSignal seg(std::move(yc), fs, noisy.time_at(seg_begin));
            auto dm = envelope_demod(seg, cfg.symbol_rate);
            for (std::size_t k = 0; k < seg_symbols && k < dm.bits.size(); ++k) {
                std::size_t g = first_symbol + k;
                if (lost_at && g + static_cast<std::size_t>(cfg.lock_loss_symbols) >= sym) break;  // symbols after the loss began
                bits[g] = dm.bits[k];
                decided[g] = true;
                // SNR from the middle half of each decided symbol.
                const double a = dm.timing_offset + static_cast<double>(k) * sps;
                const auto s0 = static_cast<std::size_t>(a + sps / 4.0), s1 = static_cast<std::size_t>(a + 3.0 * sps / 4.0);
                const double pw = detail::mean_power(seg.samples(), s0, s1);
                if (dm.bits[k]) p1_sum += pw, ++p1_n;
                else p0_sum += pw, ++p0_n;
            }
        }

        if (!lost_at) break;
        cal_from = *lost_at;
        v_start = v_frozen;
        drift_start = lo.drift_ppm;
        if (cal_from + static_cast<std::size_t>(sps) >= xs.size()) break;
    }

    if (p1_n > 0 && p0_n > 0) rep.snr_c_db = detail::power_ratio_db(p1_sum / p1_n, p0_sum / p0_n);
    rep.erased_symbols = static_cast<std::size_t>(std::count(decided.begin(), decided.end(), false));
    out.bits = BitStream(std::move(bits));
    if (reference) {
        // Erased symbols count as errors.
        rep.bit_errors = 0;
        for (std::size_t k = 0; k < total_symbols; ++k) {
            if (!decided[k] || k >= reference->size() || out.bits[k] != (*reference)[k]) ++rep.bit_errors;
        }
        rep.ber = static_cast<double>(rep.bit_errors) / static_cast<double>(std::max<std::size_t>(1, total_symbols));
    }
    return out;
}

// --- BER sweep -----------------------------------------------------------------

/// Wilson score interval, 95%.
inline std::pair<double, double> wilson_interval(std::size_t errors, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double p = static_cast<double>(errors) / static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {errors == 0 ? 0.0 : std::max(0.0, centre - half), errors == n ? 1.0 : std::min(1.0, centre + half)};
}

struct SweepRow {
    double power_dbm;
    double ber;
    double ci_low;
    double ci_high;
    std::size_t n_bits;
    std::size_t errors;
    double snr_c_db;  // mean over trials
};

struct SweepConfig {
    RxConfig rx{};
    BurstLayout layout{};
    ReceiverModels models{};
    std::size_t payload_bits = 1000;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    double sample_rate = kDefaultSampleRate;
    double carrier_cfo_hz = 0.0;
    std::optional<NoiseSpec> channel_noise;  // extra AWGN on the RF input, full sample band
    unsigned workers = 0;  // 0 = hardware concurrency
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Monte-Carlo BER per power point. Trials fan out to a worker pool; each
/// trial's randomness derives only from (seed, power index, trial index), so
/// the rows do not depend on the worker count.
inline std::vector<SweepRow> ber_sweep(const std::vector<PowerDbm>& grid, const SweepConfig& sc) {
    if (sc.trials < 1) throw std::invalid_argument("trials must be >= 1");
    struct TrialOut {
        std::size_t errors = 0, bits = 0;
        double snr_c = 0.0;
    };
    const std::size_t jobs = grid.size() * sc.trials;
    std::vector<TrialOut> results(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job; (job = next.fetch_add(1)) < jobs;) {
            const std::size_t pi = job / sc.trials, ti = job % sc.trials;
            const auto s = mix_seed(sc.seed, pi, ti);
            auto payload = random_bits(sc.payload_bits, s);
            auto rf = make_burst(payload, sc.layout, sc.rx.symbol_rate, sc.carrier_cfo_hz, grid[pi], sc.sample_rate);
            if (sc.channel_noise) rf = add_awgn(rf, *sc.channel_noise, sc.sample_rate, s ^ 0x3C3C3C3Cull);
            auto r = run_receive(rf, sc.rx, sc.layout, sc.payload_bits, sc.models, s ^ 0xA5A5A5A5ull, &payload);
            results[job] = {r.report.bit_errors, sc.payload_bits, r.report.snr_c_db};
        }
    };
    unsigned nw = sc.workers ? sc.workers : std::max(1u, std::thread::hardware_concurrency());
    nw = static_cast<unsigned>(std::min<std::size_t>(nw, jobs));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < nw; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<SweepRow> rows;
    for (std::size_t pi = 0; pi < grid.size(); ++pi) {
        std::size_t e = 0, n = 0;
        double snr = 0.0;
        for (std::size_t ti = 0; ti < sc.trials; ++ti) {
            const auto& r = results[pi * sc.trials + ti];
            e += r.errors;
            n += r.bits;
            snr += r.snr_c;
        }
        auto [lo, hi] = wilson_interval(e, n);
        rows.push_back({grid[pi].value, static_cast<double>(e) / static_cast<double>(n), lo, hi, n, e,
                        snr / static_cast<double>(sc.trials)});
    }
    return rows;
}

}  // namespace aiot
