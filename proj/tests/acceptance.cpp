// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "aiot/aiot.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace aiot;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void run(const char* id, const char* title, double budget_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > budget_s) {
        v.pass = false;
        v.detail += " (over time budget)";
    }
    std::printf("%s %s: %s | %s | %.2fs of %.0fs\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str(), dt, budget_s);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SampledSignal tone(double f, double power_dbm, std::size_t n, double fs) {
    std::vector<cplx> x(n);
    const double a = std::sqrt(dbm_to_watts(power_dbm) * kRefImpedance);
    for (std::size_t i = 0; i < n; ++i) x[i] = a * rotation(f, i, fs);
    return SampledSignal(std::move(x), fs);
}

// Crossings of the final value that exceed one quantum on both sides.
int ringing_crossings(const LoopTrajectory& t, double final_f, double q) {
    int side = 0, crossings = 0;
    for (const auto& r : t) {
        const double e = r.f_if - final_f;
        if (std::abs(e) <= q) continue;
        const int s = e > 0 ? 1 : -1;
        if (side != 0 && s != side) ++crossings;
        side = s;
    }
    return crossings;
}

}  // namespace

int main() {
    const double fs = kDefaultSampleRate;

    run("C1", "IF plan reproduction", 1.0, [] {
        auto p = plan_if(180e3);
        const double expect[] = {585e3, 675e3, 765e3, 855e3, 945e3, 1035e3};
        bool ok = p.lower_bound_hz == 540e3 && p.default_if_hz == 1035e3;
        std::string got;
        for (int i = 0; i < 6; ++i) {
            ok = ok && p.candidates[i].f_if_hz == expect[i];
            got += fmt("%.0f ", p.candidates[i].f_if_hz / 1e3);
        }
        return Verdict{ok, fmt("first six kHz = %sbound = %.0f kHz (exact match)", got.c_str(), p.lower_bound_hz / 1e3)};
    });

    run("C2", "sensitivity reproduction", 1.0, [] {
        const double s = sensitivity_estimate(180e3, 15.0, 12.0, 6.0).value;
        return Verdict{std::abs(s - (-88.45)) <= 0.01 && s < -88.0, fmt("%.4f dBm (target -88.45 +-0.01, < -88)", s)};
    });

    run("C3", "loop settling at +500 ppm", 10.0, [&] {
        VcoModel vco;
        vco.init_offset_ppm = 500.0;
        const LoopParams loop;
        const double dur = 2e-3;
        auto carrier = make_ook_carrier({1}, 1.0 / dur, 0.0, {-60.0}, fs);
        auto r = run_calibration(carrier, RffeConfig{}, loop, vco, dur);
        const int cross = ringing_crossings(r.trajectory, r.settled_f_if, loop.cp_quantum_hz());
        const bool ok = r.locked && r.lock_cycles >= 6.0 && r.lock_cycles <= 30.0 && cross <= 1;
        return Verdict{ok, fmt("locked=%d cycles=%.2f (6-30, target ~12) t_lock=%.2f us crossings=%d (<=1)", r.locked,
                               r.lock_cycles, r.lock_time_s.value_or(NAN) * 1e6, cross)};
    });

    run("C4", "post-lock accuracy, 100 runs over +-1000 ppm", 120.0, [&] {
        const LoopParams loop;
        const double bound = loop.dead_zone + loop.cp_quantum_hz();
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ppm(-1000.0, 1000.0);
        const double dur = 2e-3;
        auto carrier = make_ook_carrier({1}, 1.0 / dur, 0.0, {-60.0}, fs);
        int ok_runs = 0;
        double worst_res = 0, worst_inst = 0, worst_ppm = 0;
        for (int k = 0; k < 100; ++k) {
            VcoModel vco;
            vco.init_offset_ppm = ppm(rng);
            CalibrationOptions o;
            o.add_frontend_noise = true;
            o.seed = 1000 + static_cast<std::uint64_t>(k);
            auto r = run_calibration(carrier, RffeConfig{}, loop, vco, dur, o);
            const double lo_ppm = r.residual_hz / 900e6 * 1e6;
            worst_res = std::max(worst_res, r.residual_hz);
            worst_inst = std::max(worst_inst, r.max_post_lock_error_hz);
            worst_ppm = std::max(worst_ppm, lo_ppm);
            if (r.locked && r.residual_hz <= bound && r.max_post_lock_error_hz <= bound && lo_ppm <= 2.0) ++ok_runs;
        }
        return Verdict{ok_runs == 100, fmt("%d/100 within bound %.1f kHz; worst residual %.2f kHz, worst instantaneous "
                                           "%.1f kHz, worst LO error %.3f ppm (<=2)",
                                           ok_runs, bound / 1e3, worst_res / 1e3, worst_inst / 1e3, worst_ppm)};
    });

    run("C5", "front-end anchors", 60.0, [&] {
        RffeConfig c;
        const double irr = selectivity_response(c.if_hz, c) - selectivity_response(-c.if_hz, c);
        const double oob = selectivity_response(4e6, c) - selectivity_response(40e6, c);
        // NF from a -60 dBm tone at the IF through the noisy front-end
        const std::size_t n = std::size_t{1} << 20;
        const double f = std::round(c.if_hz * n / fs) * fs / n;
        auto y = apply_frontend(tone(f, -60.0, n, fs), c, 0.0, 55);
        cplx a{};
        for (std::size_t i = 0; i < n; ++i) a += y[i] * rotation(-f, i, fs);
        a /= static_cast<double>(n);
        std::vector<cplx> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - a * rotation(f, i, fs);
        auto psd = psd_welch(resid, fs, 4096);
        double dens = 0;
        int bins = 0;
        for (std::size_t k = 0; k < psd.size(); ++k) {
            if (std::abs(bin_frequency(k, psd.size(), fs) - c.if_hz) < 90e3) dens += psd[k], ++bins;
        }
        dens /= bins;
        const double snr_out = 10.0 * std::log10(std::norm(a) / (dens * 180e3));
        const double snr_in = -60.0 - (kThermalFloorDbmHz + 10.0 * std::log10(180e3));
        const double nf = snr_in - snr_out;
        const bool ok = std::abs(irr - 16.7) <= 0.5 && std::abs(oob - 17.0) <= 0.5 && std::abs(nf - 12.0) <= 1.0;
        return Verdict{ok, fmt("IRR %.3f dB (16.7+-0.5), 4 vs 40 MHz %.3f dB (17+-0.5), NF at IF %.2f dB (12+-1, %zu samples)",
                               irr, oob, nf, n)};
    });

    run("C6", "RFD pulse-rate law", 30.0, [&] {
        const double f_ref = LoopParams{}.f_ref;
        bool ok = true;
        double worst = 0;
        int wrong_sign = 0;
        for (int i = 0; i <= 12; ++i) {
            const double frac = 0.01 * std::pow(50.0, i / 12.0);
            for (int sign : {1, -1}) {
                const double df = sign * frac * f_ref;
                const double T = std::max(100.0 / std::abs(df), 200e-6);
                RfdState st{};
                SchmittTrigger si(SchmittConfig{}), sq(SchmittConfig{});
                long long last_quarter = 0, up = 0, dn = 0;
                const auto n = static_cast<std::size_t>(T * fs);
                for (std::size_t k = 0; k < n; ++k) {
                    cplx y = rotation(f_ref + df, k, fs);
                    const bool ib = si.step(y.real()), qb = sq.step(y.imag());
                    const auto quarter = static_cast<long long>(std::floor((k + 1) / fs * f_ref * 4.0));
                    if (quarter == last_quarter) continue;
                    last_quarter = quarter;
                    auto [ev, next] = rfd_step(ib, qb, st);
                    st = next;
                    up += ev == RfdEvent::Up;
                    dn += ev == RfdEvent::Dn;
                }
                // corrective: f_if above f_ref must raise f_lo (UP)
                if ((sign > 0 && dn > 0) || (sign < 0 && up > 0)) ++wrong_sign;
                const double dev = std::abs((up + dn) / T / std::abs(df) - 1.0);
                worst = std::max(worst, dev);
                ok = ok && dev <= 0.2;
            }
        }
        ok = ok && wrong_sign == 0;
        return Verdict{ok, fmt("worst |rate/|df| - 1| = %.4f (<=0.20) over 26 errors in [0.01,0.5] f_ref; wrong-sign pulses %d",
                               worst, wrong_sign)};
    });

    run("C7", "codec suite", 60.0, [] {
        int fails = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto b = random_bits(10000, seed);
            fails += manchester_decode(manchester_encode(b)) != b;
            fails += pie_decode(pie_encode(b, 25e-6)) != b;
            for (std::uint8_t s : {0, 1}) fails += fm0_decode(fm0_encode(b, s)) != b;
            for (int m : {2, 4, 8}) fails += miller_decode(miller_encode(b, m), m) != b;
        }
        int pair_fail = 0;
        for (std::uint8_t a : {0, 1}) {
            for (std::uint8_t c : {0, 1}) {
                bool threw = false;
                try {
                    manchester_decode({{a, c}, 1.0});
                } catch (const DecodeError&) {
                    threw = true;
                }
                pair_fail += threw != (a == c);
            }
        }
        return Verdict{fails == 0 && pair_fail == 0,
                       fmt("round-trip mismatches %d over 10 seeds x 7 codec variants x 10^4 bits; Manchester pair "
                           "misclassifications %d/4",
                           fails, pair_fail)};
    });

    run("C8", "end-to-end link", 300.0, [&] {
        SweepConfig sc;
        sc.models.vco.init_offset_ppm = 500.0;
        sc.payload_bits = 1000;
        sc.trials = 100;
        sc.seed = 88;
        auto rows = ber_sweep({{-88.0}, {-60.0}}, sc);
        const auto& lo = rows[0];
        const auto& hi = rows[1];
        const double snr_target = -88.0 - (kThermalFloorDbmHz + 10.0 * std::log10(180e3)) - 12.0;
        const bool ok = lo.n_bits >= 100000 && hi.n_bits >= 100000 && std::abs(lo.snr_c_db - snr_target) <= 1.5 &&
                        lo.ber <= 1e-3 && hi.errors == 0;
        return Verdict{ok, fmt("-88 dBm: SNR %.2f dB (%.2f+-1.5), BER %.2e over %zu bits (<=1e-3, CI %.1e..%.1e); -60 dBm: %zu "
                               "errors over %zu bits (=0)",
                               lo.snr_c_db, snr_target, lo.ber, lo.n_bits, lo.ci_low, lo.ci_high, hi.errors, hi.n_bits)};
    });

    run("C9", "Step A to Step C SNR improvement", 60.0, [&] {
        RxConfig cfg;
        BurstLayout layout;
        ReceiverModels m;
        double gain = 0;
        const int trials = 5;
        for (int k = 0; k < trials; ++k) {
            auto payload = random_bits(300, 900 + k);
            auto rf = make_burst(payload, layout, cfg.symbol_rate, 0.0, {-80.0}, fs);
            auto r = run_receive(rf, cfg, layout, payload.size(), m, 9000 + k, &payload);
            gain += r.report.snr_c_db - r.report.snr_a_db;
        }
        gain /= trials;
        const double expect = 10.0 * std::log10(cfg.bw_stepA / cfg.bw_stepC);
        return Verdict{std::abs(gain - expect) <= 1.0, fmt("SNR_C - SNR_A = %.2f dB vs %.2f dB (+-1.0) at -80 dBm", gain, expect)};
    });

    run("C10", "SAR and DFLL alternatives", 10.0, [] {
        const Band band{0.9e9 * 0.99, 0.9e9 * 1.01};
        const double bound = 35.2e3;
        double worst = 0;
        bool eight = true;
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> tgt(band.lo_hz, band.hi_hz);
        for (int k = 0; k < 2000; ++k) {
            const double target = tgt(rng);
            int calls = 0;
            auto r = sar_calibrate(
                [&](double f) {
                    ++calls;
                    return f < target ? -1 : (f > target ? 1 : 0);
                },
                8, band);
            eight = eight && calls == 8;
            worst = std::max(worst, std::abs(r.f_lo - target));
        }
        DfllParams p;
        p.f_if_initial = p.target_hz() - 450e3;
        auto good = dfll_calibrate(p);
        DfllParams hot = p;
        hot.gain *= 10.0;
        auto bad = dfll_calibrate(hot);
        const bool ok = eight && worst <= bound && good.converged && std::abs(good.final_error_hz) <= p.quantum_hz() &&
                        bad.limit_cycle;
        return Verdict{ok, fmt("SAR worst residual %.2f kHz (<=35.2) with 8 comparisons each=%d; DFLL error %.1f kHz "
                               "(<=%.0f) converged=%d; 10x gain limit_cycle=%d",
                               worst / 1e3, eight, good.final_error_hz / 1e3, p.quantum_hz() / 1e3, good.converged,
                               bad.limit_cycle)};
    });

    std::printf("acceptance: %d of 10 criteria failed\n", failures);
    return failures;
}
