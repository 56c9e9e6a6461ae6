#include "scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>

namespace {

using namespace aiot;
using aiot::cli::ConfigError;

enum Exit { kOk = 0, kUsage = 2, kInternal = 3 };

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw ConfigError("cannot open output file '" + path + "'");
        os = &file;
    }
};

std::string read_text(const std::string& path) {
    if (path.empty() || path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// '0'/'1' characters; whitespace ignored, anything else rejected.
std::vector<std::uint8_t> parse_binary_text(const std::string& text) {
    std::vector<std::uint8_t> v;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == '0' || ch == '1') v.push_back(static_cast<std::uint8_t>(ch - '0'));
        else if (!std::isspace(static_cast<unsigned char>(ch))) {
            throw ConfigError("input byte " + std::to_string(i) + " is not '0', '1' or whitespace");
        }
    }
    return v;
}

void write_binary_text(std::ostream& os, std::span<const std::uint8_t> v) {
    std::string s;
    s.reserve(v.size() + 1);
    for (auto b : v) s += static_cast<char>('0' + b);
    os << s << '\n';
}

cli::ScenarioConfig load(const std::string& path) {
    auto cfg = path.empty() ? cli::ScenarioConfig{} : cli::load_scenario(path);
    return cfg;
}

void validate_config(const cli::ScenarioConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

int cmd_plan_if(double cbw, std::size_t rows, double guard, const std::string& format) {
    if (!(cbw > 0.0)) throw ConfigError("--cbw must be positive");
    const auto fmt = parse_format(format);
    auto plan = plan_if(cbw, rows, 1e6, guard);
    if (fmt == RecordFormat::Csv) {
        std::cout << "n,f_if_hz,image_offset_hz\n";
        for (const auto& c : plan.candidates) {
            std::cout << c.n << ',' << fmt_num(c.f_if_hz) << ',' << fmt_num(c.image_offset_hz) << '\n';
        }
        std::cerr << "lower_bound_hz=" << fmt_num(plan.lower_bound_hz) << " default_if_hz=" << fmt_num(plan.default_if_hz)
                  << " rationale=\"" << plan.rationale << "\"\n";
    } else {
        for (const auto& c : plan.candidates) {
            std::cout << nlohmann::ordered_json{{"n", c.n}, {"f_if_hz", c.f_if_hz}, {"image_offset_hz", c.image_offset_hz}}.dump()
                      << '\n';
        }
    }
    return kOk;
}

int cmd_sim_loop(const cli::ScenarioConfig& cfg, const std::string& out_path, const std::string& format) {
    const auto fmt = parse_format(format);
    const double fs = kDefaultSampleRate;
    const std::size_t n = static_cast<std::size_t>(std::ceil(cfg.calibration.duration_s * fs));
    auto carrier = make_ook_carrier(BitStream(std::vector<std::uint8_t>(1, 1)), 1.0 / cfg.calibration.duration_s, 0.0,
                                    {cfg.calibration.carrier_power_dbm}, fs);
    carrier = carrier.slice(0, std::min(n, carrier.size()));
    auto opt = cfg.calibration.options;
    opt.f_carrier = cfg.rx.f_carrier;
    opt.seed = cfg.seed;
    opt.stop_when_settled = false;
    auto res = run_calibration(carrier, cfg.rffe, cfg.loop, cfg.vco, cfg.calibration.duration_s, opt);

    Output out(out_path);
    if (fmt == RecordFormat::Csv) {
        write_trajectory_csv(*out.os, res.trajectory);
    } else {
        for (const auto& r : res.trajectory) {
            *out.os << nlohmann::ordered_json{{"t_s", r.t}, {"v_ctrl_v", r.v_ctrl}, {"f_lo_hz", r.f_lo},
                                              {"f_if_hz", r.f_if}, {"event", to_string(r.event)}}
                           .dump()
                    << '\n';
        }
    }
    std::ostream& summary = (out.os == &std::cout) ? std::cerr : std::cout;
    summary << "locked=" << (res.locked ? "true" : "false")
            << " t_lock_s=" << (res.locked ? fmt_num(*res.lock_time_s) : std::string("nan"))
            << " cycles=" << (res.locked ? fmt_num(res.lock_cycles) : std::string("nan"))
            << " residual_hz=" << (res.locked ? fmt_num(res.residual_hz) : std::string("nan")) << '\n';
    return kOk;
}

int cmd_sensitivity(double bw, double snr, double nf, double margin, const std::string& format) {
    const auto fmt = parse_format(format);
    if (!(bw > 0.0)) throw ConfigError("--bw must be positive");
    auto p = sensitivity_estimate(bw, snr, nf, margin);
    char buf[64];
    if (fmt == RecordFormat::Csv) std::snprintf(buf, sizeof buf, "%.2f dBm", p.value);
    else std::snprintf(buf, sizeof buf, "{\"sensitivity_dbm\":%.6f}", p.value);
    std::cout << buf << '\n';
    return kOk;
}

int cmd_sweep_ber(const cli::ScenarioConfig& cfg, double pmin, double pmax, double step, const std::string& out_path,
                  const std::string& format) {
    const auto fmt = parse_format(format);
    if (!(step > 0.0) || !(pmax >= pmin)) throw ConfigError("need --step > 0 and --pmax >= --pmin");
    std::vector<PowerDbm> grid;
    for (int k = 0;; ++k) {
        double p = pmin + k * step;
        if (p > pmax + 1e-9) break;
        grid.push_back({p});
    }
    SweepConfig sc;
    sc.rx = cfg.rx;
    sc.layout = cfg.sweep.layout;
    sc.models.rffe = cfg.rffe;
    sc.models.loop = cfg.loop;
    sc.models.vco = cfg.vco;
    sc.models.cal = cfg.calibration.options;
    sc.payload_bits = cfg.sweep.payload_bits;
    sc.trials = cfg.sweep.trials;
    sc.workers = cfg.sweep.workers;
    sc.seed = cfg.seed;
    if (cfg.noise.enabled) sc.channel_noise = cfg.noise.spec;
    auto rows = ber_sweep(grid, sc);
    Output out(out_path);
    write_sweep(*out.os, rows, fmt);
    return kOk;
}

int cmd_codec(const std::string& scheme, bool encode, bool decode, const std::string& in_path,
              const std::string& out_path, double tari, int miller_m, int start_level) {
    if (encode == decode) throw ConfigError("exactly one of --encode or --decode is required");
    if (start_level != 0 && start_level != 1) throw ConfigError("--start-level must be 0 or 1");
    if (scheme == "pie" && !(tari > 0.0)) throw ConfigError("--tari must be positive");
    if (scheme == "miller") check_miller_m(miller_m);
    const auto data = parse_binary_text(read_text(in_path));
    const auto lvl = static_cast<std::uint8_t>(start_level);
    Output out(out_path);
    if (encode) {
        BitStream bits(data);
        ChipStream c;
        if (scheme == "manchester") c = manchester_encode(bits);
        else if (scheme == "pie") c = pie_encode(bits, tari);
        else if (scheme == "fm0") c = fm0_encode(bits, lvl);
        else c = miller_encode(bits, miller_m, lvl);
        write_binary_text(*out.os, c.chips);
    } else {
        ChipStream c{data, 1.0};
        BitStream bits;
        if (scheme == "manchester") bits = manchester_decode(c);
        else if (scheme == "pie") bits = pie_decode(ChipStream{data, 2.0 / tari});
        else if (scheme == "fm0") bits = fm0_decode(c);
        else bits = miller_decode(c, miller_m);
        write_binary_text(*out.os, bits.bits());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator for a frequency-calibrated low-IF OOK receiver"};
    app.require_subcommand(1);
    std::string format = "csv";
    app.add_option("--format", format, "Record format: csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

    double cbw = 180e3, guard = 0.0;
    std::size_t rows = 12;
    auto* plan = app.add_subcommand("plan-if", "List IF candidates for a channel bandwidth");
    plan->add_option("--cbw", cbw, "Channel bandwidth, Hz");
    plan->add_option("--rows", rows, "Number of candidates")->check(CLI::Range(1, 100000));
    plan->add_option("--guard-band", guard, "Guard band added to the channel raster, Hz");

    std::string config, out_path;
    std::optional<double> offset_ppm;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    auto* sim = app.add_subcommand("sim-loop", "Simulate LO calibration; trajectory CSV plus lock summary");
    sim->add_option("--config", config, "Scenario JSON file");
    sim->add_option("--offset-ppm", offset_ppm, "Initial LO error, ppm");
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--duration", duration, "Simulated time, s");
    sim->add_option("--out", out_path, "Trajectory output file (default stdout; summary then goes to stderr)");

    double bw = 180e3, snr = 15.0, nf = 12.0, margin = 6.0;
    auto* sens = app.add_subcommand("sensitivity", "Link-budget sensitivity");
    sens->add_option("--bw", bw, "Detection bandwidth, Hz");
    sens->add_option("--snr", snr, "Required SNR, dB");
    sens->add_option("--nf", nf, "Noise figure, dB");
    sens->add_option("--margin", margin, "Implementation margin, dB");

    double pmin = -95.0, pmax = -80.0, step = 5.0;
    std::optional<std::size_t> trials, bits;
    std::optional<unsigned> workers;
    auto* sweep = app.add_subcommand("sweep-ber", "Monte-Carlo BER versus input power");
    sweep->add_option("--config", config, "Scenario JSON file");
    sweep->add_option("--pmin", pmin, "Lowest input power, dBm");
    sweep->add_option("--pmax", pmax, "Highest input power, dBm");
    sweep->add_option("--step", step, "Power step, dB");
    sweep->add_option("--trials", trials, "Bursts per power point");
    sweep->add_option("--bits", bits, "Payload bits per burst");
    sweep->add_option("--workers", workers, "Worker threads (0 = all cores)");
    sweep->add_option("--seed", seed, "Random seed");
    sweep->add_option("--offset-ppm", offset_ppm, "Initial LO error, ppm");
    sweep->add_option("--out", out_path, "Output file (default stdout)");

    std::string scheme, in_path;
    bool enc = false, dec = false;
    double tari = 25e-6;
    int miller_m = 2, start_level = 1;
    auto* codec = app.add_subcommand("codec", "Encode or decode a line code; files hold '0'/'1' text");
    codec->add_option("--scheme", scheme, "manchester, pie, fm0 or miller")
        ->required()
        ->check(CLI::IsMember({"manchester", "pie", "fm0", "miller"}));
    codec->add_flag("--encode", enc, "Bits in, chips out");
    codec->add_flag("--decode", dec, "Chips in, bits out");
    codec->add_option("--in", in_path, "Input file (default stdin)");
    codec->add_option("--out", out_path, "Output file (default stdout)");
    codec->add_option("--tari", tari, "PIE Tari, s");
    codec->add_option("--miller-m", miller_m, "Miller subcarrier cycles per bit: 2, 4 or 8");
    codec->add_option("--start-level", start_level, "FM0/Miller initial level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*plan) return cmd_plan_if(cbw, rows, guard, format);
        if (*sens) return cmd_sensitivity(bw, snr, nf, margin, format);
        if (*codec) return cmd_codec(scheme, enc, dec, in_path, out_path, tari, miller_m, start_level);
        auto cfg = load(config);
        if (offset_ppm) cfg.vco.init_offset_ppm = *offset_ppm;
        if (seed) cfg.seed = *seed;
        if (duration) cfg.calibration.duration_s = *duration;
        if (trials) cfg.sweep.trials = *trials;
        if (bits) cfg.sweep.payload_bits = *bits;
        if (workers) cfg.sweep.workers = *workers;
        validate_config(cfg);
        if (*sim) return cmd_sim_loop(cfg, out_path, format);
        return cmd_sweep_ber(cfg, pmin, pmax, step, out_path, format);
    } catch (const DecodeError& e) {
        std::cerr << "decode error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}
