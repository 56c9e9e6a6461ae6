#pragma once

// CSV and JSON-lines emitters for run records. Column order is fixed:
//   sweep: power_dbm,ber,ci_low,ci_high,n_bits,errors,snr_c_db
//   link:  sensitivity_dbm,ber,bit_errors,n_bits,snr_a_db,snr_c_db,locked,
//          lock_time_s,lock_cycles,residual_hz,if_center_c_hz,erased_symbols,modes

#include "aiot/rxctrl.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aiot {

enum class RecordFormat { Csv, JsonLines };

inline RecordFormat parse_format(const std::string& s) {
    if (s == "csv") return RecordFormat::Csv;
    if (s == "jsonl") return RecordFormat::JsonLines;
    throw std::invalid_argument("unknown output format '" + s + "' (expected csv or jsonl)");
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string mode_string(const std::vector<RxMode>& modes) {
    std::string s;
    for (auto m : modes) s += to_string(m);
    return s;
}

inline constexpr const char* kSweepColumns = "power_dbm,ber,ci_low,ci_high,n_bits,errors,snr_c_db";
inline constexpr const char* kLinkColumns =
    "sensitivity_dbm,ber,bit_errors,n_bits,snr_a_db,snr_c_db,locked,lock_time_s,lock_cycles,residual_hz,"
    "if_center_c_hz,erased_symbols,modes";

inline nlohmann::ordered_json to_json(const SweepRow& r) {
    return {{"power_dbm", r.power_dbm}, {"ber", r.ber},       {"ci_low", r.ci_low},    {"ci_high", r.ci_high},
            {"n_bits", r.n_bits},       {"errors", r.errors}, {"snr_c_db", r.snr_c_db}};
}

inline nlohmann::ordered_json to_json(const LinkReport& r) {
    return {{"sensitivity_dbm", r.sensitivity_dbm},
            {"ber", r.ber},
            {"bit_errors", r.bit_errors},
            {"n_bits", r.n_bits},
            {"snr_a_db", r.snr_a_db},
            {"snr_c_db", r.snr_c_db},
            {"locked", r.locked},
            {"lock_time_s", r.lock_time_s},
            {"lock_cycles", r.lock_cycles},
            {"residual_hz", r.residual_hz},
            {"if_center_c_hz", r.if_center_c_hz},
            {"erased_symbols", r.erased_symbols},
            {"modes", mode_string(r.modes)}};
}

inline void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows, RecordFormat f) {
    if (f == RecordFormat::JsonLines) {
        for (const auto& r : rows) os << to_json(r).dump() << '\n';
        return;
    }
    os << kSweepColumns << '\n';
    for (const auto& r : rows) {
        os << fmt_num(r.power_dbm) << ',' << fmt_num(r.ber) << ',' << fmt_num(r.ci_low) << ',' << fmt_num(r.ci_high)
           << ',' << r.n_bits << ',' << r.errors << ',' << fmt_num(r.snr_c_db) << '\n';
    }
}

inline void write_link_report(std::ostream& os, const LinkReport& r, RecordFormat f, bool header = true) {
    if (f == RecordFormat::JsonLines) {
        os << to_json(r).dump() << '\n';
        return;
    }
    if (header) os << kLinkColumns << '\n';
    os << fmt_num(r.sensitivity_dbm) << ',' << fmt_num(r.ber) << ',' << r.bit_errors << ',' << r.n_bits << ','
       << fmt_num(r.snr_a_db) << ',' << fmt_num(r.snr_c_db) << ',' << (r.locked ? "true" : "false") << ','
       << fmt_num(r.lock_time_s) << ',' << fmt_num(r.lock_cycles) << ',' << fmt_num(r.residual_hz) << ','
       << fmt_num(r.if_center_c_hz) << ',' << r.erased_symbols << ',' << csv_field(mode_string(r.modes)) << '\n';
}

}  // namespace aiot
