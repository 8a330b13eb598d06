#ifndef DMOD_IO_HPP
#define DMOD_IO_HPP

// CSV pattern/report files and the JSON run configuration.
//
// CSV dialect: comma separated, mandatory header, LF line endings, '.' decimal
// separator, numbers printed with 9 significant digits. Magnitudes are field
// decibels (20 log10) and phases are degrees in (-180, 180].

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmod/secure_link.hpp"

namespace dmod::io {

inline constexpr std::string_view pattern_header = "angle_deg,mag_s1_db,phase_s1_deg,mag_s2_db,phase_s2_deg";
inline constexpr std::string_view report_header =
    "angle_deg,gain1_abs,gain2_abs,ratio,phase_diff_deg,mag_err_rms,phase_err_rad,evm,ber,ser";

/// %.9g, with IEEE specials spelled inf / -inf / nan.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline double magnitude_db(cplx v) { return 20.0 * std::log10(std::abs(v)); }

/// Phase in degrees on (-180, 180].
inline double phase_deg(cplx v) {
    double deg = rad2deg(wrap_phase(std::arg(v)));
    if (deg <= -180.0) deg += 360.0;
    return deg;
}

inline cplx from_db_deg(double mag_db, double phase_deg_) {
    return std::polar(std::pow(10.0, mag_db / 20.0), deg2rad(phase_deg_));
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline double parse_number(std::string_view field, std::size_t line) {
    const std::string s(field);
    if (s.empty()) throw parse_error("empty field", line);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw parse_error("'" + s + "' is not a number", line);
    return v;
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <std::size_t Columns>
std::vector<std::array<double, Columns>> read_table(std::istream& in, std::string_view header) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw parse_error("missing header", line_no);
    strip_cr(line);
    if (line != header) throw parse_error("expected header '" + std::string(header) + "'", line_no);

    std::vector<std::array<double, Columns>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != Columns)
            throw parse_error("expected " + std::to_string(Columns) + " fields, got " + std::to_string(fields.size()),
                              line_no);
        std::array<double, Columns> row{};
        for (std::size_t i = 0; i < Columns; ++i) row[i] = parse_number(fields[i], line_no);
        rows.push_back(row);
    }
    return rows;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return in;
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Pattern CSV

inline void write_pattern_csv(std::ostream& out, const DynamicPattern& pattern) {
    out << pattern_header << '\n';
    const auto a = pattern.angles();
    const auto f1 = pattern.state1().field();
    const auto f2 = pattern.state2().field();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out << format_number(rad2deg(a[i])) << ',' << format_number(magnitude_db(f1[i])) << ','
            << format_number(phase_deg(f1[i])) << ',' << format_number(magnitude_db(f2[i])) << ','
            << format_number(phase_deg(f2[i])) << '\n';
    }
}

inline DynamicPattern read_pattern_csv(std::istream& in, const std::string& source_name) {
    const auto rows = detail::read_table<5>(in, pattern_header);
    if (rows.size() < 2) throw validation_error(source_name + ": pattern file needs at least 2 rows");

    std::vector<double> angles;
    std::vector<cplx> s1, s2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i > 0 && !(r[0] > rows[i - 1][0]))
            throw validation_error(source_name + ": angles must be strictly increasing (data row " +
                                   std::to_string(i + 1) + ")");
        angles.push_back(deg2rad(r[0]));
        s1.push_back(from_db_deg(r[1], r[2]));
        s2.push_back(from_db_deg(r[3], r[4]));
    }
    return DynamicPattern(FarFieldPattern(angles, std::move(s1)), FarFieldPattern(angles, std::move(s2)),
                          MeasuredSource{source_name});
}

inline DynamicPattern load_pattern_csv(const std::string& path) {
    auto in = detail::open_in(path);
    try {
        return read_pattern_csv(in, path);
    } catch (const error& e) {
        rethrow_with_context(e, path);
    }
}

inline void save_pattern_csv(const DynamicPattern& pattern, const std::string& path) {
    detail::write_file(path, [&](std::ostream& out) { write_pattern_csv(out, pattern); });
}

/// Single-state variant used by `dmod pattern --state`.
inline void write_state_csv(std::ostream& out, const FarFieldPattern& pattern) {
    out << "angle_deg,mag_db,phase_deg\n";
    const auto a = pattern.angles();
    const auto f = pattern.field();
    for (std::size_t i = 0; i < a.size(); ++i)
        out << format_number(rad2deg(a[i])) << ',' << format_number(magnitude_db(f[i])) << ','
            << format_number(phase_deg(f[i])) << '\n';
}

// ---------------------------------------------------------------------------
// Report CSV

inline void write_report_csv(std::ostream& out, const LinkReport& report) {
    out << report_header << '\n';
    for (const auto& r : report.rows) {
        out << format_number(r.angle_deg) << ',' << format_number(r.gain1_abs) << ',' << format_number(r.gain2_abs)
            << ',' << format_number(r.ratio) << ',' << format_number(rad2deg(r.phase_diff)) << ','
            << format_number(r.metrics.magnitude_error_rms) << ',' << format_number(r.metrics.phase_error_mean) << ','
            << format_number(r.metrics.evm_rms) << ',' << format_number(r.metrics.ber) << ','
            << format_number(r.metrics.ser) << '\n';
    }
}

inline LinkReport read_report_csv(std::istream& in, double calibration_angle_deg = 90.0) {
    LinkReport report;
    report.calibration_angle_deg = calibration_angle_deg;
    for (const auto& r : detail::read_table<10>(in, report_header)) {
        LinkRow row;
        row.angle_deg = r[0];
        row.gain1_abs = r[1];
        row.gain2_abs = r[2];
        row.ratio = r[3];
        row.phase_diff = deg2rad(r[4]);
        row.metrics = {r[5], r[6], r[7], r[8], r[9]};
        report.rows.push_back(row);
    }
    return report;
}

inline void save_report_csv(const LinkReport& report, const std::string& path) {
    detail::write_file(path, [&](std::ostream& out) { write_report_csv(out, report); });
}

inline LinkReport load_report_csv(const std::string& path, double calibration_angle_deg = 90.0) {
    auto in = detail::open_in(path);
    try {
        return read_report_csv(in, calibration_angle_deg);
    } catch (const error& e) {
        rethrow_with_context(e, path);
    }
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    SweepConfig sweep;
    std::optional<std::string> pattern_file;
    std::optional<std::string> output;
};

/// "uniform", "block:N" or "duty:FRACTION:PERIOD".
inline SwitchingSchedule parse_schedule(std::string_view text) {
    const auto parts = detail::split(text, ':');
    auto as_count = [&](std::string_view s) -> std::size_t {
        const double v = detail::parse_number(s, 0);
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e12)
            throw validation_error("schedule '" + std::string(text) + "': expected a positive integer");
        return static_cast<std::size_t>(v);
    };
    try {
        if (parts.size() == 1 && parts[0] == "uniform") return SwitchingSchedule::uniform();
        if (parts.size() == 2 && parts[0] == "block") return SwitchingSchedule::block(as_count(parts[1]));
        if (parts.size() == 3 && parts[0] == "duty")
            return SwitchingSchedule::duty(detail::parse_number(parts[1], 0), as_count(parts[2]));
    } catch (const parse_error&) {
        // fall through to the generic message
    }
    throw validation_error("unrecognised schedule '" + std::string(text) +
                           "' (expected uniform, block:N or duty:F:P)");
}

inline std::string schedule_to_string(const SwitchingSchedule& s) {
    switch (s.mode) {
    case SwitchingSchedule::Mode::uniform: return "uniform";
    case SwitchingSchedule::Mode::block: return "block:" + std::to_string(s.block_length);
    case SwitchingSchedule::Mode::duty:
        return "duty:" + format_number(s.duty_fraction) + ":" + std::to_string(s.period);
    }
    return "uniform";
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) throw validation_error("config must be a JSON object");

    RunConfig rc;
    SweepConfig& s = rc.sweep;
    auto number = [&](const std::string& key) -> double {
        const auto& v = j.at(key);
        if (!v.is_number()) throw validation_error("config key '" + key + "' must be a number");
        return v.get<double>();
    };
    auto unsigned_int = [&](const std::string& key) -> std::uint64_t {
        const auto& v = j.at(key);
        if (!v.is_number_unsigned()) throw validation_error("config key '" + key + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    };
    auto text = [&](const std::string& key) -> std::string {
        const auto& v = j.at(key);
        if (!v.is_string()) throw validation_error("config key '" + key + "' must be a string");
        return v.get<std::string>();
    };

    for (const auto& [key, value] : j.items()) {
        if (key == "angle_start_deg") s.angle_start_deg = number(key);
        else if (key == "angle_stop_deg") s.angle_stop_deg = number(key);
        else if (key == "angle_step_deg") s.angle_step_deg = number(key);
        else if (key == "order") {
            const auto v = unsigned_int(key);
            if (v > 1024) throw validation_error("config key 'order' out of range");
            s.order = static_cast<unsigned>(v);
        } else if (key == "n_bits") s.n_bits = static_cast<std::size_t>(unsigned_int(key));
        else if (key == "imbalance_deg") s.imbalance = deg2rad(number(key));
        else if (key == "pattern_file") rc.pattern_file = text(key);
        else if (key == "calibration_angle_deg") s.calibration_angle_deg = number(key);
        else if (key == "schedule") s.schedule = parse_schedule(text(key));
        else if (key == "snr_db") {
            if (!value.is_null()) s.snr_db = number(key);
        } else if (key == "seed") s.master_seed = unsigned_int(key);
        else if (key == "output") rc.output = text(key);
        else if (key == "receiver_gain_control") {
            if (!value.is_boolean()) throw validation_error("config key 'receiver_gain_control' must be a boolean");
            s.receiver_gain_control = value.get<bool>();
        }
        else throw validation_error("unknown config key '" + key + "'");
    }
    s.validate();
    if (!rc.pattern_file && !(s.imbalance >= 0.0 && s.imbalance < pi))
        throw validation_error("imbalance_deg must lie in [0, 180)");
    return rc;
}

inline nlohmann::json to_json(const RunConfig& rc) {
    const SweepConfig& s = rc.sweep;
    nlohmann::json j = {
        {"angle_start_deg", s.angle_start_deg},
        {"angle_stop_deg", s.angle_stop_deg},
        {"angle_step_deg", s.angle_step_deg},
        {"order", s.order},
        {"n_bits", s.n_bits},
        {"imbalance_deg", rad2deg(s.imbalance)},
        {"calibration_angle_deg", s.calibration_angle_deg},
        {"schedule", schedule_to_string(s.schedule)},
        {"seed", s.master_seed},
        {"receiver_gain_control", s.receiver_gain_control},
    };
    if (s.snr_db) j["snr_db"] = *s.snr_db;
    if (rc.pattern_file) j["pattern_file"] = *rc.pattern_file;
    if (rc.output) j["output"] = *rc.output;
    return j;
}

inline RunConfig load_run_config(const std::string& path) {
    auto in = detail::open_in(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(path + ": " + e.what(), 0);
    }
    try {
        return parse_run_config(j);
    } catch (const error& e) {
        rethrow_with_context(e, path);
    }
}

} // namespace dmod::io

#endif // DMOD_IO_HPP
