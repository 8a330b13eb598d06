#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dmod/dmod.hpp"

namespace dmod::cli {
namespace {

struct GridOptions {
    double start{0.5};
    double stop{179.5};
    double step{0.5};

    void add_to(CLI::App& cmd) {
        cmd.add_option("--start", start, "First angle, deg")->capture_default_str();
        cmd.add_option("--stop", stop, "Last angle, deg")->capture_default_str();
        cmd.add_option("--step", step, "Angle step, deg")->capture_default_str();
    }

    [[nodiscard]] std::vector<double> angles() const {
        auto g = angle_grid_deg(start, stop, step);
        if (g.size() < 2) throw validation_error("angle grid needs at least 2 points");
        return g;
    }
};

struct AntennaOptions {
    double imbalance_deg{45.0};
    double frequency_hz{1.86e9};
    double length_m{0.0}; // 0 selects a half-wave dipole
    std::size_t arm_samples{1025};
    double phase_bias_deg{0.0};

    void add_to(CLI::App& cmd) {
        cmd.add_option("--imbalance-deg", imbalance_deg, "Arm phase imbalance, deg")->capture_default_str();
        cmd.add_option("--frequency", frequency_hz, "Operating frequency, Hz")->capture_default_str();
        cmd.add_option("--length", length_m, "Dipole length, m (default: half wave)");
        cmd.add_option("--arm-samples", arm_samples, "Quadrature samples per arm (odd, >= 257)")
            ->capture_default_str();
        cmd.add_option("--phase-bias-deg", phase_bias_deg, "Constant phase offset on state 2, deg")
            ->capture_default_str();
    }

    [[nodiscard]] DipoleSpec dipole() const {
        DipoleSpec d = DipoleSpec::half_wave(frequency_hz, arm_samples);
        if (length_m != 0.0) d.length = length_m;
        d.validate();
        return d;
    }

    [[nodiscard]] DynamicPattern pattern(std::span<const double> angles) const {
        return mirrored_states(dipole(), deg2rad(imbalance_deg), angles, deg2rad(phase_bias_deg));
    }
};

void emit(const std::optional<std::string>& path, std::ostream& out, const std::string& text) {
    if (!path) {
        out << text;
        return;
    }
    std::FILE* f = std::fopen(path->c_str(), "wb");
    if (!f) throw io_error("cannot open '" + *path + "' for writing");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw io_error("write to '" + *path + "' failed");
}

io::RunConfig load_config(const std::optional<std::string>& path) {
    if (!path) return {};
    return io::load_run_config(*path);
}

DynamicPattern sweep_pattern(const io::RunConfig& rc) {
    if (rc.pattern_file) return io::load_pattern_csv(*rc.pattern_file);
    return analytic_pattern(rc.sweep);
}

std::string ratio_text(const Ratio& r) {
    if (r.infinite()) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld/%lld ≈ %.6f", static_cast<long long>(r.num),
                  static_cast<long long>(r.den), r.value());
    return buf;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-antenna directional modulation simulator", "dmod"};
    app.require_subcommand(1);

    // pattern
    auto* pattern_cmd = app.add_subcommand("pattern", "Emit the two mirrored state patterns as CSV");
    AntennaOptions pattern_antenna;
    GridOptions pattern_grid;
    std::string pattern_state = "both";
    std::optional<std::string> pattern_out;
    pattern_antenna.add_to(*pattern_cmd);
    pattern_grid.add_to(*pattern_cmd);
    pattern_cmd->add_option("--state", pattern_state, "1, 2 or both")
        ->check(CLI::IsMember({"1", "2", "both"}))
        ->capture_default_str();
    pattern_cmd->add_option("--out", pattern_out, "Output CSV (default: stdout)");

    // ratio
    auto* ratio_cmd = app.add_subcommand("ratio", "Emit the per-angle state amplitude ratio as CSV");
    AntennaOptions ratio_antenna;
    GridOptions ratio_grid;
    std::optional<std::string> ratio_pattern_file;
    std::optional<std::string> ratio_out;
    ratio_antenna.add_to(*ratio_cmd);
    ratio_grid.add_to(*ratio_cmd);
    ratio_cmd->add_option("--pattern-file", ratio_pattern_file, "Measured pattern CSV instead of the model");
    ratio_cmd->add_option("--out", ratio_out, "Output CSV (default: stdout)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the per-angle link simulation");
    std::optional<std::string> sweep_config;
    std::optional<std::string> sweep_out;
    unsigned sweep_threads = 1;
    sweep_cmd->add_option("--config", sweep_config, "Run configuration JSON");
    sweep_cmd->add_option("--out", sweep_out, "Report CSV (default: config 'output', else stdout)");
    sweep_cmd->add_option("--threads", sweep_threads, "Worker threads")->check(CLI::Range(1u, 256u));

    // constellation
    auto* const_cmd = app.add_subcommand("constellation", "Emit calibrated received I/Q at one angle");
    std::optional<std::string> const_config;
    std::optional<std::string> const_out;
    double const_angle = 90.0;
    std::size_t const_limit = 0;
    const_cmd->add_option("--config", const_config, "Run configuration JSON");
    const_cmd->add_option("--angle", const_angle, "Observation angle, deg")->required();
    const_cmd->add_option("--symbols", const_limit, "Emit only the first N symbols (0 = all)");
    const_cmd->add_option("--out", const_out, "Output CSV (default: stdout)");

    // beam
    auto* beam_cmd = app.add_subcommand("beam", "Report the information beam of a sweep");
    std::optional<std::string> beam_config;
    std::string beam_criterion = "ber";
    std::optional<double> beam_threshold;
    beam_cmd->add_option("--config", beam_config, "Run configuration JSON");
    beam_cmd->add_option("--criterion", beam_criterion, "ber or ratio")
        ->check(CLI::IsMember({"ber", "ratio"}))
        ->capture_default_str();
    beam_cmd->add_option("--threshold", beam_threshold,
                         "BER limit (default 1e-3) or ratio limit (default: decision threshold for the order)");

    // threshold
    auto* threshold_cmd = app.add_subcommand("threshold", "Print the amplitude-ratio decision threshold");
    unsigned threshold_order = 256;
    threshold_cmd->add_option("--order", threshold_order, "QAM order")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "dmod: " << e.what() << "\n\n" << app.help();
        return exit_validation;
    }

    try {
        if (*pattern_cmd) {
            const auto grid = pattern_grid.angles();
            const auto p = pattern_antenna.pattern(grid);
            std::ostringstream s;
            if (pattern_state == "both")
                io::write_pattern_csv(s, p);
            else
                io::write_state_csv(s, pattern_state == "1" ? p.state1() : p.state2());
            emit(pattern_out, out, s.str());
        } else if (*ratio_cmd) {
            const auto p = ratio_pattern_file ? io::load_pattern_csv(*ratio_pattern_file)
                                              : ratio_antenna.pattern(ratio_grid.angles());
            const auto rho = amplitude_ratio(p);
            std::ostringstream s;
            s << "angle_deg,ratio\n";
            for (std::size_t i = 0; i < rho.size(); ++i)
                s << io::format_number(rad2deg(p.angles()[i])) << ',' << io::format_number(rho[i]) << '\n';
            emit(ratio_out, out, s.str());
        } else if (*sweep_cmd) {
            auto rc = load_config(sweep_config);
            rc.sweep.threads = sweep_threads;
            const auto report = angle_sweep(rc.sweep, sweep_pattern(rc));
            std::ostringstream s;
            io::write_report_csv(s, report);
            emit(sweep_out ? sweep_out : rc.output, out, s.str());
        } else if (*const_cmd) {
            const auto rc = load_config(const_config);
            rc.sweep.validate();
            const auto pattern = sweep_pattern(rc);
            const QamConstellation c(rc.sweep.order);
            const auto seed = row_seed(rc.sweep.master_seed, 0);
            const auto stream = make_stream(c, rc.sweep.n_bits, prbs_register_from(seed));
            const double angle = deg2rad(const_angle);
            auto y = transmit_at_angle(stream, pattern, rc.sweep.schedule, angle, Channel{rc.sweep.snr_db, seed});
            const cplx cal = receiver_divisor(pattern, calibrate_central(pattern, deg2rad(rc.sweep.calibration_angle_deg)),
                                              angle, rc.sweep.receiver_gain_control);
            const auto states = assign_states(rc.sweep.schedule, y.size());
            const std::size_t n = const_limit == 0 ? y.size() : std::min(const_limit, y.size());

            std::ostringstream s;
            s << "index,state,i,q,ref_i,ref_q\n";
            for (std::size_t i = 0; i < n; ++i) {
                const cplx v = y[i] / cal;
                s << i << ',' << static_cast<int>(states[i]) << ',' << io::format_number(v.real()) << ','
                  << io::format_number(v.imag()) << ',' << io::format_number(stream.symbols[i].real()) << ','
                  << io::format_number(stream.symbols[i].imag()) << '\n';
            }
            emit(const_out ? const_out : rc.output, out, s.str());
        } else if (*beam_cmd) {
            auto rc = load_config(beam_config);
            const auto report = angle_sweep(rc.sweep, sweep_pattern(rc));
            const BeamCriterion criterion =
                beam_criterion == "ber"
                    ? BeamCriterion::ber_below(beam_threshold.value_or(1e-3))
                    : BeamCriterion::ratio_below(beam_threshold.value_or(ratio_threshold(rc.sweep.order).value()));
            const auto beam = information_beam(report, criterion);
            nlohmann::json j = {
                {"criterion", beam_criterion},
                {"threshold", criterion.threshold},
                {"empty", beam.empty},
                {"contiguous", beam.contiguous},
                {"passing_angles_deg", beam.passing_angles_deg},
            };
            if (!beam.empty) {
                j["lower_edge_deg"] = beam.lower_edge_deg;
                j["upper_edge_deg"] = beam.upper_edge_deg;
                j["width_deg"] = beam.width_deg;
            }
            out << j.dump(2) << '\n';
        } else if (*threshold_cmd) {
            out << ratio_text(ratio_threshold(threshold_order)) << '\n';
        }
    } catch (const error& e) {
        err << "dmod: " << e.what() << '\n';
        return e.kind() == ErrorKind::io ? exit_io : exit_validation;
    } catch (const std::exception& e) {
        err << "dmod: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_ok;
}

} // namespace dmod::cli
