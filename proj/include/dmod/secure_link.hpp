#ifndef DMOD_SECURE_LINK_HPP
#define DMOD_SECURE_LINK_HPP

// End-to-end directional-modulation link: the symbol stream is weighted by the
// gain of whichever antenna state is active, the receiver divides by a single
// calibration constant measured at the central direction, and hard decisions
// are scored per angle.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "dmod/modem.hpp"
#include "dmod/switched_antenna.hpp"

namespace dmod {

inline constexpr double infinite_ratio = std::numeric_limits<double>::infinity();

/// Noise configuration for one transmission. No SNR means a noise-free channel.
struct Channel {
    std::optional<double> snr_db;
    std::uint64_t seed{0};
};

inline std::vector<cplx> transmit_at_angle(const SymbolStream& stream, const DynamicPattern& pattern,
                                           const SwitchingSchedule& schedule, double angle,
                                           const Channel& channel = {}) {
    if (stream.symbols.empty()) throw validation_error("transmit_at_angle: empty symbol stream");
    const cplx g1 = gain_at(pattern.state1(), angle);
    const cplx g2 = gain_at(pattern.state2(), angle);
    const auto states = assign_states(schedule, stream.symbols.size());

    std::vector<cplx> y(stream.symbols.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = (states[i] == AntennaState::one ? g1 : g2) * stream.symbols[i];

    if (channel.snr_db) {
        std::seed_seq seq{static_cast<std::uint32_t>(channel.seed), static_cast<std::uint32_t>(channel.seed >> 32)};
        std::mt19937_64 rng(seq);
        return awgn(std::span<const cplx>(y), *channel.snr_db, rng);
    }
    return y;
}

/// Mean of the two state gains at the calibration direction. Received symbols
/// are divided by this constant before demodulation.
inline cplx calibrate_central(const DynamicPattern& pattern, double calibration_angle) {
    const cplx c = 0.5 * (gain_at(pattern.state1(), calibration_angle) + gain_at(pattern.state2(), calibration_angle));
    if (std::abs(c) < 1e-12)
        throw degenerate_calibration_error("calibration constant vanishes at " +
                                           std::to_string(rad2deg(calibration_angle)) + " deg");
    return c;
}

/// Divisor a receiver at `angle` applies before hard decisions. The central
/// calibration constant always fixes phase. With `gain_control` the magnitude
/// is the local mean state gain |g1 + g2| / 2 instead, as an automatic gain
/// control locked to the time-averaged constellation would set it.
inline cplx receiver_divisor(const DynamicPattern& pattern, cplx calibration, double angle, bool gain_control) {
    if (!gain_control) return calibration;
    const double local = 0.5 * std::abs(gain_at(pattern.state1(), angle) + gain_at(pattern.state2(), angle));
    if (local < 1e-12)
        throw degenerate_calibration_error("mean state gain vanishes at " + std::to_string(rad2deg(angle)) + " deg");
    return std::polar(local, std::arg(calibration));
}

/// max(|g1|, |g2|) / min(|g1|, |g2|); infinite_ratio when the smaller is zero.
inline double state_ratio(cplx g1, cplx g2) noexcept {
    const double a = std::abs(g1);
    const double b = std::abs(g2);
    const double lo = std::min(a, b);
    if (!(lo > 0.0)) return infinite_ratio;
    return std::max(a, b) / lo;
}

inline std::vector<double> amplitude_ratio(const DynamicPattern& pattern) {
    const auto f1 = pattern.state1().field();
    const auto f2 = pattern.state2().field();
    std::vector<double> out(f1.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = state_ratio(f1[i], f2[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Decision-boundary threshold

struct Ratio {
    std::int64_t num{1};
    std::int64_t den{0}; // 0 means infinite

    [[nodiscard]] bool infinite() const noexcept { return den == 0; }
    [[nodiscard]] double value() const noexcept {
        return infinite() ? infinite_ratio : static_cast<double>(num) / static_cast<double>(den);
    }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Smallest state ratio rho at which mean-gain calibration (state gains
/// 2 rho/(1+rho) and 2/(1+rho)) pushes some constellation point across a
/// hard-decision boundary. Found by checking every point coordinate against
/// every boundary; rho for the shrinking state solves 2l/(1+rho) = b and for
/// the growing state 2 rho l/(1+rho) = b, with l an odd level and b an even
/// boundary in unscaled units.
inline Ratio ratio_threshold(unsigned order) {
    const QamConstellation c(order);
    const auto side = static_cast<std::int64_t>(c.side());

    Ratio best{}; // infinite
    auto consider = [&best](std::int64_t num, std::int64_t den) {
        if (den <= 0 || num < den) return; // rho must be finite and >= 1
        const std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
        if (best.infinite() || num * best.den < best.num * den) best = {num, den};
    };

    for (unsigned label = 0; label < c.order(); ++label) {
        for (const unsigned idx : {c.i_index(label), c.q_index(label)}) {
            const std::int64_t l = 2 * static_cast<std::int64_t>(idx) - (side - 1);
            for (std::int64_t b = -(side - 2); b <= side - 2; b += 2) {
                if (b == 0 || (b > 0) != (l > 0)) continue;
                if (std::abs(b) < std::abs(l)) {
                    // shrinking state: rho = (2l - b) / b
                    consider(std::abs(2 * l - b), std::abs(b));
                } else if (std::abs(b) < 2 * std::abs(l)) {
                    // growing state: rho = b / (2l - b)
                    consider(std::abs(b), std::abs(2 * l - b));
                }
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Angle sweep

struct SweepConfig {
    double angle_start_deg{52.0};
    double angle_stop_deg{128.0};
    double angle_step_deg{2.0};
    unsigned order{256};
    std::size_t n_bits{72'000};
    SwitchingSchedule schedule{SwitchingSchedule::uniform()};
    double imbalance{deg2rad(45.0)};
    double calibration_angle_deg{90.0};
    std::optional<double> snr_db;
    std::uint64_t master_seed{0x7FF};
    bool receiver_gain_control{true};

    DipoleSpec dipole{DipoleSpec::half_wave(1.86e9)};
    double state2_phase_bias{0.0};
    unsigned threads{1};

    void validate() const {
        if (!(std::isfinite(angle_start_deg) && std::isfinite(angle_stop_deg) && angle_start_deg < angle_stop_deg))
            throw validation_error("angle_start_deg must be < angle_stop_deg");
        if (!(std::isfinite(angle_step_deg) && angle_step_deg > 0.0))
            throw validation_error("angle_step_deg must be > 0");
        const QamConstellation c(order);
        if (n_bits == 0 || n_bits % c.bits_per_symbol() != 0)
            throw validation_error("n_bits must be a positive multiple of " + std::to_string(c.bits_per_symbol()));
        if (!std::isfinite(calibration_angle_deg)) throw validation_error("calibration_angle_deg must be finite");
        if (snr_db && std::isnan(*snr_db)) throw validation_error("snr_db must not be NaN");
        schedule.validate();
        dipole.validate();
    }

    [[nodiscard]] std::vector<double> angles() const {
        return angle_grid_deg(angle_start_deg, angle_stop_deg, angle_step_deg);
    }
};

struct LinkRow {
    double angle_deg{};
    double gain1_abs{};
    double gain2_abs{};
    double ratio{};
    double phase_diff{}; // rad, arg g2 - arg g1 wrapped
    ErrorMetrics metrics;
};

struct LinkReport {
    std::vector<LinkRow> rows;
    double calibration_angle_deg{90.0};
};

/// Seed for row `row` of a sweep. The PRBS register takes the low 11 bits,
/// falling back to all-ones when they are zero.
constexpr std::uint64_t row_seed(std::uint64_t master_seed, std::size_t row) noexcept {
    return master_seed ^ static_cast<std::uint64_t>(row);
}

constexpr std::uint32_t prbs_register_from(std::uint64_t seed) noexcept {
    const auto reg = static_cast<std::uint32_t>(seed & 0x7FFu);
    return reg == 0 ? 0x7FFu : reg;
}

inline DynamicPattern analytic_pattern(const SweepConfig& config) {
    return mirrored_states(config.dipole, config.imbalance, default_angle_grid(), config.state2_phase_bias);
}

namespace detail {

inline LinkRow sweep_row(const SweepConfig& config, const DynamicPattern& pattern, const QamConstellation& c,
                         cplx calibration, double angle_deg, std::size_t row) {
    const double angle = deg2rad(angle_deg);
    const std::uint64_t seed = row_seed(config.master_seed, row);
    const SymbolStream stream = make_stream(c, config.n_bits, prbs_register_from(seed));

    auto y = transmit_at_angle(stream, pattern, config.schedule, angle, Channel{config.snr_db, seed});
    const cplx divisor = receiver_divisor(pattern, calibration, angle, config.receiver_gain_control);
    for (auto& v : y) v /= divisor;

    const cplx g1 = gain_at(pattern.state1(), angle);
    const cplx g2 = gain_at(pattern.state2(), angle);
    LinkRow r;
    r.angle_deg = angle_deg;
    r.gain1_abs = std::abs(g1);
    r.gain2_abs = std::abs(g2);
    r.ratio = state_ratio(g1, g2);
    r.phase_diff = wrap_phase(std::arg(g2) - std::arg(g1));
    r.metrics = error_metrics(y, stream.symbols, stream.bits, c);
    return r;
}

} // namespace detail

/// Per-angle link metrics for `pattern`. Rows are independent; with
/// config.threads > 1 they are evaluated concurrently and merged in angle
/// order, giving the same report as a serial run.
inline LinkReport angle_sweep(const SweepConfig& config, const DynamicPattern& pattern) {
    config.validate();
    const QamConstellation c(config.order);
    const auto grid = angle_grid_deg(config.angle_start_deg, config.angle_stop_deg, config.angle_step_deg);

    cplx calibration;
    try {
        calibration = calibrate_central(pattern, deg2rad(config.calibration_angle_deg));
    } catch (const error& e) {
        rethrow_with_context(e, "calibration at " + std::to_string(config.calibration_angle_deg) + " deg");
    }

    LinkReport report;
    report.calibration_angle_deg = config.calibration_angle_deg;
    report.rows.resize(grid.size());
    std::vector<std::exception_ptr> failures(grid.size());

    auto run_row = [&](std::size_t i) {
        const double angle_deg = config.angle_start_deg + static_cast<double>(i) * config.angle_step_deg;
        try {
            report.rows[i] = detail::sweep_row(config, pattern, c, calibration, angle_deg, i);
        } catch (const error& e) {
            try {
                rethrow_with_context(e, "angle " + std::to_string(angle_deg) + " deg");
            } catch (...) {
                failures[i] = std::current_exception();
            }
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(grid.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run_row(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < grid.size(); i = next++) run_row(i);
            });
    }

    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return report;
}

inline LinkReport angle_sweep(const SweepConfig& config) {
    config.validate();
    return angle_sweep(config, analytic_pattern(config));
}

// ---------------------------------------------------------------------------
// Information beam

struct BeamCriterion {
    enum class Kind { ber_below, ratio_below };
    Kind kind{Kind::ber_below};
    double threshold{1e-3};

    static BeamCriterion ber_below(double tau = 1e-3) { return {Kind::ber_below, tau}; }
    static BeamCriterion ratio_below(double rho) { return {Kind::ratio_below, rho}; }

    [[nodiscard]] bool passes(const LinkRow& row) const noexcept {
        if (kind == Kind::ber_below) return row.metrics.ber < threshold;
        return std::isfinite(row.ratio) && row.ratio < threshold;
    }
};

struct InformationBeam {
    BeamCriterion criterion;
    bool empty{true};
    double lower_edge_deg{0.0};
    double upper_edge_deg{0.0};
    double width_deg{0.0};
    /// True when the passing rows form exactly one run and it holds the calibration row.
    bool contiguous{false};
    std::vector<double> passing_angles_deg;
};

/// Largest run of passing rows around the calibration angle. Edges sit midway
/// between the last passing and first failing rows, or on the sweep limit when
/// the run reaches it.
inline InformationBeam information_beam(const LinkReport& report, const BeamCriterion& criterion) {
    const auto& rows = report.rows;
    if (rows.empty()) throw validation_error("information_beam: empty report");

    InformationBeam beam;
    beam.criterion = criterion;
    std::vector<bool> pass(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pass[i] = criterion.passes(rows[i]);
        if (pass[i]) beam.passing_angles_deg.push_back(rows[i].angle_deg);
    }

    std::size_t center = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (std::abs(rows[i].angle_deg - report.calibration_angle_deg) <
            std::abs(rows[center].angle_deg - report.calibration_angle_deg))
            center = i;
    if (!pass[center]) return beam;

    std::size_t lo = center, hi = center;
    while (lo > 0 && pass[lo - 1]) --lo;
    while (hi + 1 < rows.size() && pass[hi + 1]) ++hi;

    beam.empty = false;
    beam.lower_edge_deg = lo == 0 ? rows.front().angle_deg : 0.5 * (rows[lo - 1].angle_deg + rows[lo].angle_deg);
    beam.upper_edge_deg =
        hi + 1 == rows.size() ? rows.back().angle_deg : 0.5 * (rows[hi].angle_deg + rows[hi + 1].angle_deg);
    beam.width_deg = beam.upper_edge_deg - beam.lower_edge_deg;
    beam.contiguous = beam.passing_angles_deg.size() == hi - lo + 1;
    return beam;
}

} // namespace dmod

#endif // DMOD_SECURE_LINK_HPP
