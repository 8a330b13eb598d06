#ifndef DMOD_SWITCHED_ANTENNA_HPP
#define DMOD_SWITCHED_ANTENNA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dmod/fields.hpp"

namespace dmod {

enum class AntennaState : std::uint8_t { one = 1, two = 2 };

constexpr AntennaState other_state(AntennaState s) noexcept {
    return s == AntennaState::one ? AntennaState::two : AntennaState::one;
}

struct AnalyticSource {
    double imbalance; // rad
};

struct MeasuredSource {
    std::string path;
};

using PatternSource = std::variant<AnalyticSource, MeasuredSource>;

/// The two switched pattern states on a shared angle grid.
class DynamicPattern {
public:
    DynamicPattern(FarFieldPattern state1, FarFieldPattern state2, PatternSource source)
        : state1_(std::move(state1)), state2_(std::move(state2)), source_(std::move(source)) {
        const auto a = state1_.angles();
        const auto b = state2_.angles();
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end()))
            throw validation_error("DynamicPattern: states must share an identical angle grid");
    }

    [[nodiscard]] const FarFieldPattern& state1() const noexcept { return state1_; }
    [[nodiscard]] const FarFieldPattern& state2() const noexcept { return state2_; }
    [[nodiscard]] const FarFieldPattern& state(AntennaState s) const noexcept {
        return s == AntennaState::one ? state1_ : state2_;
    }
    [[nodiscard]] const PatternSource& source() const noexcept { return source_; }
    [[nodiscard]] bool analytic() const noexcept { return std::holds_alternative<AnalyticSource>(source_); }
    [[nodiscard]] std::span<const double> angles() const noexcept { return state1_.angles(); }

    /// Shared normalization constant (the joint pre-normalization peak).
    [[nodiscard]] double scale() const noexcept { return state1_.scale(); }

private:
    FarFieldPattern state1_;
    FarFieldPattern state2_;
    PatternSource source_;
};

/// State 1 leads the right arm by `imbalance`, state 2 leads the left arm by the
/// same amount. Both states are divided by one shared constant (their joint
/// peak) so the ratio between them is preserved. `state2_phase_bias` models a
/// constant differential phase offset of the switching hardware.
inline DynamicPattern mirrored_states(const DipoleSpec& spec, double imbalance,
                                      std::span<const double> angles,
                                      double state2_phase_bias = 0.0) {
    if (!(std::isfinite(imbalance) && imbalance >= 0.0 && imbalance < pi))
        throw validation_error("imbalance must lie in [0, pi), got " + std::to_string(imbalance));
    if (!std::isfinite(state2_phase_bias))
        throw validation_error("state2 phase bias must be finite");

    auto raw1 = radiation_integral(excite_arms(spec, ArmExcitation(0.0, imbalance)), angles);
    auto raw2 = radiation_integral(excite_arms(spec, ArmExcitation(imbalance, 0.0)), angles);

    double peak = 0.0;
    for (const auto& v : raw1) peak = std::max(peak, std::abs(v));
    for (const auto& v : raw2) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0)) throw validation_error("mirrored_states: pattern is identically zero");

    const cplx bias = std::polar(1.0, state2_phase_bias);
    for (auto& v : raw1) v /= peak;
    for (auto& v : raw2) v = v / peak * bias;

    std::vector<double> grid(angles.begin(), angles.end());
    return DynamicPattern(FarFieldPattern(grid, std::move(raw1), peak),
                          FarFieldPattern(grid, std::move(raw2), peak), AnalyticSource{imbalance});
}

/// Complex gain at an arbitrary angle inside the grid span: magnitude is
/// interpolated linearly, phase linearly after unwrapping across the bracket.
inline cplx gain_at(const FarFieldPattern& pattern, double angle) {
    const auto a = pattern.angles();
    const auto f = pattern.field();
    if (!(angle >= a.front() && angle <= a.back()))
        throw domain_error("angle " + std::to_string(rad2deg(angle)) + " deg outside pattern span [" +
                           std::to_string(rad2deg(a.front())) + ", " + std::to_string(rad2deg(a.back())) +
                           "] deg");

    const auto hi = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), angle) - a.begin());
    if (a[hi] == angle) return f[hi];
    const std::size_t lo = hi - 1;

    const double t = (angle - a[lo]) / (a[hi] - a[lo]);
    const double mag = std::abs(f[lo]) + t * (std::abs(f[hi]) - std::abs(f[lo]));
    const double p0 = std::arg(f[lo]);
    const double p1 = p0 + wrap_phase(std::arg(f[hi]) - p0);
    return std::polar(mag, wrap_phase(p0 + t * (p1 - p0)));
}

/// Largest |state1| - |state2| magnitude gap over the grid.
inline double state_asymmetry(const DynamicPattern& pattern) {
    const auto f1 = pattern.state1().field();
    const auto f2 = pattern.state2().field();
    double worst = 0.0;
    for (std::size_t i = 0; i < f1.size(); ++i)
        worst = std::max(worst, std::abs(std::abs(f1[i]) - std::abs(f2[i])));
    return worst;
}

// ---------------------------------------------------------------------------

struct SwitchingSchedule {
    enum class Mode { uniform, block, duty };

    Mode mode{Mode::uniform};
    std::size_t block_length{1};
    double duty_fraction{0.5};
    std::size_t period{2};
    AntennaState start_state{AntennaState::one};

    static SwitchingSchedule uniform(AntennaState start = AntennaState::one) {
        return {Mode::uniform, 1, 0.5, 2, start};
    }
    static SwitchingSchedule block(std::size_t length, AntennaState start = AntennaState::one) {
        SwitchingSchedule s{Mode::block, length, 0.5, 2, start};
        s.validate();
        return s;
    }
    /// `fraction` of every `period` symbols in the start state, the rest in the other.
    static SwitchingSchedule duty(double fraction, std::size_t period, AntennaState start = AntennaState::one) {
        SwitchingSchedule s{Mode::duty, 1, fraction, period, start};
        s.validate();
        return s;
    }
    /// Square-wave switching at `switch_rate_hz` with aligned symbol boundaries.
    static SwitchingSchedule from_rates(double symbol_rate_hz, double switch_rate_hz,
                                        AntennaState start = AntennaState::one) {
        if (!(symbol_rate_hz > 0.0 && switch_rate_hz > 0.0))
            throw validation_error("symbol and switch rates must be > 0");
        const double half_period = std::round(symbol_rate_hz / (2.0 * switch_rate_hz));
        return block(static_cast<std::size_t>(std::max(1.0, half_period)), start);
    }

    void validate() const {
        if (start_state != AntennaState::one && start_state != AntennaState::two)
            throw validation_error("schedule start_state must be 1 or 2");
        if (mode == Mode::block && block_length < 1)
            throw validation_error("schedule block_length must be >= 1");
        if (mode == Mode::duty) {
            if (!(duty_fraction > 0.0 && duty_fraction < 1.0))
                throw validation_error("schedule duty fraction must lie in (0, 1)");
            if (period < 2) throw validation_error("schedule duty period must be >= 2");
        }
    }
};

inline std::vector<AntennaState> assign_states(const SwitchingSchedule& schedule, std::size_t n_symbols) {
    schedule.validate();
    if (n_symbols < 1) throw validation_error("assign_states: n_symbols must be >= 1");

    const AntennaState first = schedule.start_state;
    const AntennaState second = other_state(first);
    std::vector<AntennaState> out(n_symbols);

    switch (schedule.mode) {
    case SwitchingSchedule::Mode::uniform:
    case SwitchingSchedule::Mode::block: {
        const std::size_t b = schedule.mode == SwitchingSchedule::Mode::uniform ? 1 : schedule.block_length;
        for (std::size_t i = 0; i < n_symbols; ++i) out[i] = (i / b) % 2 == 0 ? first : second;
        break;
    }
    case SwitchingSchedule::Mode::duty: {
        const std::size_t p = schedule.period;
        const auto on = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(schedule.duty_fraction * static_cast<double>(p))), 1, p - 1);
        for (std::size_t i = 0; i < n_symbols; ++i) out[i] = (i % p) < on ? first : second;
        break;
    }
    }
    return out;
}

} // namespace dmod

#endif // DMOD_SWITCHED_ANTENNA_HPP
