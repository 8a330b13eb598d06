#ifndef DMOD_FIELDS_HPP
#define DMOD_FIELDS_HPP

// Dipole current model and far-field radiation integral.
//
// The current on a centre-fed dipole of length L is taken as the standing-wave
// approximation I(z) = I_m sin(k (L/2 - |z|)). Each arm is then weighted by its
// own complex excitation, and the far field is the Fourier-type integral
//
//     F(theta) = sin(theta) * integral_{-L/2}^{L/2} I(z) exp(j k z cos(theta)) dz
//
// evaluated per arm with composite Simpson quadrature. The range-dependent
// prefactor j k exp(-j k r) / (4 pi r) is common to every pattern and is omitted.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dmod/angles.hpp"
#include "dmod/errors.hpp"

namespace dmod {

using cplx = std::complex<double>;

struct DipoleSpec {
    double length{};             // m
    double frequency{};          // Hz
    double current_peak{1.0};    // A
    std::size_t arm_samples{1025};

    [[nodiscard]] double wavelength() const noexcept { return speed_of_light / frequency; }
    [[nodiscard]] double wavenumber() const noexcept { return 2.0 * pi / wavelength(); }

    void validate() const {
        if (!(std::isfinite(length) && length > 0.0))
            throw validation_error("DipoleSpec.length must be finite and > 0");
        if (!(std::isfinite(frequency) && frequency > 0.0))
            throw validation_error("DipoleSpec.frequency must be finite and > 0");
        if (!(std::isfinite(current_peak) && current_peak > 0.0))
            throw validation_error("DipoleSpec.current_peak must be finite and > 0");
        if (arm_samples < 257 || arm_samples % 2 == 0)
            throw validation_error("DipoleSpec.arm_samples must be odd and >= 257, got " +
                                   std::to_string(arm_samples));
        const double k = wavenumber();
        if (!(std::isfinite(k) && k > 0.0))
            throw validation_error("DipoleSpec.frequency gives a non-finite wavenumber");
    }

    /// Half-wave dipole at `frequency_hz`.
    static DipoleSpec half_wave(double frequency_hz, std::size_t arm_samples = 1025) {
        return DipoleSpec{speed_of_light / frequency_hz / 2.0, frequency_hz, 1.0, arm_samples};
    }
};

/// Complex weights applied to the left (z < 0) and right (z > 0) arm currents.
/// Only phase imbalance is used by default; the amplitudes are an extension point.
class ArmExcitation {
public:
    ArmExcitation() = default;
    ArmExcitation(double phase_left, double phase_right,
                  double amplitude_left = 1.0, double amplitude_right = 1.0)
        : amp_left_(amplitude_left), amp_right_(amplitude_right) {
        if (!std::isfinite(phase_left) || !std::isfinite(phase_right))
            throw validation_error("ArmExcitation phases must be finite");
        if (!(std::isfinite(amplitude_left) && amplitude_left >= 0.0) ||
            !(std::isfinite(amplitude_right) && amplitude_right >= 0.0))
            throw validation_error("ArmExcitation amplitudes must be finite and >= 0");
        phase_left_ = wrap_phase(phase_left);
        phase_right_ = wrap_phase(phase_right);
    }

    [[nodiscard]] double phase_left() const noexcept { return phase_left_; }
    [[nodiscard]] double phase_right() const noexcept { return phase_right_; }
    [[nodiscard]] double amplitude_left() const noexcept { return amp_left_; }
    [[nodiscard]] double amplitude_right() const noexcept { return amp_right_; }

    [[nodiscard]] cplx left_weight() const { return std::polar(amp_left_, phase_left_); }
    [[nodiscard]] cplx right_weight() const { return std::polar(amp_right_, phase_right_); }

    /// Pure differential drive.
    [[nodiscard]] bool symmetric() const noexcept {
        return phase_left_ == phase_right_ && amp_left_ == amp_right_;
    }

private:
    double phase_left_{0.0};
    double phase_right_{0.0};
    double amp_left_{1.0};
    double amp_right_{1.0};
};

/// Sampled complex current along the dipole axis. The samples must include the
/// feed point z = 0, which splits the two arms for quadrature.
class CurrentDistribution {
public:
    CurrentDistribution(std::vector<double> positions, std::vector<cplx> values, double wavenumber)
        : positions_(std::move(positions)), values_(std::move(values)), wavenumber_(wavenumber) {
        if (positions_.size() != values_.size())
            throw validation_error("CurrentDistribution: positions and values differ in length");
        if (positions_.size() < 3)
            throw validation_error("CurrentDistribution: need at least 3 samples");
        for (std::size_t i = 1; i < positions_.size(); ++i)
            if (!(positions_[i] > positions_[i - 1]))
                throw validation_error("CurrentDistribution: positions must be strictly increasing");
        if (!(std::isfinite(wavenumber_) && wavenumber_ > 0.0))
            throw validation_error("CurrentDistribution: wavenumber must be finite and > 0");
    }

    [[nodiscard]] std::span<const double> positions() const noexcept { return positions_; }
    [[nodiscard]] std::span<const cplx> values() const noexcept { return values_; }
    [[nodiscard]] double wavenumber() const noexcept { return wavenumber_; }
    [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }

private:
    std::vector<double> positions_;
    std::vector<cplx> values_;
    double wavenumber_;
};

/// Complex field versus polar angle. Patterns produced by far_field() are
/// normalized to unit peak magnitude; `scale()` holds the divisor so the
/// un-normalized field is `field()[i] * scale()`.
class FarFieldPattern {
public:
    FarFieldPattern(std::vector<double> angles, std::vector<cplx> field, double scale = 1.0)
        : angles_(std::move(angles)), field_(std::move(field)), scale_(scale) {
        if (angles_.size() != field_.size())
            throw validation_error("FarFieldPattern: angles and field differ in length");
        if (angles_.size() < 2)
            throw validation_error("FarFieldPattern: need at least 2 angles");
        for (std::size_t i = 0; i < angles_.size(); ++i) {
            if (!(angles_[i] > 0.0 && angles_[i] < pi))
                throw domain_error("FarFieldPattern: angle " + std::to_string(rad2deg(angles_[i])) +
                                   " deg outside (0, 180)");
            if (i > 0 && !(angles_[i] > angles_[i - 1]))
                throw validation_error("FarFieldPattern: angles must be strictly increasing");
        }
    }

    [[nodiscard]] std::span<const double> angles() const noexcept { return angles_; }
    [[nodiscard]] std::span<const cplx> field() const noexcept { return field_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] std::size_t size() const noexcept { return angles_.size(); }

    [[nodiscard]] cplx unnormalized(std::size_t i) const { return field_[i] * scale_; }

    [[nodiscard]] double peak_magnitude() const {
        double peak = 0.0;
        for (const auto& v : field_) peak = std::max(peak, std::abs(v));
        return peak;
    }

private:
    std::vector<double> angles_;
    std::vector<cplx> field_;
    double scale_;
};

struct ModeSplit {
    cplx differential;
    cplx common;
};

// ---------------------------------------------------------------------------

/// Standing-wave current I_m sin(k (L/2 - |z|)) sampled at 2*arm_samples - 1
/// points placed symmetrically about the feed.
inline CurrentDistribution sinusoidal_current(const DipoleSpec& spec) {
    spec.validate();
    const std::size_t n = spec.arm_samples;
    const double half = spec.length / 2.0;
    const double k = spec.wavenumber();

    // Right-arm abscissae; the left arm is their exact negation.
    std::vector<double> right(n);
    for (std::size_t i = 0; i < n; ++i)
        right[i] = half * (static_cast<double>(i) / static_cast<double>(n - 1));
    right.back() = half;

    std::vector<double> z;
    z.reserve(2 * n - 1);
    for (std::size_t i = n - 1; i > 0; --i) z.push_back(-right[i]);
    for (std::size_t i = 0; i < n; ++i) z.push_back(right[i]);

    std::vector<cplx> values(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        values[i] = spec.current_peak * std::sin(k * (half - std::abs(z[i])));
    // sin(k*0) is exactly zero, so the endpoint nulls are exact.
    return CurrentDistribution(std::move(z), std::move(values), k);
}

/// Applies the arm weights; the shared feed sample takes their average.
inline CurrentDistribution excite_arms(const DipoleSpec& spec, const ArmExcitation& exc) {
    const CurrentDistribution base = sinusoidal_current(spec);
    const cplx wl = exc.left_weight();
    const cplx wr = exc.right_weight();
    const cplx wf = 0.5 * (wl + wr);

    std::vector<double> z(base.positions().begin(), base.positions().end());
    std::vector<cplx> values(base.values().begin(), base.values().end());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0)
            values[i] *= wl;
        else if (z[i] > 0.0)
            values[i] *= wr;
        else
            values[i] *= wf;
    }
    return CurrentDistribution(std::move(z), std::move(values), base.wavenumber());
}

inline ModeSplit mode_decompose(const ArmExcitation& exc) {
    const cplx wl = exc.left_weight();
    const cplx wr = exc.right_weight();
    return {0.5 * (wl + wr), 0.5 * (wl - wr)};
}

namespace detail {

/// Composite Simpson weights for one arm; throws quadrature_error if the arm
/// is too short, has an even sample count, or is not uniformly spaced.
inline std::vector<double> simpson_weights(std::span<const double> z, const char* arm) {
    const std::size_t n = z.size();
    if (n < 3)
        throw quadrature_error(std::string(arm) + " arm has fewer than 3 samples");
    if (n % 2 == 0)
        throw quadrature_error(std::string(arm) + " arm needs an odd sample count for Simpson quadrature");
    const double h = (z.back() - z.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((z[i] - z[i - 1]) - h) > 1e-9 * std::abs(h))
            throw quadrature_error(std::string(arm) + " arm samples are not uniformly spaced");

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * h / 3.0;
    }
    return w;
}

inline void check_angle(double theta) {
    if (!(theta > 0.0 && theta < pi))
        throw domain_error("angle " + std::to_string(rad2deg(theta)) + " deg outside (0, 180)");
}

} // namespace detail

/// Un-normalized far field sin(theta) * integral I(z) exp(j k z cos theta) dz
/// at each angle.
inline std::vector<cplx> radiation_integral(const CurrentDistribution& current,
                                            std::span<const double> angles) {
    for (double a : angles) detail::check_angle(a);

    const auto z = current.positions();
    const auto feed = std::find(z.begin(), z.end(), 0.0);
    if (feed == z.end())
        throw quadrature_error("current samples do not include the feed point z = 0");
    const auto mid = static_cast<std::size_t>(feed - z.begin());

    const auto wl = detail::simpson_weights(z.subspan(0, mid + 1), "left");
    const auto wr = detail::simpson_weights(z.subspan(mid), "right");

    // Feed sample sits in both arms.
    std::vector<double> w(z.size(), 0.0);
    for (std::size_t i = 0; i < wl.size(); ++i) w[i] += wl[i];
    for (std::size_t i = 0; i < wr.size(); ++i) w[mid + i] += wr[i];

    const auto values = current.values();
    const double k = current.wavenumber();
    std::vector<cplx> out(angles.size());
    for (std::size_t a = 0; a < angles.size(); ++a) {
        const double kc = k * std::cos(angles[a]);
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < z.size(); ++i)
            acc += w[i] * values[i] * std::polar(1.0, kc * z[i]);
        out[a] = std::sin(angles[a]) * acc;
    }
    return out;
}

/// Radiation integral normalized to unit peak magnitude over `angles`.
/// Dividing by a positive real keeps every phase unchanged.
inline FarFieldPattern far_field(const CurrentDistribution& current, std::span<const double> angles) {
    auto raw = radiation_integral(current, angles);
    double peak = 0.0;
    for (const auto& v : raw) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (auto& v : raw) v /= peak;
    else
        peak = 1.0;
    return FarFieldPattern(std::vector<double>(angles.begin(), angles.end()), std::move(raw), peak);
}

/// Normalized half-wave dipole pattern cos((pi/2) cos theta) / sin theta.
inline double halfwave_closed_form(double theta) {
    detail::check_angle(theta);
    return std::cos(0.5 * pi * std::cos(theta)) / std::sin(theta);
}

} // namespace dmod

#endif // DMOD_FIELDS_HPP
