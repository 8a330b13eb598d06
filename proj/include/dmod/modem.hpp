#ifndef DMOD_MODEM_HPP
#define DMOD_MODEM_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmod/angles.hpp"
#include "dmod/errors.hpp"

namespace dmod {

using cplx = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// PRBS

/// Fibonacci LFSR. Register bits s[1..n] live in bits 0..n-1 of `state`; each
/// step emits s[n], then shifts s[n] XOR s[tap] into s[1].
class Prbs {
public:
    explicit Prbs(unsigned degree = 11, std::uint32_t seed = 0x7FF) : degree_(degree) {
        tap_ = tap_for(degree);
        mask_ = (std::uint32_t{1} << degree) - 1u;
        state_ = seed & mask_;
        if (state_ == 0) throw validation_error("PRBS seed must be non-zero in the low " +
                                                std::to_string(degree) + " bits");
    }

    std::uint8_t next() noexcept {
        const std::uint32_t out = (state_ >> (degree_ - 1)) & 1u;
        const std::uint32_t tap = (state_ >> (tap_ - 1)) & 1u;
        state_ = ((state_ << 1) | (out ^ tap)) & mask_;
        return static_cast<std::uint8_t>(out);
    }

    [[nodiscard]] std::uint32_t state() const noexcept { return state_; }
    [[nodiscard]] std::uint64_t period() const noexcept { return (std::uint64_t{1} << degree_) - 1; }

private:
    // Maximal-length polynomials x^n + x^tap + 1.
    static unsigned tap_for(unsigned degree) {
        switch (degree) {
        case 7: return 6;
        case 9: return 5;
        case 11: return 9;
        case 15: return 14;
        case 23: return 18;
        case 31: return 28;
        default: throw validation_error("unsupported PRBS degree " + std::to_string(degree));
        }
    }

    unsigned degree_;
    unsigned tap_{};
    std::uint32_t mask_{};
    std::uint32_t state_{};
};

inline Bits prbs(unsigned degree, std::size_t length, std::uint32_t seed = 0x7FF) {
    Prbs gen(degree, seed);
    Bits out(length);
    for (auto& b : out) b = gen.next();
    return out;
}

// ---------------------------------------------------------------------------
// Constellation

constexpr unsigned gray_encode(unsigned v) noexcept { return v ^ (v >> 1); }

constexpr unsigned gray_decode(unsigned g) noexcept {
    unsigned v = g;
    for (unsigned s = 1; s < 32; s <<= 1) v ^= v >> s;
    return v;
}

/// Square M-QAM with independent binary-reflected gray labels on each axis.
/// A label's upper half selects the in-phase level, its lower half the
/// quadrature level; `points()[label]` is the point carrying that label.
class QamConstellation {
public:
    explicit QamConstellation(unsigned order) : order_(order) {
        side_ = static_cast<unsigned>(std::lround(std::sqrt(static_cast<double>(order))));
        if (order < 4 || order > 1024 || side_ * side_ != order || !std::has_single_bit(order))
            throw validation_error("QAM order must be a perfect square power of two in [4, 1024], got " +
                                   std::to_string(order));
        bits_per_symbol_ = static_cast<unsigned>(std::countr_zero(order));
        axis_bits_ = bits_per_symbol_ / 2;
        // Mean of squared odd levels 1..(side-1) is (side^2 - 1)/3 per axis.
        const double energy = 2.0 * (static_cast<double>(order) - 1.0) / 3.0;
        scale_ = 1.0 / std::sqrt(energy);

        points_.resize(order);
        for (unsigned ii = 0; ii < side_; ++ii)
            for (unsigned qi = 0; qi < side_; ++qi)
                points_[label_of(ii, qi)] = {level(ii) * scale_, level(qi) * scale_};
    }

    [[nodiscard]] unsigned order() const noexcept { return order_; }
    [[nodiscard]] unsigned side() const noexcept { return side_; }
    [[nodiscard]] unsigned bits_per_symbol() const noexcept { return bits_per_symbol_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] std::span<const cplx> points() const noexcept { return points_; }
    [[nodiscard]] cplx point(unsigned label) const { return points_.at(label); }

    /// Unscaled odd level 2*index - (side - 1).
    [[nodiscard]] double level(unsigned index) const noexcept {
        return 2.0 * static_cast<double>(index) - static_cast<double>(side_ - 1);
    }

    [[nodiscard]] unsigned label_of(unsigned i_index, unsigned q_index) const noexcept {
        return (gray_encode(i_index) << axis_bits_) | gray_encode(q_index);
    }
    [[nodiscard]] unsigned i_index(unsigned label) const noexcept { return gray_decode(label >> axis_bits_); }
    [[nodiscard]] unsigned q_index(unsigned label) const noexcept {
        return gray_decode(label & ((1u << axis_bits_) - 1u));
    }

    /// Nearest-point label. Exact ties go to the smaller I, then smaller Q.
    [[nodiscard]] unsigned decide(cplx y) const noexcept {
        return label_of(axis_decision(y.real()), axis_decision(y.imag()));
    }

private:
    [[nodiscard]] unsigned axis_decision(double coord) const noexcept {
        const double t = 0.5 * (coord / scale_ + static_cast<double>(side_ - 1));
        if (!(t > 0.0)) return 0; // also catches NaN
        const double idx = std::ceil(t - 0.5);
        return static_cast<unsigned>(std::min(idx, static_cast<double>(side_ - 1)));
    }

    unsigned order_;
    unsigned side_{};
    unsigned bits_per_symbol_{};
    unsigned axis_bits_{};
    double scale_{};
    std::vector<cplx> points_;
};

inline QamConstellation make_constellation(unsigned order) { return QamConstellation(order); }

// ---------------------------------------------------------------------------
// Modulation

struct SymbolStream {
    Bits bits;
    std::vector<cplx> symbols;
    unsigned constellation_order{};
};

inline std::vector<cplx> modulate(std::span<const std::uint8_t> bits, const QamConstellation& c) {
    const unsigned bps = c.bits_per_symbol();
    if (bits.size() % bps != 0)
        throw validation_error("bit count " + std::to_string(bits.size()) + " is not a multiple of " +
                               std::to_string(bps));
    std::vector<cplx> out(bits.size() / bps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (unsigned b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
        out[s] = c.point(label);
    }
    return out;
}

inline Bits demodulate_hard(std::span<const cplx> received, const QamConstellation& c) {
    const unsigned bps = c.bits_per_symbol();
    Bits out(received.size() * bps);
    for (std::size_t s = 0; s < received.size(); ++s) {
        const unsigned label = c.decide(received[s]);
        for (unsigned b = 0; b < bps; ++b)
            out[s * bps + b] = static_cast<std::uint8_t>((label >> (bps - 1 - b)) & 1u);
    }
    return out;
}

/// PRBS payload of `n_bits` mapped onto `c`.
inline SymbolStream make_stream(const QamConstellation& c, std::size_t n_bits, std::uint32_t prbs_seed = 0x7FF,
                                unsigned prbs_degree = 11) {
    if (n_bits == 0) throw validation_error("n_bits must be > 0");
    SymbolStream s;
    s.bits = prbs(prbs_degree, n_bits, prbs_seed);
    s.symbols = modulate(s.bits, c);
    s.constellation_order = c.order();
    return s;
}

// ---------------------------------------------------------------------------
// Metrics

struct ErrorMetrics {
    double magnitude_error_rms{};
    double phase_error_mean{}; // rad, mean absolute wrapped difference
    double evm_rms{};
    double ber{};
    double ser{};
};

inline ErrorMetrics error_metrics(std::span<const cplx> received, std::span<const cplx> reference_symbols,
                                  std::span<const std::uint8_t> reference_bits, const QamConstellation& c) {
    const std::size_t n = received.size();
    if (n == 0) throw validation_error("error_metrics: empty input");
    if (reference_symbols.size() != n)
        throw validation_error("error_metrics: received and reference symbol counts differ");
    const unsigned bps = c.bits_per_symbol();
    if (reference_bits.size() != n * bps)
        throw validation_error("error_metrics: reference bit count does not match symbol count");

    double ref_power = 0.0, mag_sq = 0.0, phase_abs = 0.0, err_sq = 0.0;
    std::size_t bit_errors = 0, symbol_errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx x = reference_symbols[i];
        const cplx y = received[i];
        ref_power += std::norm(x);
        const double dm = std::abs(y) - std::abs(x);
        mag_sq += dm * dm;
        phase_abs += std::abs(wrap_phase(std::arg(y) - std::arg(x)));
        err_sq += std::norm(y - x);

        const unsigned decided = c.decide(y);
        unsigned sent = 0;
        for (unsigned b = 0; b < bps; ++b) sent = (sent << 1) | (reference_bits[i * bps + b] & 1u);
        const auto diff = static_cast<unsigned>(std::popcount(decided ^ sent));
        bit_errors += diff;
        symbol_errors += diff != 0 ? 1 : 0;
    }

    const double nd = static_cast<double>(n);
    const double ref_rms = std::sqrt(ref_power / nd);
    ErrorMetrics m;
    m.magnitude_error_rms = std::sqrt(mag_sq / nd) / ref_rms;
    m.phase_error_mean = phase_abs / nd;
    m.evm_rms = std::sqrt(err_sq / nd) / ref_rms;
    m.ber = static_cast<double>(bit_errors) / static_cast<double>(n * bps);
    m.ser = static_cast<double>(symbol_errors) / nd;
    return m;
}

// ---------------------------------------------------------------------------
// Channel

/// Adds circular complex Gaussian noise with variance 10^(-snr_db/10) times the
/// input's mean symbol energy. snr_db = +inf disables the noise.
template <class Rng>
std::vector<cplx> awgn(std::span<const cplx> symbols, double snr_db, Rng& rng) {
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw validation_error("snr_db must be finite or +inf");
    std::vector<cplx> out(symbols.begin(), symbols.end());
    if (std::isinf(snr_db) || out.empty()) return out;

    double energy = 0.0;
    for (const auto& s : out) energy += std::norm(s);
    energy /= static_cast<double>(out.size());
    const double sigma = std::sqrt(energy * std::pow(10.0, -snr_db / 10.0) / 2.0);

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& s : out) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cplx{sigma * re, sigma * im};
    }
    return out;
}

} // namespace dmod

#endif // DMOD_MODEM_HPP
