#include <gtest/gtest.h>

#include <cmath>

#include "dmod/secure_link.hpp"
#include "oracles.hpp"

using namespace dmod;

namespace {

const DipoleSpec kHalfWave = DipoleSpec::half_wave(1.86e9);

DynamicPattern flat_pattern(cplx g1, cplx g2) {
    const std::vector<double> grid = {deg2rad(10.0), deg2rad(90.0), deg2rad(170.0)};
    return DynamicPattern(FarFieldPattern(grid, {g1, g1, g1}), FarFieldPattern(grid, {g2, g2, g2}),
                          MeasuredSource{"synthetic"});
}

LinkReport synthetic_report(const std::vector<double>& angles_deg, auto ratio_of) {
    LinkReport r;
    r.calibration_angle_deg = 90.0;
    for (double a : angles_deg) {
        LinkRow row;
        row.angle_deg = a;
        row.ratio = ratio_of(a);
        row.metrics.ber = 0.0;
        r.rows.push_back(row);
    }
    return r;
}

std::vector<double> sweep_angles(double start, double stop, double step) {
    std::vector<double> out;
    for (double a = start; a <= stop + 1e-9; a += step) out.push_back(a);
    return out;
}

bool same_report(const LinkReport& a, const LinkReport& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& x = a.rows[i];
        const auto& y = b.rows[i];
        if (x.angle_deg != y.angle_deg || x.gain1_abs != y.gain1_abs || x.gain2_abs != y.gain2_abs ||
            x.ratio != y.ratio || x.phase_diff != y.phase_diff ||
            x.metrics.magnitude_error_rms != y.metrics.magnitude_error_rms ||
            x.metrics.phase_error_mean != y.metrics.phase_error_mean || x.metrics.evm_rms != y.metrics.evm_rms ||
            x.metrics.ber != y.metrics.ber || x.metrics.ser != y.metrics.ser)
            return false;
    }
    return true;
}

} // namespace

TEST(Transmit, TransparentChannel) {
    const QamConstellation c(256);
    const auto s = make_stream(c, 800);
    const auto y = transmit_at_angle(s, flat_pattern(1.0, 1.0), SwitchingSchedule::uniform(), deg2rad(45.0));
    EXPECT_EQ(y, s.symbols);
}

TEST(Transmit, TwoScaledCopies) {
    const QamConstellation c(4);
    const auto s = make_stream(c, 400);
    const auto y = transmit_at_angle(s, flat_pattern(1.0, 0.8), SwitchingSchedule::uniform(), deg2rad(45.0));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], (i % 2 == 0 ? 1.0 : 0.8) * s.symbols[i]);
}

TEST(Transmit, BroadsideIsSingleGain) {
    const auto p = mirrored_states(kHalfWave, pi / 4.0, default_angle_grid());
    const QamConstellation c(256);
    const auto s = make_stream(c, 8000);
    const auto y = transmit_at_angle(s, p, SwitchingSchedule::uniform(), pi / 2.0);
    const cplx g = y[0] / s.symbols[0];
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(std::abs(y[i] / s.symbols[i] - g), 0.0, 1e-9);
}

TEST(Transmit, NoiseIsSeeded) {
    const QamConstellation c(16);
    const auto s = make_stream(c, 400);
    const auto p = flat_pattern(1.0, 1.0);
    const auto a = transmit_at_angle(s, p, SwitchingSchedule::uniform(), 1.0, Channel{20.0, 7});
    const auto b = transmit_at_angle(s, p, SwitchingSchedule::uniform(), 1.0, Channel{20.0, 7});
    const auto d = transmit_at_angle(s, p, SwitchingSchedule::uniform(), 1.0, Channel{20.0, 8});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, d);
    EXPECT_NE(a, s.symbols);
}

TEST(Transmit, OutOfSpan) {
    const QamConstellation c(16);
    const auto s = make_stream(c, 400);
    EXPECT_THROW(transmit_at_angle(s, flat_pattern(1.0, 1.0), SwitchingSchedule::uniform(), deg2rad(5.0)),
                 domain_error);
}

TEST(Calibrate, Examples) {
    const cplx g = std::polar(2.0, deg2rad(30.0));
    const cplx c = calibrate_central(flat_pattern(g, g), pi / 2.0);
    EXPECT_NEAR(std::abs(c - g), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(g / c - 1.0), 0.0, 1e-15);

    EXPECT_NEAR(std::abs(calibrate_central(flat_pattern(1.0, 0.8), pi / 2.0) - 0.9), 0.0, 1e-15);
    EXPECT_THROW(calibrate_central(flat_pattern(1.0, -1.0), pi / 2.0), degenerate_calibration_error);
}

TEST(Calibrate, BroadsideBerZero) {
    const auto p = mirrored_states(kHalfWave, pi / 4.0, default_angle_grid());
    const QamConstellation c(256);
    const auto s = make_stream(c, 72000);
    auto y = transmit_at_angle(s, p, SwitchingSchedule::uniform(), pi / 2.0);
    const cplx cal = calibrate_central(p, pi / 2.0);
    for (auto& v : y) v /= cal;
    EXPECT_EQ(error_metrics(y, s.symbols, s.bits, c).ber, 0.0);
}

TEST(AmplitudeRatio, MirrorProperties) {
    const auto grid = default_angle_grid();
    const auto p = mirrored_states(kHalfWave, pi / 4.0, grid);
    const auto rho = amplitude_ratio(p);
    const std::size_t mid = grid.size() / 2;
    ASSERT_NEAR(rad2deg(grid[mid]), 90.0, 1e-12);
    EXPECT_NEAR(rho[mid], 1.0, 1e-9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GE(rho[i], 1.0);
        EXPECT_NEAR(rho[i], rho[grid.size() - 1 - i], 1e-9);
    }
    // strictly increasing away from broadside
    for (std::size_t i = mid; i + 1 < grid.size(); ++i) EXPECT_GT(rho[i + 1], rho[i]) << rad2deg(grid[i + 1]);
    for (std::size_t i = mid; i > 0; --i) EXPECT_GT(rho[i - 1], rho[i]) << rad2deg(grid[i - 1]);
}

TEST(AmplitudeRatio, ZeroMagnitudeIsInfinite) {
    const auto rho = amplitude_ratio(flat_pattern(1.0, 0.0));
    for (double r : rho) EXPECT_TRUE(std::isinf(r));
    EXPECT_TRUE(std::isinf(state_ratio(0.0, 0.0)));
}

TEST(RatioThreshold, Values) {
    EXPECT_EQ(ratio_threshold(256), (Ratio{8, 7}));
    EXPECT_NEAR(ratio_threshold(256).value(), 1.142857142857, 1e-12);
    EXPECT_EQ(ratio_threshold(16), (Ratio{2, 1}));
    EXPECT_EQ(ratio_threshold(64), (Ratio{4, 3}));
    EXPECT_EQ(ratio_threshold(1024), (Ratio{16, 15}));
    EXPECT_TRUE(ratio_threshold(4).infinite());
    EXPECT_TRUE(std::isinf(ratio_threshold(4).value()));
}

TEST(RatioThreshold, SoundAgainstBruteForceSimulation) {
    for (unsigned m : {16u, 64u, 256u}) {
        const QamConstellation c(m);
        const double rho_star = ratio_threshold(m).value();
        for (double f : {1.0 + 1e-6, 1.01, 1.2}) EXPECT_GE(oracle::boundary_errors(rho_star * f, c.points()), 1u) << m;
        for (double r : {1.0, 1.0 + 0.5 * (rho_star - 1.0), rho_star * (1.0 - 1e-6)})
            EXPECT_EQ(oracle::boundary_errors(r, c.points()), 0u) << m << " rho " << r;
    }
    const QamConstellation qpsk(4);
    for (double r : {1.0, 3.0, 100.0}) EXPECT_EQ(oracle::boundary_errors(r, qpsk.points()), 0u);
}

TEST(Sweep, DefaultsMatchMeasurementSetup) {
    const SweepConfig cfg;
    const auto a = cfg.angles();
    ASSERT_EQ(a.size(), 39u);
    EXPECT_NEAR(rad2deg(a.front()), 52.0, 1e-12);
    EXPECT_NEAR(rad2deg(a.back()), 128.0, 1e-12);
    EXPECT_EQ(cfg.order, 256u);
    EXPECT_EQ(cfg.n_bits, 72000u);
}

TEST(Sweep, SecurityProfile) {
    const SweepConfig cfg;
    const auto report = angle_sweep(cfg);
    ASSERT_EQ(report.rows.size(), 39u);
    const double rho_star = ratio_threshold(256).value();
    for (const auto& row : report.rows) {
        if (row.angle_deg == 90.0) {
            EXPECT_EQ(row.metrics.ber, 0.0);
            EXPECT_NEAR(row.ratio, 1.0, 1e-9);
        }
        if (row.ratio > rho_star) {
            EXPECT_GT(row.metrics.ber, 0.0) << row.angle_deg;
        }
        EXPECT_LT(row.metrics.phase_error_mean, 1e-9) << row.angle_deg;
    }
}

TEST(Sweep, ZeroImbalanceIsTransparent) {
    SweepConfig cfg;
    cfg.imbalance = 0.0;
    for (const auto& row : angle_sweep(cfg).rows) {
        EXPECT_EQ(row.metrics.ber, 0.0) << row.angle_deg;
        EXPECT_EQ(row.ratio, 1.0);
    }
}

TEST(Sweep, CentralOnlyReceiverSeesPatternRolloff) {
    SweepConfig cfg;
    cfg.imbalance = 0.0;
    cfg.receiver_gain_control = false;
    const auto rows = angle_sweep(cfg).rows;
    EXPECT_GT(rows.front().metrics.ber, 0.0);
    EXPECT_GT(rows.back().metrics.ber, 0.0);
    for (const auto& row : rows)
        if (row.angle_deg > 84.0 && row.angle_deg < 96.0) { EXPECT_EQ(row.metrics.ber, 0.0) << row.angle_deg; }
}

TEST(Sweep, NoiseFreeErrorsTrackRatioThreshold) {
    SweepConfig cfg;
    const double t = ratio_threshold(cfg.order).value();
    for (const auto& row : angle_sweep(cfg).rows) {
        if (row.ratio > t) { EXPECT_GT(row.metrics.ber, 0.0) << row.angle_deg; }
        else { EXPECT_EQ(row.metrics.ber, 0.0) << row.angle_deg; }
    }
}

TEST(Sweep, DeterministicAcrossThreads) {
    SweepConfig cfg;
    cfg.snr_db = 25.0;
    cfg.n_bits = 16000;
    const auto serial = angle_sweep(cfg);
    cfg.threads = 4;
    const auto parallel = angle_sweep(cfg);
    EXPECT_TRUE(same_report(serial, parallel));
    EXPECT_TRUE(same_report(serial, angle_sweep(cfg)));
}

TEST(Sweep, RowSeedsDiffer) {
    EXPECT_EQ(row_seed(0x7FF, 0), 0x7FFu);
    EXPECT_EQ(row_seed(0x7FF, 1), 0x7FEu);
    EXPECT_EQ(prbs_register_from(0x800), 0x7FFu);
    EXPECT_EQ(prbs_register_from(0x123), 0x123u);
}

TEST(Sweep, ErrorsCarryAngle) {
    SweepConfig cfg;
    cfg.angle_start_deg = 0.0;
    cfg.angle_stop_deg = 10.0;
    try {
        angle_sweep(cfg);
        FAIL() << "expected a domain error";
    } catch (const error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
        EXPECT_NE(std::string(e.what()).find("angle 0.0"), std::string::npos) << e.what();
    }
}

TEST(Sweep, ConfigValidation) {
    SweepConfig cfg;
    cfg.n_bits = 71999;
    EXPECT_THROW(angle_sweep(cfg), validation_error);
    cfg = {};
    cfg.angle_stop_deg = cfg.angle_start_deg;
    EXPECT_THROW(angle_sweep(cfg), validation_error);
    cfg = {};
    cfg.angle_step_deg = 0.0;
    EXPECT_THROW(angle_sweep(cfg), validation_error);
    cfg = {};
    cfg.order = 32;
    EXPECT_THROW(angle_sweep(cfg), validation_error);
}

TEST(Sweep, MirrorSymmetricWithBalancedPayload) {
    // Every constellation point sent once in each state, so both states carry
    // the same payload and mirrored angles must score identically.
    const QamConstellation c(256);
    SymbolStream s;
    s.constellation_order = 256;
    for (unsigned label = 0; label < c.order(); ++label)
        for (int rep = 0; rep < 2; ++rep) {
            s.symbols.push_back(c.point(label));
            for (unsigned b = 0; b < 8; ++b) s.bits.push_back(static_cast<std::uint8_t>((label >> (7 - b)) & 1u));
        }
    const auto p = mirrored_states(kHalfWave, pi / 4.0, default_angle_grid());
    const cplx cal = calibrate_central(p, pi / 2.0);
    for (double deg = 52.0; deg < 90.0; deg += 2.0) {
        auto ber_at = [&](double a) {
            auto y = transmit_at_angle(s, p, SwitchingSchedule::uniform(), deg2rad(a));
            for (auto& v : y) v /= cal;
            return error_metrics(y, s.symbols, s.bits, c).ber;
        };
        EXPECT_EQ(ber_at(deg), ber_at(180.0 - deg)) << deg;
    }
}

TEST(Beam, SyntheticRatioEdges) {
    const auto r = synthetic_report(sweep_angles(52, 128, 2), [](double a) { return 1.0 + std::abs(a - 90.0) / 35.0; });
    const auto beam = information_beam(r, BeamCriterion::ratio_below(8.0 / 7.0));
    EXPECT_FALSE(beam.empty);
    EXPECT_NEAR(beam.lower_edge_deg, 85.0, 1e-12);
    EXPECT_NEAR(beam.upper_edge_deg, 95.0, 1e-12);
    EXPECT_NEAR(beam.width_deg, 10.0, 1e-12);
    EXPECT_TRUE(beam.contiguous);
}

TEST(Beam, AllPass) {
    const auto r = synthetic_report(sweep_angles(52, 128, 2), [](double) { return 1.0; });
    const auto beam = information_beam(r, BeamCriterion::ber_below(1e-3));
    EXPECT_EQ(beam.width_deg, 128.0 - 52.0);
    EXPECT_TRUE(beam.contiguous);
    EXPECT_EQ(beam.passing_angles_deg.size(), 39u);
}

TEST(Beam, AlternatingIsNotContiguous) {
    auto r = synthetic_report(sweep_angles(80, 100, 2), [](double a) {
        return static_cast<int>(a) % 4 == 2 ? 1.0 : 2.0; // 90 passes, 88 and 92 fail
    });
    const auto beam = information_beam(r, BeamCriterion::ratio_below(1.5));
    EXPECT_FALSE(beam.empty);
    EXPECT_FALSE(beam.contiguous);
    EXPECT_NEAR(beam.width_deg, 2.0, 1e-12);
    EXPECT_GT(beam.passing_angles_deg.size(), 1u);
}

TEST(Beam, NoPassesIsEmpty) {
    const auto r = synthetic_report(sweep_angles(52, 128, 2), [](double) { return infinite_ratio; });
    const auto beam = information_beam(r, BeamCriterion::ratio_below(1e9));
    EXPECT_TRUE(beam.empty);
    EXPECT_TRUE(beam.passing_angles_deg.empty());
    EXPECT_THROW(information_beam(LinkReport{}, BeamCriterion::ber_below()), validation_error);
}

TEST(Beam, CentreFailingIsEmpty) {
    const auto r = synthetic_report(sweep_angles(52, 128, 2), [](double a) { return a == 90.0 ? 2.0 : 1.0; });
    const auto beam = information_beam(r, BeamCriterion::ratio_below(1.5));
    EXPECT_TRUE(beam.empty);
    EXPECT_FALSE(beam.contiguous);
    EXPECT_EQ(beam.passing_angles_deg.size(), 38u);
}

TEST(Beam, ShrinksWithImbalance) {
    const double rho_star = 8.0 / 7.0;
    double previous = INFINITY;
    for (double deg : {10.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0}) {
        SweepConfig cfg;
        cfg.imbalance = deg2rad(deg);
        cfg.n_bits = 800;
        const auto beam = information_beam(angle_sweep(cfg), BeamCriterion::ratio_below(rho_star));
        EXPECT_LE(beam.width_deg, previous) << deg;
        previous = beam.width_deg;
    }
    EXPECT_LT(previous, 76.0);
}

TEST(Beam, BerBeamFromSweepIsContiguous) {
    const auto beam = information_beam(angle_sweep(SweepConfig{}), BeamCriterion::ber_below(1e-3));
    EXPECT_FALSE(beam.empty);
    EXPECT_TRUE(beam.contiguous);
    EXPECT_LT(beam.lower_edge_deg, 90.0);
    EXPECT_GT(beam.upper_edge_deg, 90.0);
}
