#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "modpulse/calibration.hpp"
#include "modpulse/device.hpp"

using namespace modpulse;

namespace {

constexpr double kPi = std::numbers::pi;

// One exact (shot-free) calibration of the anchored noiseless device,
// shared across test cases.
const CalibrationResult& anchor_calibration() {
    static const CalibrationResult result = [] {
        RabiScanConfig scan = default_rabi_scan();
        scan.shots_per_point = 0;
        return calibrate(noiseless(jakarta_average()), scan);
    }();
    return result;
}

std::vector<RabiPoint> synthetic_series(double amplitude_param, double rate_hz, double phase,
                                        unsigned shot_seed, std::int64_t shots) {
    const DeviceModel device = jakarta_average();
    std::vector<RabiPoint> series;
    std::mt19937_64 rng(shot_seed);
    for (std::int64_t d = 80; d <= 2000; d += 16) {
        const double x = static_cast<double>(d) * device.sample_time.dt_ns * 1e-9;
        const double c = std::cos(2.0 * kPi * rate_hz * x + phase);
        double y = amplitude_param * c * c;
        if (shots > 0) {
            std::binomial_distribution<std::int64_t> draw(shots, std::clamp(y, 0.0, 1.0));
            y = static_cast<double>(draw(rng)) / static_cast<double>(shots);
        }
        series.push_back({x, y});
    }
    return series;
}

}  // namespace

TEST_CASE("default scan config") {
    const RabiScanConfig config = default_rabi_scan();
    REQUIRE(config.amplitudes.size() == 10);
    CHECK(config.amplitudes.front() == 0.005);
    CHECK(config.amplitudes.back() == doctest::Approx(0.3).epsilon(1e-15));
    REQUIRE(config.duration_sweep_dt.size() == 121);
    CHECK(config.duration_sweep_dt.front() == 80);
    CHECK(config.duration_sweep_dt.back() == 2000);
    CHECK(config.shots_per_point == 1024);
}

TEST_CASE("scan rejects constraint violations") {
    RabiScanConfig config = default_rabi_scan();
    config.duration_sweep_dt.push_back(72);
    CHECK_THROWS_AS(run_rabi_scan(jakarta_average(), config), std::invalid_argument);

    config = default_rabi_scan();
    config.amplitudes.push_back(1.5);
    CHECK_THROWS_AS(run_rabi_scan(jakarta_average(), config), std::invalid_argument);
}

TEST_CASE("noise-free exact scan follows sin^2(omega t / 2)") {
    const DeviceModel device = noiseless(jakarta_average());
    RabiScanConfig config;
    config.amplitudes = {0.068};
    for (std::int64_t d = 80; d <= 800; d += 16) config.duration_sweep_dt.push_back(d);
    config.shots_per_point = 0;

    const auto scan = run_rabi_scan(device, config);
    REQUIRE(scan.size() == 1);
    const double omega = rabi_angular_rate(device, 0.068);
    for (const auto& point : scan[0].points) {
        const double s = std::sin(omega * point.time_s / 2.0);
        CHECK(point.excited_fraction == doctest::Approx(s * s).epsilon(1e-9));
    }
}

TEST_CASE("zero-amplitude scan stays at the readout floor") {
    DeviceModel device = jakarta_average();
    RabiScanConfig config;
    config.amplitudes = {0.0};
    for (std::int64_t d = 80; d <= 400; d += 16) config.duration_sweep_dt.push_back(d);
    config.shots_per_point = 4096;

    const auto scan = run_rabi_scan(device, config);
    double mean = 0.0;
    for (const auto& point : scan[0].points) mean += point.excited_fraction;
    mean /= static_cast<double>(scan[0].points.size());
    const double n = 4096.0 * static_cast<double>(scan[0].points.size());
    CHECK(std::abs(mean - device.readout_error) < 4.0 * std::sqrt(0.0166 * 0.9834 / n));
}

TEST_CASE("fit recovers a noiseless synthetic rate") {
    const auto series = synthetic_series(0.93, 5.0e6, 0.4, 0, 0);
    const RabiFit fit = fit_rabi(series);
    CHECK(fit.converged);
    CHECK(std::abs(fit.rate_hz - 5.0e6) / 5.0e6 < 1e-4);
    CHECK(fit.amplitude_param == doctest::Approx(0.93).epsilon(1e-3));
    CHECK(fit.residual < 1e-6);
}

TEST_CASE("fit tolerates binomial shot noise") {
    const auto series = synthetic_series(1.0, 5.0e6, 0.1, 7, 1024);
    const RabiFit fit = fit_rabi(series);
    CHECK(fit.converged);
    CHECK(std::abs(fit.rate_hz - 5.0e6) / 5.0e6 < 0.01);
}

TEST_CASE("degenerate fits carry a failure marker") {
    std::vector<RabiPoint> constant;
    for (int i = 0; i < 50; ++i) {
        constant.push_back({static_cast<double>(i) * 1e-9, 0.25});
    }
    const RabiFit fit = fit_rabi(constant);
    CHECK_FALSE(fit.converged);

    CHECK_THROWS_AS(fit_rabi(std::vector<RabiPoint>(4, RabiPoint{0.0, 0.0})),
                    std::invalid_argument);
}

TEST_CASE("fits are bit-identical across runs") {
    const auto series = synthetic_series(0.9, 8.0e6, -0.2, 3, 1024);
    const RabiFit a = fit_rabi(series);
    const RabiFit b = fit_rabi(series);
    CHECK(a.rate_hz == b.rate_hz);
    CHECK(a.amplitude_param == b.amplitude_param);
    CHECK(a.phase_rad == b.phase_rad);
    CHECK(a.residual == b.residual);
}

TEST_CASE("calibrated table matches the linear device") {
    for (double slope_mhz : {60.0, 150.0, 290.0}) {
        DeviceModel device = noiseless(jakarta_average());
        device.transfer.slope_hz_per_amp = slope_mhz * 1e6;
        RabiScanConfig scan = default_rabi_scan();
        scan.shots_per_point = 0;
        const CalibrationResult result = calibrate(device, scan);
        for (double amp : {0.05, 0.1, 0.2, 0.29}) {
            const double expected = 2.0 * kPi * slope_mhz * 1e6 * amp;
            CHECK(std::abs(result.table.omega_for_amp(amp) - expected) / expected < 0.01);
        }
    }
}

TEST_CASE("noisy sampled calibration stays within 3%") {
    DeviceModel device = jakarta_average();
    device.seed = 511;
    const CalibrationResult result = calibrate(device, default_rabi_scan());
    for (double amp : {0.1, 0.2, 0.29}) {
        const double expected = 2.0 * kPi * device.transfer.slope_hz_per_amp * amp;
        CHECK(std::abs(result.table.omega_for_amp(amp) - expected) / expected < 0.03);
    }
}

TEST_CASE("table construction") {
    SUBCASE("fewer than two successful fits rejected") {
        RabiFit good;
        good.rate_hz = 1e6;
        good.converged = true;
        RabiFit bad = good;
        bad.converged = false;
        CHECK_THROWS_AS(build_table({{0.1, good}, {0.2, bad}}), std::invalid_argument);
    }
    SUBCASE("non-monotone rates are named") {
        RabiFit lo, hi;
        lo.rate_hz = 2e6;
        lo.converged = true;
        hi.rate_hz = 1e6;
        hi.converged = true;
        CHECK_THROWS_WITH_AS(build_table({{0.1, lo}, {0.2, hi}}),
                             doctest::Contains("not strictly increasing"), std::invalid_argument);
    }
    SUBCASE("odd symmetry is exact") {
        const auto& table = anchor_calibration().table;
        CHECK(table.omega_for_amp(-0.068) == -table.omega_for_amp(0.068));
        CHECK(table.amp_for_angular_rate(-1e7) == -table.amp_for_angular_rate(1e7));
        CHECK(table.amp_for_angular_rate(0.0) == 0.0);
    }
}

TEST_CASE("inverse lookup hits the paper anchor") {
    const auto& table = anchor_calibration().table;
    const double target = 2.0 * kPi * 10.23e6;
    CHECK(std::abs(table.amp_for_angular_rate(target) - 0.068) < 0.005);

    CHECK_THROWS_WITH_AS(table.amp_for_angular_rate(10.0 * table.max_angular_rate()),
                         doctest::Contains("range"), std::out_of_range);
}

TEST_CASE("square pulse design") {
    const auto& table = anchor_calibration().table;
    const double dt_ns = jakarta_average().sample_time.dt_ns;

    SUBCASE("4pi/11 over 80dt needs the anchor amplitude") {
        const SquarePulse pulse =
            design_rotation_square(table, 4.0 * kPi / 11.0, 80, dt_ns);
        CHECK(pulse.duration_dt == 80);
        CHECK(std::abs(pulse.amplitude.real() - 0.068) < 0.005);
        CHECK(pulse.amplitude.imag() == 0.0);
    }
    SUBCASE("zero rotation is zero amplitude") {
        const SquarePulse pulse = design_rotation_square(table, 0.0, 80, dt_ns);
        CHECK(pulse.amplitude == std::complex<double>(0.0, 0.0));
    }
    SUBCASE("2pi over 80dt exceeds the calibrated range") {
        CHECK_THROWS_AS(design_rotation_square(table, 2.0 * kPi, 80, dt_ns), std::out_of_range);
    }
}

TEST_CASE("sqrt(X) DRAG design") {
    const auto& table = anchor_calibration().table;
    const DeviceModel device = noiseless(jakarta_average());
    const double dt_ns = device.sample_time.dt_ns;

    SUBCASE("160dt pulse rotates to the equator") {
        const DragPulse pulse = design_sqrt_x_drag(table, 160, 40.0, 0.0, dt_ns);
        CHECK(std::abs(pulse.peak.real() - 0.081) < 0.01);

        Schedule s;
        s.sample_time = device.sample_time;
        s.append(pulse);
        const DensityMatrix rho = evolve(device, s, DensityMatrix::ground());
        CHECK(std::abs(excited_population(rho) - 0.5) < 1e-6);
    }
    SUBCASE("two pulses give a full flip") {
        const DragPulse pulse = design_sqrt_x_drag(table, 160, 40.0, 0.0, dt_ns);
        Schedule s;
        s.sample_time = device.sample_time;
        s.append(pulse);
        s.append(pulse);
        const DensityMatrix rho = evolve(device, s, DensityMatrix::ground());
        CHECK(std::abs(excited_population(rho) - 1.0) < 1e-6);
    }
    SUBCASE("short 80dt variant solves the same area") {
        const DragPulse pulse = design_sqrt_x_drag(table, 80, 20.0, 0.0, dt_ns);
        Schedule s;
        s.sample_time = device.sample_time;
        s.append(pulse);
        const DensityMatrix rho = evolve(device, s, DensityMatrix::ground());
        CHECK(std::abs(excited_population(rho) - 0.5) < 1e-6);
    }
    SUBCASE("unreachable area reports an error") {
        const CalibrationTable weak({{0.15, 1.0e6}, {0.3, 2.0e6}});
        CHECK_THROWS_WITH_AS(design_sqrt_x_drag(weak, 160, 40.0, 0.0, dt_ns),
                             doctest::Contains("not reachable"), std::invalid_argument);
    }
}

TEST_CASE("rotation round trip through design and evolution") {
    const auto& table = anchor_calibration().table;
    const DeviceModel device = noiseless(jakarta_average());
    for (double theta : {kPi / 4.0, 4.0 * kPi / 11.0, kPi / 2.0, kPi}) {
        const SquarePulse pulse =
            design_rotation_square(table, theta, 160, device.sample_time.dt_ns);
        Schedule s;
        s.sample_time = device.sample_time;
        s.append(pulse);
        const DensityMatrix rho = evolve(device, s, DensityMatrix::ground());
        const double expected = std::sin(theta / 2.0) * std::sin(theta / 2.0);
        CHECK(std::abs(excited_population(rho) - expected) < 0.005 * std::max(expected, 0.1));
    }
}

TEST_CASE("calibration JSON round trip") {
    const CalibrationResult& result = anchor_calibration();
    const CalibrationResult back = calibration_from_json(calibration_to_json(result));
    REQUIRE(back.table.points().size() == result.table.points().size());
    for (std::size_t i = 0; i < back.table.points().size(); ++i) {
        CHECK(back.table.points()[i].amplitude == result.table.points()[i].amplitude);
        CHECK(back.table.points()[i].omega_rad_per_s == result.table.points()[i].omega_rad_per_s);
    }
    REQUIRE(back.fits.size() == result.fits.size());
    for (std::size_t i = 0; i < back.fits.size(); ++i) {
        CHECK(back.fits[i].first == result.fits[i].first);
        CHECK(back.fits[i].second.rate_hz == result.fits[i].second.rate_hz);
        CHECK(back.fits[i].second.converged == result.fits[i].second.converged);
    }
}
