// Rabi-scan calibration: sweep square-pulse durations per amplitude,
// fit the cos^2 oscillation model, build an amplitude <-> Rabi-rate table
// and design pulses for target rotations from it.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modpulse/device.hpp"
#include "modpulse/schedule.hpp"

namespace modpulse {

struct RabiScanConfig {
    std::vector<double> amplitudes;
    std::vector<std::int64_t> duration_sweep_dt;
    // 0 records exact excited populations instead of sampled fractions.
    std::int64_t shots_per_point = 1024;
};

// 10 amplitudes evenly spaced in [0.005, 0.3]; durations 80..2000 dt in
// steps of 16; 1024 shots per point.
RabiScanConfig default_rabi_scan();

struct RabiPoint {
    double time_s;
    double excited_fraction;
};

struct RabiSeries {
    double amplitude;
    std::vector<RabiPoint> points;
};

// One square pulse per (amplitude, duration), evolved from |0>. Seeds are
// derived per scan point as device.seed XOR point index. Throws on a scan
// point that violates the device constraints.
std::vector<RabiSeries> run_rabi_scan(const DeviceModel& device, const RabiScanConfig& config);

// Least-squares fit of y = A * cos^2(2*pi*rate*x + phi). The physical
// angular rate is Omega = 4*pi*rate (the population oscillates at twice
// the Bloch rotation rate).
struct RabiFit {
    double amplitude_param = 0.0;
    double rate_hz = 0.0;
    double phase_rad = 0.0;
    double residual = 0.0;  // RMS misfit
    bool converged = false;
};

// Spectral initialization (dominant DFT bin of the mean-subtracted series,
// halved for the cos^2 frequency doubling) followed by damped iterative
// least squares. Requires at least 8 points; a fit that fails to converge
// within 200 iterations, or whose rate is unidentifiable over the sampled
// span, is returned with converged = false.
RabiFit fit_rabi(const std::vector<RabiPoint>& series);

struct CalibrationPoint {
    double amplitude;
    double omega_rad_per_s;
};

// Fitted (amplitude, angular rate) pairs, strictly increasing, extended to
// negative amplitudes by odd symmetry at lookup time.
class CalibrationTable {
public:
    explicit CalibrationTable(std::vector<CalibrationPoint> points);

    double omega_for_amp(double amplitude) const;
    // Inverse lookup by monotone piecewise-linear interpolation. Throws on
    // targets outside the covered range; no extrapolation.
    double amp_for_angular_rate(double omega_rad_per_s) const;

    double max_amplitude() const { return points_.back().amplitude; }
    double max_angular_rate() const { return points_.back().omega_rad_per_s; }
    const std::vector<CalibrationPoint>& points() const { return points_; }

private:
    std::vector<CalibrationPoint> points_;
};

// Keeps Omega = 4*pi*rate per converged fit; requires at least two of
// them and strictly increasing rates.
CalibrationTable build_table(const std::vector<std::pair<double, RabiFit>>& fits);

// Square pulse rotating by theta in duration_dt samples.
SquarePulse design_rotation_square(const CalibrationTable& table, double theta_rad,
                                   std::int64_t duration_dt, double dt_ns);

// Lifted-Gaussian DRAG pulse whose integrated angle over the sampled
// envelope is pi/2, solved by bisection on the peak through the table.
DragPulse design_sqrt_x_drag(const CalibrationTable& table, std::int64_t duration_dt,
                             double sigma_dt, double beta, double dt_ns);

struct CalibrationResult {
    CalibrationTable table;
    std::vector<std::pair<double, RabiFit>> fits;
};

// Full scan + per-amplitude fits + table.
CalibrationResult calibrate(const DeviceModel& device, const RabiScanConfig& config);

nlohmann::json calibration_to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(const nlohmann::json& doc);

}  // namespace modpulse
