#include "modpulse/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace modpulse {

namespace {

constexpr double kPi = std::numbers::pi;

double model(double a, double rate, double phi, double x) {
    const double c = std::cos(2.0 * kPi * rate * x + phi);
    return a * c * c;
}

double sum_squared_residuals(const std::vector<RabiPoint>& series, double a, double rate,
                             double phi) {
    double ssr = 0.0;
    for (const auto& p : series) {
        const double r = p.excited_fraction - model(a, rate, phi, p.time_s);
        ssr += r * r;
    }
    return ssr;
}

// Dominant nonzero frequency of the mean-subtracted series, located on an
// 8x oversampled DFT grid so low-rate series land inside the least-squares
// convergence basin. Assumes uniform sample spacing.
double dominant_frequency(const std::vector<RabiPoint>& series) {
    const std::size_t n = series.size();
    double mean = 0.0;
    for (const auto& p : series) mean += p.excited_fraction;
    mean /= static_cast<double>(n);

    const double span = series.back().time_s - series.front().time_s;
    if (!(span > 0.0)) return 0.0;
    const double dx = span / static_cast<double>(n - 1);

    constexpr std::size_t kOversample = 8;
    const std::size_t bins = kOversample * n / 2;
    double best_power = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= bins; ++k) {
        const double freq =
            static_cast<double>(k) / (static_cast<double>(kOversample * n) * dx);
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = -2.0 * kPi * freq * (series[j].time_s - series.front().time_s);
            acc += (series[j].excited_fraction - mean) * std::polar(1.0, angle);
        }
        const double power = std::norm(acc);
        if (power > best_power) {
            best_power = power;
            best_k = k;
        }
    }
    if (best_k == 0) return 0.0;
    return static_cast<double>(best_k) / (static_cast<double>(kOversample * n) * dx);
}

}  // namespace

RabiScanConfig default_rabi_scan() {
    RabiScanConfig config;
    const int n_amps = 10;
    const double lo = 0.005, hi = 0.3;
    for (int i = 0; i < n_amps; ++i) {
        config.amplitudes.push_back(lo + (hi - lo) * static_cast<double>(i) / (n_amps - 1));
    }
    for (std::int64_t d = 80; d <= 2000; d += 16) {
        config.duration_sweep_dt.push_back(d);
    }
    return config;
}

std::vector<RabiSeries> run_rabi_scan(const DeviceModel& device, const RabiScanConfig& config) {
    check_device(device);
    for (double amp : config.amplitudes) {
        if (std::abs(amp) > device.constraints.max_amplitude) {
            throw std::invalid_argument("scan amplitude " + std::to_string(amp) +
                                        " exceeds device maximum");
        }
    }
    for (std::int64_t d : config.duration_sweep_dt) {
        if (d < device.constraints.min_pulse_duration_dt ||
            d % device.constraints.granularity_dt != 0) {
            throw std::invalid_argument("scan duration " + std::to_string(d) +
                                        "dt violates device constraints");
        }
    }

    const double dt_s = device.sample_time.dt_ns * 1e-9;
    std::vector<RabiSeries> result;
    result.reserve(config.amplitudes.size());
    std::uint64_t point_index = 0;
    for (double amp : config.amplitudes) {
        RabiSeries series;
        series.amplitude = amp;
        series.points.reserve(config.duration_sweep_dt.size());
        for (std::int64_t d : config.duration_sweep_dt) {
            Schedule schedule;
            schedule.sample_time = device.sample_time;
            schedule.append(SquarePulse{amp, d});
            const DensityMatrix rho = evolve(device, schedule, DensityMatrix::ground());
            double fraction;
            if (config.shots_per_point > 0) {
                fraction = measure(device, rho, config.shots_per_point, device.seed ^ point_index)
                               .ones_fraction();
            } else {
                fraction = excited_population(rho);
            }
            series.points.push_back({static_cast<double>(d) * dt_s, fraction});
            ++point_index;
        }
        result.push_back(std::move(series));
    }
    return result;
}

RabiFit fit_rabi(const std::vector<RabiPoint>& series) {
    if (series.size() < 8) {
        throw std::invalid_argument("Rabi fit needs at least 8 points, got " +
                                    std::to_string(series.size()));
    }

    RabiFit fit;
    const std::size_t n = series.size();
    const double span = series.back().time_s - series.front().time_s;

    double y_min = series.front().excited_fraction, y_max = y_min;
    for (const auto& p : series) {
        y_min = std::min(y_min, p.excited_fraction);
        y_max = std::max(y_max, p.excited_fraction);
    }

    double a = y_max - y_min;
    double rate = dominant_frequency(series) / 2.0;  // cos^2 oscillates at 2*rate
    if (a <= 0.0 || rate <= 0.0) {
        fit.amplitude_param = a;
        fit.rate_hz = rate;
        fit.residual = std::sqrt(sum_squared_residuals(series, a, rate, 0.0) / n);
        return fit;  // degenerate series, flagged unconverged
    }

    const double cos_sq = std::clamp(series.front().excited_fraction / a, 0.0, 1.0);
    double phi = std::acos(std::sqrt(cos_sq));
    if (sum_squared_residuals(series, a, rate, -phi) < sum_squared_residuals(series, a, rate, phi)) {
        phi = -phi;
    }

    double ssr = sum_squared_residuals(series, a, rate, phi);
    double lambda = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (const auto& p : series) {
            const double u = 2.0 * kPi * rate * p.time_s + phi;
            const double c = std::cos(u);
            const double s2u = std::sin(2.0 * u);
            Eigen::Vector3d j;
            j << c * c,                      // d/dA
                -2.0 * kPi * a * p.time_s * s2u,  // d/drate
                -a * s2u;                    // d/dphi
            const double r = p.excited_fraction - a * c * c;
            jtj += j * j.transpose();
            jtr += j * r;
        }

        Eigen::Matrix3d damped = jtj;
        for (int d = 0; d < 3; ++d) damped(d, d) += lambda * jtj(d, d);
        const Eigen::Vector3d delta = damped.ldlt().solve(jtr);

        const double a_new = a + delta(0);
        const double rate_new = rate + delta(1);
        const double phi_new = phi + delta(2);
        const double ssr_new = sum_squared_residuals(series, a_new, rate_new, phi_new);
        if (ssr_new < ssr) {
            const double rel = std::max({std::abs(delta(0)) / std::max(std::abs(a_new), 1e-300),
                                         std::abs(delta(1)) / std::max(std::abs(rate_new), 1e-300),
                                         std::abs(delta(2)) / std::max(std::abs(phi_new), 1e-12)});
            a = a_new;
            rate = rate_new;
            phi = phi_new;
            ssr = ssr_new;
            lambda = std::max(lambda / 2.0, 1e-12);
            if (rel < 1e-9) {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }

    // cos^2(2*pi*(-r)*x + phi) == cos^2(2*pi*r*x - phi)
    if (rate < 0.0) {
        rate = -rate;
        phi = -phi;
    }
    phi = std::remainder(phi, 2.0 * kPi);

    fit.amplitude_param = a;
    fit.rate_hz = rate;
    fit.phase_rad = phi;
    fit.residual = std::sqrt(ssr / n);
    // Identifiability: the population must complete at least one cycle
    // over the sampled span.
    fit.converged = converged && a > 0.0 && rate > 0.0 && 2.0 * rate * span >= 1.0;
    return fit;
}

CalibrationTable::CalibrationTable(std::vector<CalibrationPoint> points)
    : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw std::invalid_argument("calibration table needs at least 2 points");
    }
    std::sort(points_.begin(), points_.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.amplitude < rhs.amplitude; });
    if (points_.front().amplitude <= 0.0) {
        throw std::invalid_argument("calibration points must have positive amplitude");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].omega_rad_per_s <= points_[i - 1].omega_rad_per_s) {
            throw std::invalid_argument(
                "Rabi rates not strictly increasing between amplitudes " +
                std::to_string(points_[i - 1].amplitude) + " and " +
                std::to_string(points_[i].amplitude));
        }
    }
    if (points_.front().omega_rad_per_s <= 0.0) {
        throw std::invalid_argument("calibrated rates must be positive");
    }
}

double CalibrationTable::omega_for_amp(double amplitude) const {
    if (amplitude < 0.0) return -omega_for_amp(-amplitude);
    if (amplitude > points_.back().amplitude * (1.0 + 1e-12)) {
        throw std::out_of_range("amplitude " + std::to_string(amplitude) +
                                " outside calibrated range [-" +
                                std::to_string(points_.back().amplitude) + ", " +
                                std::to_string(points_.back().amplitude) + "]");
    }
    // Below the first fitted point the mirrored pair interpolates through
    // the origin.
    if (amplitude <= points_.front().amplitude) {
        return amplitude * (points_.front().omega_rad_per_s / points_.front().amplitude);
    }
    auto it = std::lower_bound(points_.begin(), points_.end(), amplitude,
                               [](const CalibrationPoint& p, double a) { return p.amplitude < a; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (amplitude - lo.amplitude) / (hi.amplitude - lo.amplitude);
    return lo.omega_rad_per_s + t * (hi.omega_rad_per_s - lo.omega_rad_per_s);
}

double CalibrationTable::amp_for_angular_rate(double omega_rad_per_s) const {
    if (omega_rad_per_s < 0.0) return -amp_for_angular_rate(-omega_rad_per_s);
    if (omega_rad_per_s > points_.back().omega_rad_per_s * (1.0 + 1e-12)) {
        throw std::out_of_range("target rate " + std::to_string(omega_rad_per_s) +
                                " rad/s outside calibrated range [-" +
                                std::to_string(points_.back().omega_rad_per_s) + ", " +
                                std::to_string(points_.back().omega_rad_per_s) + "] rad/s");
    }
    if (omega_rad_per_s <= points_.front().omega_rad_per_s) {
        return omega_rad_per_s * (points_.front().amplitude / points_.front().omega_rad_per_s);
    }
    auto it = std::lower_bound(
        points_.begin(), points_.end(), omega_rad_per_s,
        [](const CalibrationPoint& p, double w) { return p.omega_rad_per_s < w; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (omega_rad_per_s - lo.omega_rad_per_s) / (hi.omega_rad_per_s - lo.omega_rad_per_s);
    return lo.amplitude + t * (hi.amplitude - lo.amplitude);
}

CalibrationTable build_table(const std::vector<std::pair<double, RabiFit>>& fits) {
    std::vector<CalibrationPoint> points;
    for (const auto& [amplitude, fit] : fits) {
        if (!fit.converged) continue;
        points.push_back({amplitude, 4.0 * kPi * fit.rate_hz});
    }
    if (points.size() < 2) {
        throw std::invalid_argument("calibration needs at least 2 successful fits, got " +
                                    std::to_string(points.size()));
    }
    return CalibrationTable(std::move(points));
}

SquarePulse design_rotation_square(const CalibrationTable& table, double theta_rad,
                                   std::int64_t duration_dt, double dt_ns) {
    if (duration_dt < 1) throw std::invalid_argument("pulse duration must be at least 1 dt");
    const double duration_s = static_cast<double>(duration_dt) * dt_ns * 1e-9;
    const double omega = theta_rad / duration_s;
    return SquarePulse{table.amp_for_angular_rate(omega), duration_dt};
}

DragPulse design_sqrt_x_drag(const CalibrationTable& table, std::int64_t duration_dt,
                             double sigma_dt, double beta, double dt_ns) {
    const Waveform envelope = sample_pulse(LiftedGaussianPulse{1.0, duration_dt, sigma_dt});
    const double dt_s = dt_ns * 1e-9;
    const auto area = [&](double peak) {
        double total = 0.0;
        for (const auto& s : envelope.samples) total += table.omega_for_amp(peak * s.real());
        return total * dt_s;
    };

    const double target = kPi / 2.0;
    double hi = table.max_amplitude();
    if (area(hi) < target) {
        throw std::invalid_argument(
            "pi/2 rotation not reachable within the calibrated amplitude range for duration " +
            std::to_string(duration_dt) + "dt");
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-16 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (area(mid) < target ? lo : hi) = mid;
    }
    return DragPulse{0.5 * (lo + hi), duration_dt, sigma_dt, beta};
}

CalibrationResult calibrate(const DeviceModel& device, const RabiScanConfig& config) {
    const auto scan = run_rabi_scan(device, config);
    std::vector<std::pair<double, RabiFit>> fits;
    fits.reserve(scan.size());
    for (const auto& series : scan) {
        fits.emplace_back(series.amplitude, fit_rabi(series.points));
    }
    return CalibrationResult{build_table(fits), std::move(fits)};
}

nlohmann::json calibration_to_json(const CalibrationResult& result) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : result.table.points()) {
        points.push_back({{"amplitude", p.amplitude}, {"omega_rad_per_s", p.omega_rad_per_s}});
    }
    nlohmann::json meta = nlohmann::json::array();
    for (const auto& [amplitude, fit] : result.fits) {
        meta.push_back({{"amplitude", amplitude},
                        {"rate_hz", fit.rate_hz},
                        {"phase", fit.phase_rad},
                        {"residual", fit.residual},
                        {"converged", fit.converged}});
    }
    return nlohmann::json{{"points", std::move(points)}, {"fit_meta", std::move(meta)}};
}

CalibrationResult calibration_from_json(const nlohmann::json& doc) {
    std::vector<CalibrationPoint> points;
    for (const auto& p : doc.at("points")) {
        points.push_back(
            {p.at("amplitude").get<double>(), p.at("omega_rad_per_s").get<double>()});
    }
    std::vector<std::pair<double, RabiFit>> fits;
    if (doc.contains("fit_meta")) {
        for (const auto& m : doc.at("fit_meta")) {
            RabiFit fit;
            fit.rate_hz = m.at("rate_hz").get<double>();
            fit.phase_rad = m.at("phase").get<double>();
            fit.residual = m.at("residual").get<double>();
            fit.converged = m.at("converged").get<bool>();
            fits.emplace_back(m.at("amplitude").get<double>(), fit);
        }
    }
    return CalibrationResult{CalibrationTable(std::move(points)), std::move(fits)};
}

}  // namespace modpulse
