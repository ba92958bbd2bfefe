#include "modpulse/compiler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace modpulse {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-12;

}  // namespace

void GateCalibrationSet::set_rx(double theta_rad, SquarePulse pulse) {
    for (auto& [angle, existing] : custom_rx) {
        if (std::abs(angle - theta_rad) <= kAngleTol * std::max(1.0, std::abs(theta_rad))) {
            existing = pulse;
            return;
        }
    }
    custom_rx.emplace_back(theta_rad, pulse);
}

const SquarePulse* GateCalibrationSet::find_rx(double theta_rad) const {
    for (const auto& [angle, pulse] : custom_rx) {
        if (std::abs(angle - theta_rad) <= kAngleTol * std::max(1.0, std::abs(theta_rad))) {
            return &pulse;
        }
    }
    return nullptr;
}

GateCalibrationSet default_calibration_set(const CalibrationTable& table,
                                           const DeviceModel& device, const ModpSpec& spec) {
    GateCalibrationSet calset;
    calset.sqrt_x = design_sqrt_x_drag(table, kSqrtXDurationDt,
                                       static_cast<double>(kSqrtXDurationDt) / 4.0, 0.0,
                                       device.sample_time.dt_ns);
    const double theta = spec.k * 4.0 * kPi / spec.p;
    calset.set_rx(theta, design_rotation_square(table, theta, kSquareRxDurationDt,
                                                device.sample_time.dt_ns));
    return calset;
}

std::vector<GateOp> word_to_gates(const ModpSpec& spec, std::int64_t word_len,
                                  const CompilationOptions& options) {
    if (word_len < 0) throw std::invalid_argument("word length must be non-negative");
    if (options.opt_level != 0 && options.opt_level != 1) {
        throw std::invalid_argument("optimization level " + std::to_string(options.opt_level) +
                                    " unsupported; only levels 0 and 1 apply to single-qubit "
                                    "circuits");
    }
    const double theta = spec.k * 4.0 * kPi / spec.p;
    std::vector<GateOp> gates;
    if (options.opt_level == 0) {
        gates.assign(static_cast<std::size_t>(word_len), RxGate{theta});
    } else {
        const std::int64_t m = word_len % spec.p;
        if (m != 0) gates.push_back(RxGate{static_cast<double>(m) * theta});
    }
    return gates;
}

std::vector<GateOp> decompose_rx(double theta_rad) {
    return {RzGate{-kPi / 2.0}, SqrtXGate{}, RzGate{kPi - theta_rad}, SqrtXGate{},
            RzGate{-kPi / 2.0}};
}

Eigen::Matrix2cd rx_matrix(double theta_rad) {
    const double c = std::cos(theta_rad / 2.0);
    const std::complex<double> ms(0.0, -std::sin(theta_rad / 2.0));
    Eigen::Matrix2cd m;
    m << c, ms, ms, c;
    return m;
}

Eigen::Matrix2cd rz_matrix(double theta_rad) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = std::polar(1.0, -theta_rad / 2.0);
    m(1, 1) = std::polar(1.0, theta_rad / 2.0);
    return m;
}

Eigen::Matrix2cd sqrt_x_matrix() {
    Eigen::Matrix2cd m;
    m << std::complex<double>(0.5, 0.5), std::complex<double>(0.5, -0.5),
        std::complex<double>(0.5, -0.5), std::complex<double>(0.5, 0.5);
    return m;
}

Eigen::Matrix2cd unitary_of(std::span<const GateOp> gates) {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    for (const auto& gate : gates) {
        const Eigen::Matrix2cd g = std::visit(
            [](const auto& v) -> Eigen::Matrix2cd {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, RxGate>) {
                    return rx_matrix(v.theta_rad);
                } else if constexpr (std::is_same_v<T, RzGate>) {
                    return rz_matrix(v.theta_rad);
                } else {
                    return sqrt_x_matrix();
                }
            },
            gate);
        u = g * u;
    }
    return u;
}

double phase_aligned_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    // Align a's phase to b at b's largest entry.
    Eigen::Index row = 0, col = 0;
    b.cwiseAbs().maxCoeff(&row, &col);
    const std::complex<double> ratio = b(row, col) / a(row, col);
    const std::complex<double> phase = ratio / std::abs(ratio);
    return ((a * phase) - b).cwiseAbs().maxCoeff();
}

namespace {

void lower_gate(const GateOp& gate, const GateCalibrationSet& calset,
                const CompilationOptions& options, Schedule& schedule, std::int64_t& cursor) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RzGate>) {
                // Virtual Z: Rz(a) becomes a -a frame advance on later pulses.
                schedule.append_at(cursor, PhaseShift{-v.theta_rad});
            } else if constexpr (std::is_same_v<T, SqrtXGate>) {
                schedule.append_at(cursor, calset.sqrt_x);
                cursor += calset.sqrt_x.duration_dt;
            } else {
                if (options.path == PulsePath::kDefaultDrag) {
                    for (const auto& g : decompose_rx(v.theta_rad)) {
                        lower_gate(g, calset, options, schedule, cursor);
                    }
                } else {
                    const SquarePulse* pulse = calset.find_rx(v.theta_rad);
                    if (pulse == nullptr) {
                        throw std::invalid_argument(
                            "no calibrated square pulse for theta=" + std::to_string(v.theta_rad) +
                            " rad; calibrate it first");
                    }
                    schedule.append_at(cursor, *pulse);
                    cursor += pulse->duration_dt;
                }
            }
        },
        gate);
}

}  // namespace

Schedule lower_to_schedule(std::span<const GateOp> gates, const GateCalibrationSet& calset,
                           const DeviceModel& device, const CompilationOptions& options) {
    Schedule probe;
    probe.sample_time = device.sample_time;
    probe.append(calset.sqrt_x);
    for (const auto& [angle, pulse] : calset.custom_rx) probe.append(pulse);
    if (const auto violations = validate(probe, device.constraints); !violations.empty()) {
        throw std::invalid_argument("calibration set violates device constraints: " +
                                    violations.front().message);
    }

    Schedule schedule;
    schedule.sample_time = device.sample_time;
    std::int64_t cursor = 0;
    for (const auto& gate : gates) {
        lower_gate(gate, calset, options, schedule, cursor);
    }
    return schedule;
}

std::string format_gates(std::span<const GateOp> gates) {
    std::ostringstream out;
    for (const auto& gate : gates) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, RxGate>) {
                    out << "rx " << v.theta_rad << "\n";
                } else if constexpr (std::is_same_v<T, RzGate>) {
                    out << "rz " << v.theta_rad << "\n";
                } else {
                    out << "sx\n";
                }
            },
            gate);
    }
    return out.str();
}

}  // namespace modpulse
