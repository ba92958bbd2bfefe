// Word -> gate list -> pulse schedule, along either the five-gate DRAG
// decomposition with virtual-Z phases or a directly calibrated square
// pulse per symbol.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "modpulse/calibration.hpp"
#include "modpulse/device.hpp"
#include "modpulse/qfa.hpp"
#include "modpulse/schedule.hpp"

namespace modpulse {

struct RxGate {
    double theta_rad;
};
struct RzGate {
    double theta_rad;
};
struct SqrtXGate {};

using GateOp = std::variant<RxGate, RzGate, SqrtXGate>;

enum class PulsePath { kDefaultDrag, kCustomSquare };

struct CompilationOptions {
    int opt_level = 0;  // 0 or 1
    PulsePath path = PulsePath::kDefaultDrag;
};

// Calibrated pulses the lowering draws from: one sqrt(X) DRAG pulse and
// square pulses keyed by rotation angle.
struct GateCalibrationSet {
    DragPulse sqrt_x;
    std::vector<std::pair<double, SquarePulse>> custom_rx;

    void set_rx(double theta_rad, SquarePulse pulse);
    const SquarePulse* find_rx(double theta_rad) const;  // 1e-12 angle tolerance
};

// sqrt(X) as a 160dt DRAG pulse (sigma = duration/4, beta 0) and the
// MOD^p symbol rotation k*4*pi/p as an 80dt square pulse.
GateCalibrationSet default_calibration_set(const CalibrationTable& table,
                                           const DeviceModel& device,
                                           const ModpSpec& spec = ModpSpec{});

inline constexpr std::int64_t kSqrtXDurationDt = 160;
inline constexpr std::int64_t kSquareRxDurationDt = 80;

// Level 0: word_len copies of Rx(k*4*pi/p). Level 1: one
// Rx((word_len mod p)*k*4*pi/p), empty when the length is divisible by p.
// Levels 2 and 3 are rejected as unsupported.
std::vector<GateOp> word_to_gates(const ModpSpec& spec, std::int64_t word_len,
                                  const CompilationOptions& options);

// [Rz(-pi/2), SqrtX, Rz(pi - theta), SqrtX, Rz(-pi/2)]; the product equals
// Rx(theta) up to a global phase.
std::vector<GateOp> decompose_rx(double theta_rad);

// Right-to-left product of the ideal gate unitaries.
Eigen::Matrix2cd unitary_of(std::span<const GateOp> gates);

Eigen::Matrix2cd rx_matrix(double theta_rad);
Eigen::Matrix2cd rz_matrix(double theta_rad);
Eigen::Matrix2cd sqrt_x_matrix();

// Largest entrywise deviation between a and b after aligning global phase.
double phase_aligned_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);

// DefaultDrag: Rx decomposes to two calibrated DRAG pulses with virtual-Z
// shifts (Rz(a) lowers to PhaseShift(-a)), 320dt per symbol. CustomSquare:
// each Rx maps to its calibrated square pulse, 80dt per symbol. Pulses are
// back-to-back. Throws on a CustomSquare angle missing from the set.
Schedule lower_to_schedule(std::span<const GateOp> gates, const GateCalibrationSet& calset,
                           const DeviceModel& device, const CompilationOptions& options);

// One-gate-per-line text form for debugging.
std::string format_gates(std::span<const GateOp> gates);

}  // namespace modpulse
