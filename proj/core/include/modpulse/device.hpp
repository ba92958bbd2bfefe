// Simulated noisy single qubit: drive-Hamiltonian evolution of a density
// matrix with T1 relaxation, T2 dephasing, readout error and shot sampling.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "modpulse/schedule.hpp"

namespace modpulse {

// Paper-anchored transfer: drive amplitude 0.068 corresponds to a Rabi
// frequency of 10.23 MHz.
inline constexpr double kAnchorAmplitude = 0.068;
inline constexpr double kAnchorRabiHz = 10.23e6;
inline constexpr double kAnchorSlopeHzPerAmp = kAnchorRabiHz / kAnchorAmplitude;

// Amplitude -> Rabi frequency map. Odd in the amplitude by construction.
struct TransferFunction {
    double slope_hz_per_amp = kAnchorSlopeHzPerAmp;
    double cubic_hz_per_amp3 = 0.0;
};

// 2x2 qubit state. Construction validates unit trace, Hermiticity and
// positive semidefiniteness (all to 1e-12).
class DensityMatrix {
public:
    DensityMatrix();  // ground state |0><0|
    explicit DensityMatrix(const Eigen::Matrix2cd& rho);

    static DensityMatrix ground();
    static DensityMatrix excited();
    static DensityMatrix plus();  // (|0>+|1>)/sqrt(2)
    static DensityMatrix maximally_mixed();

    const Eigen::Matrix2cd& matrix() const { return rho_; }
    double smallest_eigenvalue() const;

private:
    Eigen::Matrix2cd rho_;
};

struct ShotResult {
    std::int64_t zeros = 0;
    std::int64_t ones = 0;
    std::int64_t shots = 0;

    double ones_fraction() const { return static_cast<double>(ones) / static_cast<double>(shots); }
    double zeros_fraction() const { return static_cast<double>(zeros) / static_cast<double>(shots); }
};

struct DeviceModel {
    SampleTime sample_time{};
    double t1_us = 146.0;
    double t2_us = 45.0;
    double readout_error = 0.0166;
    TransferFunction transfer{};
    HardwareConstraints constraints{};
    std::uint64_t seed = 20230815;
};

// Throws unless t1 > 0, t2 > 0, t2 <= 2*t1 and readout_error in [0,1).
void check_device(const DeviceModel& device);

// Copy with T1 = T2 = infinity and zero readout error.
DeviceModel noiseless(DeviceModel device);

// Device with the average Jakarta parameters (T1 146 us, T2 45 us,
// readout 0.0166) and the anchored linear transfer.
DeviceModel jakarta_average();

// Named presets: "average" plus the four replication dates
// "2023-08-15", "2023-08-16a", "2023-08-16b", "2023-08-17".
DeviceModel device_preset(std::string_view name);
std::vector<std::string> device_preset_names();
// Preset for replication r (r = 0..3 map to the four dates, cyclic beyond).
DeviceModel replication_preset(int replication);

// Omega = 2*pi*(slope*A + cubic*A^3) in rad/s. A constant drive at angular
// rate Omega for time t rotates the Bloch vector by Omega*t about the
// in-phase axis. Rejects |amplitude| beyond the device maximum.
double rabi_angular_rate(const DeviceModel& device, double amplitude);

// Split-step evolution, one dt sample at a time: closed-form axis-angle
// unitary from the sample's I/Q value, then amplitude damping with
// gamma1 = 1 - exp(-dt/T1), then a phase flip chosen so free coherence
// decays exactly as exp(-t/T2). Idle gaps apply only the decay channels.
// Phase shifts are tracked as a running frame. Throws if the schedule
// fails constraint validation.
DensityMatrix evolve(const DeviceModel& device, const Schedule& schedule,
                     const DensityMatrix& initial);

// Each shot draws outcome 1 with probability rho_11, then flips with
// probability readout_error. Deterministic for a fixed seed.
ShotResult measure(const DeviceModel& device, const DensityMatrix& rho, std::int64_t shots,
                   std::uint64_t seed);

// rho_11, exact (no shot noise).
double excited_population(const DensityMatrix& rho);

nlohmann::json device_to_json(const DeviceModel& device);
DeviceModel device_from_json(const nlohmann::json& doc);

}  // namespace modpulse
