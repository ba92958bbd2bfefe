#include "modpulse/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace modpulse {

namespace {

constexpr double kStateTol = 1e-12;

void check_state(const Eigen::Matrix2cd& rho) {
    if (std::abs(rho.trace().real() - 1.0) > kStateTol || std::abs(rho.trace().imag()) > kStateTol) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kStateTol) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    // 2x2 Hermitian eigenvalues from trace and determinant
    const double tr = rho.trace().real();
    const double det = rho.determinant().real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    if ((tr - disc) / 2.0 < -kStateTol) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
}

// Bloch-vector form: rho = (I + x sx + y sy + z sz) / 2. Keeps the trace
// exactly 1 and Hermiticity exact through long evolutions.
struct Bloch {
    double x, y, z;
};

Bloch to_bloch(const Eigen::Matrix2cd& rho) {
    return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), rho(0, 0).real() - rho(1, 1).real()};
}

Eigen::Matrix2cd from_bloch(const Bloch& b) {
    Eigen::Matrix2cd rho;
    rho(0, 0) = (1.0 + b.z) / 2.0;
    rho(1, 1) = (1.0 - b.z) / 2.0;
    rho(0, 1) = std::complex<double>(b.x, -b.y) / 2.0;
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

// Right-handed rotation by theta about the in-plane axis (cos phi, sin phi, 0).
void rotate(Bloch& b, double theta, double axis_cos, double axis_sin) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double dot = axis_cos * b.x + axis_sin * b.y;
    const double nx = b.x * c + axis_sin * b.z * s + axis_cos * dot * (1.0 - c);
    const double ny = b.y * c - axis_cos * b.z * s + axis_sin * dot * (1.0 - c);
    const double nz = b.z * c + (axis_cos * b.y - axis_sin * b.x) * s;
    b.x = nx;
    b.y = ny;
    b.z = nz;
}

struct DecayFactors {
    double population;  // exp(-dt/T1), scales z toward +1
    double coherence;   // exp(-dt/T2), scales x and y
};

DecayFactors per_sample_decay(const DeviceModel& device) {
    const double dt_us = device.sample_time.dt_ns * 1e-3;
    return {std::exp(-dt_us / device.t1_us), std::exp(-dt_us / device.t2_us)};
}

void decay_steps(Bloch& b, const DecayFactors& f, std::int64_t steps) {
    for (std::int64_t i = 0; i < steps; ++i) {
        b.x *= f.coherence;
        b.y *= f.coherence;
        b.z = (1.0 - f.population) + f.population * b.z;
    }
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

DensityMatrix::DensityMatrix() : rho_(Eigen::Matrix2cd::Zero()) { rho_(0, 0) = 1.0; }

DensityMatrix::DensityMatrix(const Eigen::Matrix2cd& rho) : rho_(rho) { check_state(rho_); }

DensityMatrix DensityMatrix::ground() { return DensityMatrix(); }

DensityMatrix DensityMatrix::excited() {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    rho(1, 1) = 1.0;
    return DensityMatrix(rho);
}

DensityMatrix DensityMatrix::plus() {
    Eigen::Matrix2cd rho;
    rho << 0.5, 0.5, 0.5, 0.5;
    return DensityMatrix(rho);
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(Eigen::Matrix2cd::Identity() * 0.5);
}

double DensityMatrix::smallest_eigenvalue() const {
    const double tr = rho_.trace().real();
    const double det = rho_.determinant().real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    return (tr - disc) / 2.0;
}

void check_device(const DeviceModel& device) {
    if (!(device.sample_time.dt_ns > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(device.t1_us > 0.0) || !(device.t2_us > 0.0)) {
        throw std::invalid_argument("T1 and T2 must be positive");
    }
    if (device.t2_us > 2.0 * device.t1_us) {
        throw std::invalid_argument("unphysical decoherence times: T2 > 2*T1");
    }
    if (device.readout_error < 0.0 || device.readout_error >= 1.0) {
        throw std::invalid_argument("readout error must lie in [0,1)");
    }
    if (!(device.transfer.slope_hz_per_amp > 0.0)) {
        throw std::invalid_argument("transfer slope must be positive");
    }
}

DeviceModel noiseless(DeviceModel device) {
    device.t1_us = std::numeric_limits<double>::infinity();
    device.t2_us = std::numeric_limits<double>::infinity();
    device.readout_error = 0.0;
    return device;
}

DeviceModel jakarta_average() { return DeviceModel{}; }

DeviceModel device_preset(std::string_view name) {
    DeviceModel device;
    if (name == "average") {
        return device;
    }
    // Per-date values averaged over the four jobs replicated on that date.
    if (name == "2023-08-15") {
        device.t1_us = 125.325;
        device.t2_us = 45.57;
        device.readout_error = 0.0166;
    } else if (name == "2023-08-16a") {
        device.t1_us = 152.24;
        device.t2_us = 46.15;
        device.readout_error = 0.0155;
    } else if (name == "2023-08-16b") {
        device.t1_us = 174.28;
        device.t2_us = 46.15;
        device.readout_error = 0.01655;
    } else if (name == "2023-08-17") {
        device.t1_us = 123.93;
        device.t2_us = 41.78;
        device.readout_error = 0.018925;
    } else {
        throw std::invalid_argument("unknown device preset: " + std::string(name));
    }
    return device;
}

std::vector<std::string> device_preset_names() {
    return {"average", "2023-08-15", "2023-08-16a", "2023-08-16b", "2023-08-17"};
}

DeviceModel replication_preset(int replication) {
    static const char* kDates[] = {"2023-08-15", "2023-08-16a", "2023-08-16b", "2023-08-17"};
    if (replication < 0) throw std::invalid_argument("replication index must be non-negative");
    return device_preset(kDates[replication % 4]);
}

double rabi_angular_rate(const DeviceModel& device, double amplitude) {
    if (std::abs(amplitude) > device.constraints.max_amplitude + 1e-12) {
        throw std::invalid_argument("drive amplitude " + std::to_string(amplitude) +
                                    " exceeds device maximum " +
                                    std::to_string(device.constraints.max_amplitude));
    }
    const double hz = device.transfer.slope_hz_per_amp * amplitude +
                      device.transfer.cubic_hz_per_amp3 * amplitude * amplitude * amplitude;
    return 2.0 * std::numbers::pi * hz;
}

DensityMatrix evolve(const DeviceModel& device, const Schedule& schedule,
                     const DensityMatrix& initial) {
    check_device(device);
    const auto violations = validate(schedule, device.constraints);
    if (!violations.empty()) {
        std::string message = "schedule fails device constraints:";
        for (const auto& v : violations) {
            message += "\n  instruction " + std::to_string(v.instruction_index) + ": " + v.message;
        }
        throw std::invalid_argument(message);
    }

    const double dt_s = schedule.sample_time.dt_ns * 1e-9;
    const DecayFactors decay = per_sample_decay(device);
    const bool noisy = decay.population != 1.0 || decay.coherence != 1.0;

    Bloch b = to_bloch(initial.matrix());
    double frame = 0.0;
    std::int64_t cursor = 0;

    for (const auto& inst : schedule.instructions) {
        if (const auto* shift = std::get_if<PhaseShift>(&inst.item)) {
            frame += shift->angle_rad;
            continue;
        }
        if (noisy && inst.start_dt > cursor) {
            decay_steps(b, decay, inst.start_dt - cursor);
        }
        cursor = std::max(cursor, inst.start_dt);

        const Waveform wave = item_waveform(inst.item);
        const std::complex<double> rotation =
            frame == 0.0 ? std::complex<double>(1.0, 0.0) : std::polar(1.0, frame);
        for (const auto& base : wave.samples) {
            const std::complex<double> sample = base * rotation;
            const double magnitude = std::abs(sample);
            if (magnitude > 0.0) {
                const double omega = rabi_angular_rate(device, magnitude);
                const double theta = omega * dt_s;
                rotate(b, theta, sample.real() / magnitude, sample.imag() / magnitude);
            }
            if (noisy) decay_steps(b, decay, 1);
        }
        cursor += static_cast<std::int64_t>(wave.samples.size());
    }
    return DensityMatrix(from_bloch(b));
}

ShotResult measure(const DeviceModel& device, const DensityMatrix& rho, std::int64_t shots,
                   std::uint64_t seed) {
    check_device(device);
    if (shots < 1) throw std::invalid_argument("shot count must be at least 1");

    const double p1 = std::clamp(excited_population(rho), 0.0, 1.0);
    std::mt19937_64 rng(seed);
    ShotResult result;
    result.shots = shots;
    for (std::int64_t i = 0; i < shots; ++i) {
        bool one = uniform01(rng) < p1;
        if (device.readout_error > 0.0 && uniform01(rng) < device.readout_error) one = !one;
        if (one) {
            ++result.ones;
        } else {
            ++result.zeros;
        }
    }
    return result;
}

double excited_population(const DensityMatrix& rho) { return rho.matrix()(1, 1).real(); }

nlohmann::json device_to_json(const DeviceModel& device) {
    return nlohmann::json{
        {"dt_ns", device.sample_time.dt_ns},
        {"t1_us", device.t1_us},
        {"t2_us", device.t2_us},
        {"readout_error", device.readout_error},
        {"transfer",
         {{"slope_mhz_per_amp", device.transfer.slope_hz_per_amp * 1e-6},
          {"cubic", device.transfer.cubic_hz_per_amp3 * 1e-6}}},
        {"seed", device.seed},
    };
}

DeviceModel device_from_json(const nlohmann::json& doc) {
    DeviceModel device;
    device.sample_time.dt_ns = doc.at("dt_ns").get<double>();
    device.t1_us = doc.at("t1_us").get<double>();
    device.t2_us = doc.at("t2_us").get<double>();
    device.readout_error = doc.at("readout_error").get<double>();
    const auto& transfer = doc.at("transfer");
    device.transfer.slope_hz_per_amp = transfer.at("slope_mhz_per_amp").get<double>() * 1e6;
    device.transfer.cubic_hz_per_amp3 = transfer.value("cubic", 0.0) * 1e6;
    device.seed = doc.value("seed", DeviceModel{}.seed);
    check_device(device);
    return device;
}

}  // namespace modpulse
