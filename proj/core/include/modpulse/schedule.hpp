// dt-quantized pulse schedules: parametric shapes (square, lifted Gaussian,
// DRAG), raw waveforms, zero-duration virtual-Z phase shifts, and backend
// constraint validation.
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace modpulse {

struct SampleTime {
    double dt_ns = 0.22222;  // nanoseconds per sample
};

// Per-dt complex drive amplitudes; real part is the in-phase channel,
// imaginary part the quadrature channel.
struct Waveform {
    std::vector<std::complex<double>> samples;
};

struct SquarePulse {
    std::complex<double> amplitude;
    std::int64_t duration_dt = 0;
};

// Gaussian envelope shifted and rescaled so the endpoint samples are
// exactly zero and the maximum sample is exactly `peak`.
struct LiftedGaussianPulse {
    std::complex<double> peak;
    std::int64_t duration_dt = 0;
    double sigma_dt = 1.0;
};

// Lifted Gaussian on the in-phase channel plus beta times its time
// derivative on the quadrature channel.
struct DragPulse {
    std::complex<double> peak;
    std::int64_t duration_dt = 0;
    double sigma_dt = 1.0;
    double beta = 0.0;
};

using ParametricPulse = std::variant<SquarePulse, LiftedGaussianPulse, DragPulse>;

// Virtual-Z rotation: zero duration, folded into the phase of every
// subsequent pulse.
struct PhaseShift {
    double angle_rad = 0.0;
};

using ScheduleItem =
    std::variant<SquarePulse, LiftedGaussianPulse, DragPulse, Waveform, PhaseShift>;

struct Instruction {
    std::int64_t start_dt = 0;
    ScheduleItem item;
};

struct Schedule {
    std::vector<Instruction> instructions;
    SampleTime sample_time;

    // End of the last timed item, in dt.
    std::int64_t end_dt() const;
    // Places the item back-to-back after everything scheduled so far.
    void append(ScheduleItem item);
    void append_at(std::int64_t start_dt, ScheduleItem item);
};

struct HardwareConstraints {
    std::int64_t min_pulse_duration_dt = 80;
    std::int64_t granularity_dt = 16;
    double max_amplitude = 1.0;
};

struct Violation {
    std::size_t instruction_index;
    std::string message;
};

// Number of dt samples the item occupies (0 for phase shifts).
std::int64_t item_duration_dt(const ScheduleItem& item);

Waveform sample_pulse(const SquarePulse& pulse);
Waveform sample_pulse(const LiftedGaussianPulse& pulse);
Waveform sample_pulse(const DragPulse& pulse);
Waveform sample_pulse(const ParametricPulse& pulse);

// Samples of any schedule item; phase shifts yield an empty waveform.
Waveform item_waveform(const ScheduleItem& item);

// Flags pulses below the minimum duration, durations off the granularity
// grid, samples above the amplitude bound, out-of-order start times and
// overlapping timed items. Phase shifts are exempt from duration rules.
// Returns the violation list; never throws.
std::vector<Violation> validate(const Schedule& schedule, const HardwareConstraints& constraints);

struct ScheduleDuration {
    std::int64_t dt_count = 0;
    double ns = 0.0;
};

ScheduleDuration total_duration(const Schedule& schedule);

// Equivalent schedule with no PhaseShift items: a running frame angle
// accumulates every shift and each later pulse's complex amplitude is
// multiplied by e^{i*frame}. Timing is unchanged; idempotent.
Schedule resolve_phase_frames(const Schedule& schedule);

nlohmann::json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const nlohmann::json& doc);

}  // namespace modpulse
