#include "modpulse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modpulse {

namespace {

constexpr double kAmplitudeSlack = 1e-12;

void check_envelope_params(std::int64_t duration_dt, double sigma_dt) {
    if (duration_dt < 1) throw std::invalid_argument("pulse duration must be at least 1 dt");
    if (!(sigma_dt > 0.0)) throw std::invalid_argument("sigma must be positive");
}

// Normalized lifted Gaussian envelope (max sample exactly 1, endpoints
// exactly 0) and, on demand, its analytic time derivative rescaled by the
// same factor.
struct LiftedEnvelope {
    std::vector<double> value;
    std::vector<double> derivative;
};

LiftedEnvelope lifted_gaussian_envelope(std::int64_t duration_dt, double sigma_dt,
                                        bool with_derivative) {
    LiftedEnvelope env;
    env.value.resize(static_cast<std::size_t>(duration_dt));
    if (with_derivative) env.derivative.resize(static_cast<std::size_t>(duration_dt));

    if (duration_dt == 1) {
        env.value[0] = 1.0;
        return env;  // derivative already zero
    }

    const double center = static_cast<double>(duration_dt - 1) / 2.0;
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma_dt * sigma_dt);

    std::vector<double> raw(static_cast<std::size_t>(duration_dt));
    double raw_max = 0.0;
    for (std::int64_t i = 0; i < duration_dt; ++i) {
        const double t = static_cast<double>(i) - center;
        raw[static_cast<std::size_t>(i)] = std::exp(-t * t * inv_two_sigma_sq);
        raw_max = std::max(raw_max, raw[static_cast<std::size_t>(i)]);
    }
    const double edge = raw.front();  // == raw.back() by symmetry of the center
    const double denom = raw_max - edge;
    if (denom <= 0.0) return env;  // pathologically flat: all samples zero

    // raw.front() == raw.back() == edge bit-for-bit, so both endpoints land
    // on exactly zero.
    const double scale = 1.0 / denom;
    for (std::int64_t i = 0; i < duration_dt; ++i) {
        const auto u = static_cast<std::size_t>(i);
        env.value[u] = (raw[u] - edge) * scale;
        if (with_derivative) {
            const double t = static_cast<double>(i) - center;
            env.derivative[u] = -t / (sigma_dt * sigma_dt) * raw[u] * scale;
        }
    }
    return env;
}

}  // namespace

std::int64_t item_duration_dt(const ScheduleItem& item) {
    return std::visit(
        [](const auto& v) -> std::int64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PhaseShift>) {
                return 0;
            } else if constexpr (std::is_same_v<T, Waveform>) {
                return static_cast<std::int64_t>(v.samples.size());
            } else {
                return v.duration_dt;
            }
        },
        item);
}

std::int64_t Schedule::end_dt() const {
    std::int64_t end = 0;
    for (const auto& inst : instructions) {
        end = std::max(end, inst.start_dt + item_duration_dt(inst.item));
    }
    return end;
}

void Schedule::append(ScheduleItem item) {
    const std::int64_t start = end_dt();
    instructions.push_back({start, std::move(item)});
}

void Schedule::append_at(std::int64_t start_dt, ScheduleItem item) {
    instructions.push_back({start_dt, std::move(item)});
}

Waveform sample_pulse(const SquarePulse& pulse) {
    if (pulse.duration_dt < 1) throw std::invalid_argument("pulse duration must be at least 1 dt");
    Waveform wave;
    wave.samples.assign(static_cast<std::size_t>(pulse.duration_dt), pulse.amplitude);
    return wave;
}

Waveform sample_pulse(const LiftedGaussianPulse& pulse) {
    check_envelope_params(pulse.duration_dt, pulse.sigma_dt);
    const auto env = lifted_gaussian_envelope(pulse.duration_dt, pulse.sigma_dt, false);
    Waveform wave;
    wave.samples.reserve(env.value.size());
    for (double e : env.value) wave.samples.push_back(pulse.peak * e);
    return wave;
}

Waveform sample_pulse(const DragPulse& pulse) {
    check_envelope_params(pulse.duration_dt, pulse.sigma_dt);
    const auto env = lifted_gaussian_envelope(pulse.duration_dt, pulse.sigma_dt, true);
    Waveform wave;
    wave.samples.reserve(env.value.size());
    for (std::size_t i = 0; i < env.value.size(); ++i) {
        const std::complex<double> iq(env.value[i], pulse.beta * env.derivative[i]);
        wave.samples.push_back(pulse.peak * iq);
    }
    return wave;
}

Waveform sample_pulse(const ParametricPulse& pulse) {
    return std::visit([](const auto& p) { return sample_pulse(p); }, pulse);
}

Waveform item_waveform(const ScheduleItem& item) {
    return std::visit(
        [](const auto& v) -> Waveform {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PhaseShift>) {
                return Waveform{};
            } else if constexpr (std::is_same_v<T, Waveform>) {
                return v;
            } else {
                return sample_pulse(v);
            }
        },
        item);
}

std::vector<Violation> validate(const Schedule& schedule, const HardwareConstraints& constraints) {
    std::vector<Violation> violations;
    auto flag = [&](std::size_t index, std::string message) {
        violations.push_back({index, std::move(message)});
    };

    std::int64_t prev_start = 0;
    std::int64_t timed_end = 0;
    for (std::size_t i = 0; i < schedule.instructions.size(); ++i) {
        const auto& inst = schedule.instructions[i];
        if (inst.start_dt < 0) flag(i, "negative start time");
        if (i > 0 && inst.start_dt < prev_start) flag(i, "start times not non-decreasing");
        prev_start = inst.start_dt;

        const std::int64_t duration = item_duration_dt(inst.item);
        const bool timed = !std::holds_alternative<PhaseShift>(inst.item);
        if (!timed) continue;

        if (duration < constraints.min_pulse_duration_dt) {
            flag(i, "duration " + std::to_string(duration) + "dt below minimum " +
                        std::to_string(constraints.min_pulse_duration_dt) + "dt");
        }
        if (constraints.granularity_dt > 0 && duration % constraints.granularity_dt != 0) {
            flag(i, "duration " + std::to_string(duration) + "dt not a multiple of " +
                        std::to_string(constraints.granularity_dt) + "dt");
        }
        if (inst.start_dt < timed_end) {
            flag(i, "overlaps the previous pulse");
        }
        timed_end = std::max(timed_end, inst.start_dt + duration);

        const Waveform wave = item_waveform(inst.item);
        for (const auto& sample : wave.samples) {
            if (std::abs(sample) > constraints.max_amplitude + kAmplitudeSlack) {
                flag(i, "sample amplitude " + std::to_string(std::abs(sample)) +
                            " exceeds maximum " + std::to_string(constraints.max_amplitude));
                break;
            }
        }
    }
    return violations;
}

ScheduleDuration total_duration(const Schedule& schedule) {
    ScheduleDuration d;
    d.dt_count = schedule.end_dt();
    d.ns = static_cast<double>(d.dt_count) * schedule.sample_time.dt_ns;
    return d;
}

Schedule resolve_phase_frames(const Schedule& schedule) {
    Schedule out;
    out.sample_time = schedule.sample_time;
    out.instructions.reserve(schedule.instructions.size());

    double frame = 0.0;
    for (const auto& inst : schedule.instructions) {
        if (const auto* shift = std::get_if<PhaseShift>(&inst.item)) {
            frame += shift->angle_rad;
            continue;
        }
        if (frame == 0.0) {
            out.instructions.push_back(inst);
            continue;
        }
        const std::complex<double> rotation = std::polar(1.0, frame);
        ScheduleItem rotated = std::visit(
            [&](const auto& v) -> ScheduleItem {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Waveform>) {
                    Waveform w = v;
                    for (auto& s : w.samples) s *= rotation;
                    return w;
                } else if constexpr (std::is_same_v<T, SquarePulse>) {
                    SquarePulse p = v;
                    p.amplitude *= rotation;
                    return p;
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    return v;  // unreachable
                } else {
                    T p = v;
                    p.peak *= rotation;
                    return p;
                }
            },
            inst.item);
        out.instructions.push_back({inst.start_dt, std::move(rotated)});
    }
    return out;
}

namespace {

nlohmann::json complex_to_json(const std::complex<double>& z) {
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

std::complex<double> complex_from_json(const nlohmann::json& doc) {
    return {doc.at("re").get<double>(), doc.at("im").get<double>()};
}

}  // namespace

nlohmann::json schedule_to_json(const Schedule& schedule) {
    nlohmann::json instructions = nlohmann::json::array();
    for (const auto& inst : schedule.instructions) {
        nlohmann::json entry{{"start_dt", inst.start_dt}};
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, SquarePulse>) {
                    entry["kind"] = "square";
                    entry["amplitude"] = complex_to_json(v.amplitude);
                    entry["duration_dt"] = v.duration_dt;
                } else if constexpr (std::is_same_v<T, LiftedGaussianPulse>) {
                    entry["kind"] = "lifted_gaussian";
                    entry["peak"] = complex_to_json(v.peak);
                    entry["duration_dt"] = v.duration_dt;
                    entry["sigma_dt"] = v.sigma_dt;
                } else if constexpr (std::is_same_v<T, DragPulse>) {
                    entry["kind"] = "drag";
                    entry["peak"] = complex_to_json(v.peak);
                    entry["duration_dt"] = v.duration_dt;
                    entry["sigma_dt"] = v.sigma_dt;
                    entry["beta"] = v.beta;
                } else if constexpr (std::is_same_v<T, Waveform>) {
                    entry["kind"] = "waveform";
                    nlohmann::json re = nlohmann::json::array();
                    nlohmann::json im = nlohmann::json::array();
                    for (const auto& s : v.samples) {
                        re.push_back(s.real());
                        im.push_back(s.imag());
                    }
                    entry["samples_re"] = std::move(re);
                    entry["samples_im"] = std::move(im);
                } else {
                    entry["kind"] = "phase_shift";
                    entry["angle_rad"] = v.angle_rad;
                }
            },
            inst.item);
        instructions.push_back(std::move(entry));
    }
    return nlohmann::json{{"dt_ns", schedule.sample_time.dt_ns},
                          {"instructions", std::move(instructions)}};
}

Schedule schedule_from_json(const nlohmann::json& doc) {
    Schedule schedule;
    schedule.sample_time.dt_ns = doc.at("dt_ns").get<double>();
    for (const auto& entry : doc.at("instructions")) {
        const std::string kind = entry.at("kind").get<std::string>();
        const auto start = entry.at("start_dt").get<std::int64_t>();
        if (kind == "square") {
            schedule.append_at(start, SquarePulse{complex_from_json(entry.at("amplitude")),
                                                  entry.at("duration_dt").get<std::int64_t>()});
        } else if (kind == "lifted_gaussian") {
            schedule.append_at(start, LiftedGaussianPulse{complex_from_json(entry.at("peak")),
                                                          entry.at("duration_dt").get<std::int64_t>(),
                                                          entry.at("sigma_dt").get<double>()});
        } else if (kind == "drag") {
            schedule.append_at(start, DragPulse{complex_from_json(entry.at("peak")),
                                                entry.at("duration_dt").get<std::int64_t>(),
                                                entry.at("sigma_dt").get<double>(),
                                                entry.at("beta").get<double>()});
        } else if (kind == "waveform") {
            Waveform wave;
            const auto& re = entry.at("samples_re");
            const auto& im = entry.at("samples_im");
            if (re.size() != im.size()) {
                throw std::invalid_argument("waveform sample arrays differ in length");
            }
            wave.samples.reserve(re.size());
            for (std::size_t i = 0; i < re.size(); ++i) {
                wave.samples.emplace_back(re[i].get<double>(), im[i].get<double>());
            }
            schedule.append_at(start, std::move(wave));
        } else if (kind == "phase_shift") {
            schedule.append_at(start, PhaseShift{entry.at("angle_rad").get<double>()});
        } else {
            throw std::invalid_argument("unknown schedule instruction kind: " + kind);
        }
    }
    return schedule;
}

}  // namespace modpulse
