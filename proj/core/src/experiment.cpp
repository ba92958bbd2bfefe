#include "modpulse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "modpulse/qfa.hpp"

namespace modpulse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t path_index, std::uint64_t word_len,
                          std::uint64_t replication) {
    std::uint64_t s = splitmix64(base ^ path_index);
    s = splitmix64(s ^ word_len);
    return splitmix64(s ^ replication);
}

void check_config(const ExperimentConfig& config) {
    if (!is_prime(config.p)) {
        throw std::invalid_argument("p must be prime, got " + std::to_string(config.p));
    }
    for (int r : config.residues) {
        if (r < 0 || r >= config.p) {
            throw std::invalid_argument("residue " + std::to_string(r) +
                                        " outside 0..p-1 for p=" + std::to_string(config.p));
        }
    }
    if (config.max_len < 0) throw std::invalid_argument("max_len must be non-negative");
    if (config.shots < 1) throw std::invalid_argument("shots must be at least 1");
    if (config.paths.empty()) throw std::invalid_argument("at least one pulse path required");
    if (config.opt_level != 0 && config.opt_level != 1) {
        throw std::invalid_argument("opt_level must be 0 or 1");
    }
    if (config.replications < 1) throw std::invalid_argument("replications must be at least 1");
}

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.9g", v);
    return buffer;
}

}  // namespace

std::string to_string(PulsePath path) {
    return path == PulsePath::kDefaultDrag ? "default_drag" : "custom_square";
}

PulsePath pulse_path_from_string(std::string_view name) {
    if (name == "default_drag") return PulsePath::kDefaultDrag;
    if (name == "custom_square") return PulsePath::kCustomSquare;
    throw std::invalid_argument("unknown pulse path: " + std::string(name) +
                                " (expected default_drag or custom_square)");
}

std::vector<std::int64_t> enumerate_word_lengths(const ExperimentConfig& config) {
    check_config(config);
    std::vector<std::int64_t> lengths;
    for (std::int64_t w = 0; w <= config.max_len; ++w) {
        const int residue = static_cast<int>(w % config.p);
        if (std::find(config.residues.begin(), config.residues.end(), residue) !=
            config.residues.end()) {
            lengths.push_back(w);
        }
    }
    return lengths;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const CalibrationTable* table) {
    check_config(config);
    const DeviceModel base = config.device ? *config.device : device_preset(config.device_preset);
    check_device(base);

    // Calibrate from a shot-free scan of the noiseless twin unless a table
    // was supplied; decoherence is then the only error source in the rows.
    std::optional<CalibrationTable> owned_table;
    if (table == nullptr) {
        RabiScanConfig scan = default_rabi_scan();
        scan.shots_per_point = 0;
        owned_table.emplace(calibrate(noiseless(base), scan).table);
        table = &*owned_table;
    }

    const ModpSpec spec{config.p, 1};
    GateCalibrationSet calset = default_calibration_set(*table, base, spec);
    const bool wants_square =
        std::find(config.paths.begin(), config.paths.end(), PulsePath::kCustomSquare) !=
        config.paths.end();
    if (config.opt_level == 1 && wants_square) {
        // Level 1 collapses each word to one rotation; calibrate a square
        // pulse per residue at the anchor amplitude by stretching duration.
        const double theta_symbol = 4.0 * std::numbers::pi / config.p;
        for (int m = 1; m < config.p; ++m) {
            const double theta = static_cast<double>(m) * theta_symbol;
            calset.set_rx(theta, design_rotation_square(*table, theta,
                                                        m * kSquareRxDurationDt,
                                                        base.sample_time.dt_ns));
        }
    }

    const auto lengths = enumerate_word_lengths(config);
    std::vector<SweepRow> rows;
    rows.reserve(lengths.size() * config.paths.size() *
                 static_cast<std::size_t>(config.replications));

    for (int rep = 0; rep < config.replications; ++rep) {
        DeviceModel dev = base;
        if (config.replications > 1) {
            const DeviceModel preset = replication_preset(rep);
            dev.t1_us = preset.t1_us;
            dev.t2_us = preset.t2_us;
            dev.readout_error = preset.readout_error;
        }
        if (!config.noise) dev = noiseless(dev);

        for (std::size_t pi = 0; pi < config.paths.size(); ++pi) {
            const PulsePath path = config.paths[pi];
            const CompilationOptions options{config.opt_level, path};
            const std::uint64_t path_key =
                static_cast<std::uint64_t>(path == PulsePath::kCustomSquare);
            for (std::int64_t w : lengths) {
                Schedule schedule;
                DensityMatrix rho;
                try {
                    const auto gates = word_to_gates(spec, w, options);
                    schedule = lower_to_schedule(gates, calset, dev, options);
                    rho = evolve(dev, schedule, DensityMatrix::ground());
                } catch (const std::exception& e) {
                    throw std::runtime_error("sweep aborted at word length " + std::to_string(w) +
                                             " on path " + to_string(path) + ": " + e.what());
                }

                SweepRow row;
                row.word_len = w;
                row.path = path;
                row.opt_level = config.opt_level;
                row.residue = static_cast<int>(w % config.p);
                row.expected_prob = modp_expected_probability(spec, w);
                row.exact_prob = 1.0 - excited_population(rho);
                row.seed = derive_seed(config.seed, path_key, static_cast<std::uint64_t>(w),
                                       static_cast<std::uint64_t>(rep));
                row.shot_prob =
                    measure(dev, rho, config.shots, row.seed).zeros_fraction();
                row.abs_error_exact = std::abs(row.expected_prob - row.exact_prob);
                row.abs_error_shot = std::abs(row.expected_prob - row.shot_prob);
                row.latency_ns = total_duration(schedule).ns;
                row.replication = rep;
                rows.push_back(row);
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.path != b.path) return static_cast<int>(a.path) < static_cast<int>(b.path);
        if (a.word_len != b.word_len) return a.word_len < b.word_len;
        return a.replication < b.replication;
    });
    return rows;
}

ThresholdReport threshold_table(std::span<const SweepRow> rows,
                                const std::vector<double>& thresholds) {
    ThresholdReport report;
    // mean abs_error_exact per (path, residue, word_len) across replications
    std::map<std::pair<int, int>, std::map<std::int64_t, std::pair<double, int>>> groups;
    for (const auto& row : rows) {
        auto& cell = groups[{static_cast<int>(row.path), row.residue}][row.word_len];
        cell.first += row.abs_error_exact;
        cell.second += 1;
        report.sweep_max_len = std::max(report.sweep_max_len, row.word_len);
    }

    for (const auto& [key, by_len] : groups) {
        for (double threshold : thresholds) {
            ThresholdEntry entry;
            entry.path = static_cast<PulsePath>(key.first);
            entry.residue = key.second;
            entry.threshold = threshold;
            entry.max_word_len = -1;
            entry.unbounded = true;
            for (const auto& [w, cell] : by_len) {
                if (cell.first / cell.second < threshold) {
                    entry.max_word_len = w;
                } else {
                    entry.unbounded = false;
                    break;
                }
            }
            report.entries.push_back(entry);
        }
    }
    std::sort(report.entries.begin(), report.entries.end(),
              [](const ThresholdEntry& a, const ThresholdEntry& b) {
                  if (a.path != b.path) return static_cast<int>(a.path) < static_cast<int>(b.path);
                  if (a.residue != b.residue) return a.residue < b.residue;
                  return a.threshold < b.threshold;
              });
    return report;
}

std::span<const HardwareReferenceEntry> jakarta_reference_table() {
    static const HardwareReferenceEntry kTable[] = {
        {"qiskit_default", 0.10, 0, 66, false},
        {"qiskit_default", 0.10, 3, 58, false},
        {"qiskit_default", 0.20, 0, 132, false},
        {"qiskit_default", 0.20, 3, 135, false},
        {"square", 0.10, 0, 539, false},
        {"square", 0.10, 3, 795, false},
        {"square", 0.20, 0, 1000, true},
        {"square", 0.20, 3, 1000, true},
    };
    return kTable;
}

nlohmann::json rows_to_json(std::span<const SweepRow> rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        out.push_back({{"word_len", row.word_len},
                       {"path", to_string(row.path)},
                       {"opt_level", row.opt_level},
                       {"residue", row.residue},
                       {"expected_prob", row.expected_prob},
                       {"exact_prob", row.exact_prob},
                       {"shot_prob", row.shot_prob},
                       {"abs_error_exact", row.abs_error_exact},
                       {"abs_error_shot", row.abs_error_shot},
                       {"latency_ns", row.latency_ns},
                       {"replication", row.replication},
                       {"seed", row.seed}});
    }
    return out;
}

std::vector<SweepRow> rows_from_json(const nlohmann::json& doc) {
    std::vector<SweepRow> rows;
    rows.reserve(doc.size());
    for (const auto& entry : doc) {
        SweepRow row;
        row.word_len = entry.at("word_len").get<std::int64_t>();
        row.path = pulse_path_from_string(entry.at("path").get<std::string>());
        row.opt_level = entry.at("opt_level").get<int>();
        row.residue = entry.at("residue").get<int>();
        row.expected_prob = entry.at("expected_prob").get<double>();
        row.exact_prob = entry.at("exact_prob").get<double>();
        row.shot_prob = entry.at("shot_prob").get<double>();
        row.abs_error_exact = entry.at("abs_error_exact").get<double>();
        row.abs_error_shot = entry.at("abs_error_shot").get<double>();
        row.latency_ns = entry.at("latency_ns").get<double>();
        row.replication = entry.at("replication").get<int>();
        row.seed = entry.at("seed").get<std::uint64_t>();
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json threshold_report_to_json(const ThresholdReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"path", to_string(e.path)},
                           {"residue", e.residue},
                           {"threshold", e.threshold},
                           {"max_word_len", e.max_word_len},
                           {"unbounded", e.unbounded}});
    }
    nlohmann::json reference = nlohmann::json::array();
    for (const auto& r : jakarta_reference_table()) {
        reference.push_back({{"implementation", r.implementation},
                             {"threshold", r.threshold},
                             {"residue", r.residue},
                             {"max_word_len", r.max_word_len},
                             {"unbounded", r.unbounded}});
    }
    return nlohmann::json{{"entries", std::move(entries)},
                          {"sweep_max_len", report.sweep_max_len},
                          {"hardware_reference", std::move(reference)}};
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json paths = nlohmann::json::array();
    for (PulsePath p : config.paths) paths.push_back(to_string(p));
    nlohmann::json out{{"p", config.p},
                       {"residues", config.residues},
                       {"max_len", config.max_len},
                       {"shots", config.shots},
                       {"paths", std::move(paths)},
                       {"opt_level", config.opt_level},
                       {"device_preset", config.device_preset},
                       {"noise", config.noise ? "on" : "off"},
                       {"seed", config.seed},
                       {"replications", config.replications}};
    if (config.device) out["device"] = device_to_json(*config.device);
    return out;
}

ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base) {
    if (doc.contains("p")) base.p = doc.at("p").get<int>();
    if (doc.contains("residues")) base.residues = doc.at("residues").get<std::vector<int>>();
    if (doc.contains("max_len")) base.max_len = doc.at("max_len").get<std::int64_t>();
    if (doc.contains("shots")) base.shots = doc.at("shots").get<std::int64_t>();
    if (doc.contains("paths")) {
        base.paths.clear();
        for (const auto& p : doc.at("paths")) {
            base.paths.push_back(pulse_path_from_string(p.get<std::string>()));
        }
    }
    if (doc.contains("opt_level")) base.opt_level = doc.at("opt_level").get<int>();
    if (doc.contains("device_preset")) {
        base.device_preset = doc.at("device_preset").get<std::string>();
    }
    if (doc.contains("device")) base.device = device_from_json(doc.at("device"));
    if (doc.contains("noise")) {
        const auto& noise = doc.at("noise");
        if (noise.is_boolean()) {
            base.noise = noise.get<bool>();
        } else {
            const std::string value = noise.get<std::string>();
            if (value != "on" && value != "off") {
                throw std::invalid_argument("noise must be \"on\" or \"off\"");
            }
            base.noise = value == "on";
        }
    }
    if (doc.contains("seed")) base.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("replications")) base.replications = doc.at("replications").get<int>();
    return base;
}

void emit_report(std::span<const SweepRow> rows, const ThresholdReport& report,
                 ReportFormat format, const std::filesystem::path& destination,
                 const ExperimentConfig* config) {
    std::ofstream out(destination);
    if (!out) {
        throw std::runtime_error("cannot open " + destination.string() + " for writing");
    }
    if (format == ReportFormat::kCsv) {
        out << "word_len,path,opt_level,residue,expected_prob,exact_prob,shot_prob,"
               "abs_error_exact,abs_error_shot,latency_ns,replication,seed\n";
        for (const auto& row : rows) {
            out << row.word_len << ',' << to_string(row.path) << ',' << row.opt_level << ','
                << row.residue << ',' << format_double(row.expected_prob) << ','
                << format_double(row.exact_prob) << ',' << format_double(row.shot_prob) << ','
                << format_double(row.abs_error_exact) << ','
                << format_double(row.abs_error_shot) << ',' << format_double(row.latency_ns)
                << ',' << row.replication << ',' << row.seed << '\n';
        }
    } else {
        nlohmann::json doc{{"rows", rows_to_json(rows)},
                           {"thresholds", threshold_report_to_json(report)}};
        if (config != nullptr) doc["config"] = config_to_json(*config);
        out << doc.dump(2) << '\n';
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("failed while writing " + destination.string());
    }
}

std::string format_threshold_report(const ThresholdReport& report) {
    std::string text = "path            residue  threshold  max word length\n";
    auto line = [&](const std::string& name, int residue, double threshold, std::int64_t len,
                    bool unbounded, std::int64_t limit) {
        char buffer[128];
        const std::string shown =
            unbounded ? (">" + std::to_string(limit)) : std::to_string(len);
        std::snprintf(buffer, sizeof(buffer), "%-15s %-8d %-10.0f %s\n", name.c_str(), residue,
                      threshold * 100.0, shown.c_str());
        text += buffer;
    };
    for (const auto& e : report.entries) {
        line(to_string(e.path), e.residue, e.threshold, e.max_word_len, e.unbounded,
             report.sweep_max_len);
    }
    text += "\nJakarta hardware reference (not asserted):\n";
    text += "implementation  residue  threshold  max word length\n";
    for (const auto& r : jakarta_reference_table()) {
        line(r.implementation, r.residue, r.threshold, r.max_word_len, r.unbounded, 1000);
    }
    return text;
}

}  // namespace modpulse
