// Experiment orchestration: word-length sweeps over residue classes,
// expected-vs-simulated comparison rows, monotone-prefix threshold tables
// and CSV/JSON report emission.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modpulse/calibration.hpp"
#include "modpulse/compiler.hpp"
#include "modpulse/device.hpp"

namespace modpulse {

struct ExperimentConfig {
    int p = 11;
    std::vector<int> residues{0, 3};
    std::int64_t max_len = 1000;
    std::int64_t shots = 1024;
    std::vector<PulsePath> paths{PulsePath::kDefaultDrag, PulsePath::kCustomSquare};
    int opt_level = 0;
    std::string device_preset = "average";
    std::optional<DeviceModel> device;  // overrides the preset when set
    bool noise = true;
    std::uint64_t seed = 20230815;
    int replications = 1;
};

struct SweepRow {
    std::int64_t word_len = 0;
    PulsePath path = PulsePath::kDefaultDrag;
    int opt_level = 0;
    int residue = 0;
    double expected_prob = 0.0;
    double exact_prob = 0.0;
    double shot_prob = 0.0;
    double abs_error_exact = 0.0;
    double abs_error_shot = 0.0;
    double latency_ns = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
};

std::string to_string(PulsePath path);
PulsePath pulse_path_from_string(std::string_view name);

// All w in [0, max_len] with w mod p in residues, ascending.
std::vector<std::int64_t> enumerate_word_lengths(const ExperimentConfig& config);

// Compiles, evolves and samples every (path, word length, replication).
// exact_prob is the |0> population without shot noise; shot_prob comes from
// `shots` seeded measurements. Replications beyond the first use the
// per-date replication presets. When no table is supplied, one is fitted
// from a shot-free scan of the noiseless device twin so that sweep error
// isolates decoherence rather than calibration noise. Rows are returned in
// canonical (path, word_len, replication) order.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                const CalibrationTable* table = nullptr);

struct ThresholdEntry {
    PulsePath path;
    int residue;
    double threshold;
    // Largest enumerated length whose error prefix stays below the
    // threshold; -1 when even the shortest length fails. Ignored when
    // `unbounded` is set (the threshold never tripped up to max_len).
    std::int64_t max_word_len;
    bool unbounded;
};

struct ThresholdReport {
    std::vector<ThresholdEntry> entries;
    std::int64_t sweep_max_len = 0;
};

// Monotone-prefix rule per (path, residue, threshold) over abs_error_exact,
// averaged across replications.
ThresholdReport threshold_table(std::span<const SweepRow> rows,
                                const std::vector<double>& thresholds = {0.10, 0.20});

// Jakarta hardware results (Table 1 analog), kept for report juxtaposition
// only; never asserted against.
struct HardwareReferenceEntry {
    const char* implementation;
    double threshold;
    int residue;
    std::int64_t max_word_len;
    bool unbounded;
};
std::span<const HardwareReferenceEntry> jakarta_reference_table();

enum class ReportFormat { kCsv, kJson };

// CSV: fixed column set (word_len, path, opt_level, residue, expected_prob,
// exact_prob, shot_prob, abs_error_exact, abs_error_shot, latency_ns,
// replication, seed), 9 significant digits. JSON: same rows plus the
// threshold report, the hardware reference and the config when given.
void emit_report(std::span<const SweepRow> rows, const ThresholdReport& report,
                 ReportFormat format, const std::filesystem::path& destination,
                 const ExperimentConfig* config = nullptr);

nlohmann::json rows_to_json(std::span<const SweepRow> rows);
std::vector<SweepRow> rows_from_json(const nlohmann::json& doc);
nlohmann::json threshold_report_to_json(const ThresholdReport& report);
nlohmann::json config_to_json(const ExperimentConfig& config);
// Fields present in the document override the corresponding base fields.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  ExperimentConfig base = ExperimentConfig{});

// Renders the threshold table side by side with the hardware reference.
std::string format_threshold_report(const ThresholdReport& report);

}  // namespace modpulse
