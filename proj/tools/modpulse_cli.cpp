// Command-line front end: calibrate, sweep, report and simulate-word.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modpulse/calibration.hpp"
#include "modpulse/compiler.hpp"
#include "modpulse/device.hpp"
#include "modpulse/experiment.hpp"
#include "modpulse/qfa.hpp"

namespace {

using namespace modpulse;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json doc;
    in >> doc;
    return doc;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
}

DeviceModel resolve_device(const std::string& preset, const std::string& device_file) {
    if (!device_file.empty()) return device_from_json(load_json(device_file));
    return device_preset(preset);
}

std::vector<PulsePath> parse_paths(const std::vector<std::string>& names) {
    std::vector<PulsePath> paths;
    for (const auto& name : names) paths.push_back(pulse_path_from_string(name));
    return paths;
}

struct SweepFlags {
    ExperimentConfig config;
    std::vector<std::string> path_names{"default_drag", "custom_square"};
    std::string noise = "on";
    std::string device_file;
    std::string config_file;
    std::string table_file;
};

void add_device_flags(CLI::App* cmd, std::string& preset, std::string& device_file) {
    cmd->add_option("--device", preset, "device preset name")
        ->default_val("average")
        ->check(CLI::IsMember(device_preset_names()));
    cmd->add_option("--device-file", device_file, "JSON device model (overrides --device)");
}

ExperimentConfig finalize_sweep_config(SweepFlags& flags) {
    flags.config.paths = parse_paths(flags.path_names);
    if (flags.noise != "on" && flags.noise != "off") {
        throw CLI::ValidationError("--noise", "expected on or off");
    }
    flags.config.noise = flags.noise == "on";
    if (!flags.device_file.empty()) {
        flags.config.device = device_from_json(load_json(flags.device_file));
    }
    if (!flags.config_file.empty()) {
        flags.config = config_from_json(load_json(flags.config_file), flags.config);
    }
    return flags.config;
}

int run_calibrate(const std::string& preset, const std::string& device_file,
                  std::int64_t shots, std::uint64_t seed, bool seed_set,
                  const std::string& out_path) {
    DeviceModel device = resolve_device(preset, device_file);
    if (seed_set) device.seed = seed;

    RabiScanConfig scan = default_rabi_scan();
    scan.shots_per_point = shots;
    const CalibrationResult result = calibrate(device, scan);

    std::cout << "amplitude    rate_mhz    residual    converged\n";
    for (const auto& [amplitude, fit] : result.fits) {
        std::printf("%-12.4f %-11.4f %-11.3e %s\n", amplitude, fit.rate_hz * 1e-6, fit.residual,
                    fit.converged ? "yes" : "no");
    }
    const SquarePulse anchor = design_rotation_square(
        result.table, 4.0 * std::numbers::pi / 11.0, kSquareRxDurationDt,
        device.sample_time.dt_ns);
    std::cout << "designed Rx(4pi/11) square pulse: amplitude "
              << anchor.amplitude.real() << " over " << anchor.duration_dt << "dt\n";

    if (!out_path.empty()) {
        write_json(out_path, calibration_to_json(result));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int run_sweep_cmd(SweepFlags& flags, const std::string& out_path, const std::string& format) {
    const ExperimentConfig config = finalize_sweep_config(flags);
    std::optional<CalibrationResult> loaded;
    const CalibrationTable* table = nullptr;
    if (!flags.table_file.empty()) {
        loaded = calibration_from_json(load_json(flags.table_file));
        table = &loaded->table;
    }

    const auto rows = run_sweep(config, table);
    const auto report = threshold_table(rows);
    const ReportFormat fmt = format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson;
    emit_report(rows, report, fmt, out_path, &config);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    return 0;
}

int run_report(const std::string& rows_path, std::vector<double> thresholds,
               const std::string& out_path) {
    const nlohmann::json doc = load_json(rows_path);
    const auto rows = rows_from_json(doc.contains("rows") ? doc.at("rows") : doc);
    if (thresholds.empty()) thresholds = {0.10, 0.20};
    const auto report = threshold_table(rows, thresholds);
    std::cout << format_threshold_report(report);
    if (!out_path.empty()) {
        write_json(out_path, threshold_report_to_json(report));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int run_simulate_word(std::int64_t len, const std::string& path_name, int opt_level,
                      const std::string& preset, const std::string& device_file,
                      const std::string& noise, std::int64_t shots, std::uint64_t seed,
                      const std::string& table_file) {
    ExperimentConfig config;
    config.max_len = len;
    config.residues = {static_cast<int>(len % config.p)};
    config.paths = {pulse_path_from_string(path_name)};
    config.opt_level = opt_level;
    config.device_preset = preset;
    if (!device_file.empty()) config.device = device_from_json(load_json(device_file));
    config.noise = noise == "on";
    config.shots = shots;
    config.seed = seed;

    std::optional<CalibrationResult> loaded;
    const CalibrationTable* table = nullptr;
    if (!table_file.empty()) {
        loaded = calibration_from_json(load_json(table_file));
        table = &loaded->table;
    }

    const auto rows = run_sweep(config, table);
    for (const auto& row : rows) {
        if (row.word_len != len) continue;
        std::cout << "word length    " << row.word_len << "\n"
                  << "path           " << to_string(row.path) << "\n"
                  << "expected_prob  " << row.expected_prob << "\n"
                  << "exact_prob     " << row.exact_prob << "\n"
                  << "shot_prob      " << row.shot_prob << "\n"
                  << "abs_error      " << row.abs_error_exact << "\n"
                  << "latency_ns     " << row.latency_ns << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MOD^p quantum finite automaton pulse simulator"};
    app.require_subcommand(1);

    // calibrate
    auto* calibrate_cmd = app.add_subcommand("calibrate", "run Rabi scan + fit, write the table");
    std::string cal_preset, cal_device_file, cal_out;
    std::int64_t cal_shots = 1024;
    std::uint64_t cal_seed = 0;
    add_device_flags(calibrate_cmd, cal_preset, cal_device_file);
    calibrate_cmd->add_option("--shots", cal_shots, "shots per scan point (0 = exact)");
    auto* cal_seed_opt = calibrate_cmd->add_option("--seed", cal_seed, "scan RNG seed");
    calibrate_cmd->add_option("--out", cal_out, "calibration table JSON path");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run the word-length experiment, write rows");
    SweepFlags sweep_flags;
    std::string sweep_out = "sweep.json", sweep_format = "json";
    sweep_cmd->add_option("--p", sweep_flags.config.p, "prime modulus");
    sweep_cmd->add_option("--residues", sweep_flags.config.residues, "residue classes mod p");
    sweep_cmd->add_option("--max-len", sweep_flags.config.max_len, "maximum word length");
    sweep_cmd->add_option("--shots", sweep_flags.config.shots, "shots per word");
    sweep_cmd->add_option("--paths", sweep_flags.path_names, "pulse paths to run");
    sweep_cmd->add_option("--opt-level", sweep_flags.config.opt_level, "0 or 1");
    add_device_flags(sweep_cmd, sweep_flags.config.device_preset, sweep_flags.device_file);
    sweep_cmd->add_option("--noise", sweep_flags.noise, "on|off")->default_val("on");
    sweep_cmd->add_option("--seed", sweep_flags.config.seed, "base RNG seed");
    sweep_cmd->add_option("--replications", sweep_flags.config.replications,
                          "replication count (presets per date)");
    sweep_cmd->add_option("--table", sweep_flags.table_file, "calibration table JSON to reuse");
    sweep_cmd->add_option("--config", sweep_flags.config_file,
                          "JSON config file; its fields override flags");
    auto* sweep_out_opt = sweep_cmd->add_option("--out", sweep_out, "output path");
    sweep_cmd->add_option("--format", sweep_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // report
    auto* report_cmd = app.add_subcommand("report", "compute threshold tables from sweep rows");
    std::string report_rows, report_out;
    std::vector<double> report_thresholds;
    report_cmd->add_option("--rows", report_rows, "sweep JSON output")->required();
    report_cmd->add_option("--thresholds", report_thresholds, "error thresholds (fractions)");
    report_cmd->add_option("--out", report_out, "threshold report JSON path");

    // simulate-word
    auto* sim_cmd = app.add_subcommand("simulate-word", "one-off word simulation");
    std::int64_t sim_len = 0;
    std::string sim_path = "custom_square", sim_preset, sim_device_file, sim_noise = "on",
                sim_table;
    int sim_opt_level = 0;
    std::int64_t sim_shots = 1024;
    std::uint64_t sim_seed = 20230815;
    sim_cmd->add_option("--len", sim_len, "word length")->required();
    sim_cmd->add_option("--path", sim_path, "default_drag|custom_square");
    sim_cmd->add_option("--opt-level", sim_opt_level, "0 or 1");
    add_device_flags(sim_cmd, sim_preset, sim_device_file);
    sim_cmd->add_option("--noise", sim_noise, "on|off")->default_val("on");
    sim_cmd->add_option("--shots", sim_shots, "measurement shots");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--table", sim_table, "calibration table JSON to reuse");

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate_cmd->parsed()) {
            return run_calibrate(cal_preset, cal_device_file, cal_shots, cal_seed,
                                 cal_seed_opt->count() > 0, cal_out);
        }
        if (sweep_cmd->parsed()) {
            if (sweep_out_opt->count() == 0 && sweep_format == "csv") sweep_out = "sweep.csv";
            return run_sweep_cmd(sweep_flags, sweep_out, sweep_format);
        }
        if (report_cmd->parsed()) {
            return run_report(report_rows, report_thresholds, report_out);
        }
        if (sim_cmd->parsed()) {
            return run_simulate_word(sim_len, sim_path, sim_opt_level, sim_preset,
                                     sim_device_file, sim_noise, sim_shots, sim_seed, sim_table);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
