#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <doctest.h>

#include "modpulse/experiment.hpp"

using namespace modpulse;

namespace {

const CalibrationTable& shared_table() {
    static const CalibrationTable table = [] {
        RabiScanConfig scan = default_rabi_scan();
        scan.shots_per_point = 0;
        return calibrate(noiseless(jakarta_average()), scan).table;
    }();
    return table;
}

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.max_len = 110;
    return config;
}

std::vector<SweepRow> synthetic_rows(std::int64_t max_len,
                                     double (*error_of)(std::int64_t)) {
    ExperimentConfig config;
    config.max_len = max_len;
    std::vector<SweepRow> rows;
    for (PulsePath path : {PulsePath::kDefaultDrag, PulsePath::kCustomSquare}) {
        for (std::int64_t w : enumerate_word_lengths(config)) {
            SweepRow row;
            row.word_len = w;
            row.path = path;
            row.residue = static_cast<int>(w % 11);
            row.abs_error_exact = error_of(w);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace

TEST_CASE("word length enumeration") {
    SUBCASE("defaults give 182 lengths") {
        const auto lengths = enumerate_word_lengths(ExperimentConfig{});
        CHECK(lengths.size() == 182);
        int zeros = 0, threes = 0;
        for (auto w : lengths) {
            if (w % 11 == 0) ++zeros;
            if (w % 11 == 3) ++threes;
        }
        CHECK(zeros == 91);
        CHECK(threes == 91);
        CHECK(lengths.front() == 0);
        CHECK(lengths.back() == 993);
    }
    SUBCASE("small enumeration") {
        ExperimentConfig config;
        config.residues = {0};
        config.max_len = 22;
        const auto lengths = enumerate_word_lengths(config);
        CHECK(lengths == std::vector<std::int64_t>{0, 11, 22});
    }
    SUBCASE("no residues, no lengths") {
        ExperimentConfig config;
        config.residues = {};
        CHECK(enumerate_word_lengths(config).empty());
    }
    SUBCASE("invalid residues rejected") {
        ExperimentConfig config;
        config.residues = {11};
        CHECK_THROWS_AS(enumerate_word_lengths(config), std::invalid_argument);
    }
}

TEST_CASE("noise-free sweep has vanishing error") {
    ExperimentConfig config = small_config();
    config.noise = false;
    const auto rows = run_sweep(config, &shared_table());
    CHECK(rows.size() == 2 * enumerate_word_lengths(config).size());
    for (const auto& row : rows) {
        CHECK(row.abs_error_exact < 1e-6);
        if (row.residue == 0) CHECK(row.expected_prob == 1.0);
        const double per_symbol =
            row.path == PulsePath::kDefaultDrag ? 320.0 : 80.0;
        CHECK(row.latency_ns ==
              doctest::Approx(per_symbol * 0.22222 * static_cast<double>(row.word_len))
                  .epsilon(1e-12));
    }
}

TEST_CASE("sweep rows are deterministic and canonically ordered") {
    ExperimentConfig config = small_config();
    const auto a = run_sweep(config, &shared_table());
    const auto b = run_sweep(config, &shared_table());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].word_len == b[i].word_len);
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].exact_prob == b[i].exact_prob);
        CHECK(a[i].shot_prob == b[i].shot_prob);
    }
    for (std::size_t i = 1; i < a.size(); ++i) {
        const bool ordered =
            static_cast<int>(a[i - 1].path) < static_cast<int>(a[i].path) ||
            (a[i - 1].path == a[i].path && a[i - 1].word_len <= a[i].word_len);
        CHECK(ordered);
    }
}

TEST_CASE("noisy sweep: square dominates drag and shots track populations") {
    ExperimentConfig config = small_config();
    const auto rows = run_sweep(config, &shared_table());

    std::map<std::int64_t, double> drag_error, square_error;
    int within_bound = 0, total = 0;
    for (const auto& row : rows) {
        (row.path == PulsePath::kDefaultDrag ? drag_error : square_error)[row.word_len] =
            row.abs_error_exact;
        const double sigma =
            std::sqrt(std::max(row.exact_prob * (1.0 - row.exact_prob), 1e-6) / 1024.0);
        const double readout_inflation = 0.0166;
        if (std::abs(row.shot_prob - row.exact_prob) <= 4.0 * sigma + readout_inflation) {
            ++within_bound;
        }
        ++total;
    }
    for (const auto& [w, err] : square_error) {
        CHECK(err <= drag_error.at(w) + 1e-9);
    }
    CHECK(within_bound >= (total * 99) / 100);

    // error grows with word length for every (path, residue) series
    for (PulsePath path : {PulsePath::kDefaultDrag, PulsePath::kCustomSquare}) {
        for (int residue : {0, 3}) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, n = 0.0;
            for (const auto& row : rows) {
                if (row.path != path || row.residue != residue) continue;
                const auto x = static_cast<double>(row.word_len);
                sx += x;
                sy += row.abs_error_exact;
                sxx += x * x;
                sxy += x * row.abs_error_exact;
                n += 1.0;
            }
            CHECK((n * sxy - sx * sy) / (n * sxx - sx * sx) > 0.0);
        }
    }
}

TEST_CASE("replications use the per-date presets") {
    ExperimentConfig config;
    config.max_len = 22;
    config.residues = {0};
    config.replications = 2;
    config.paths = {PulsePath::kCustomSquare};
    const auto rows = run_sweep(config, &shared_table());
    CHECK(rows.size() == 6);  // 3 lengths x 2 replications
    double rep0 = 0.0, rep1 = 0.0;
    for (const auto& row : rows) {
        if (row.word_len != 22) continue;
        (row.replication == 0 ? rep0 : rep1) = row.exact_prob;
    }
    // different T1/T2 per replication date move the populations
    CHECK(rep0 != rep1);
}

TEST_CASE("threshold table") {
    SUBCASE("noise-free rows never trip") {
        const auto rows = synthetic_rows(1000, [](std::int64_t) { return 0.0; });
        const auto report = threshold_table(rows);
        REQUIRE(report.entries.size() == 8);  // 2 paths x 2 residues x 2 thresholds
        for (const auto& e : report.entries) {
            CHECK(e.unbounded);
        }
        CHECK(report.sweep_max_len == 993);
    }
    SUBCASE("linear synthetic error trips at the expected lengths") {
        const auto rows = synthetic_rows(
            1000, [](std::int64_t w) { return static_cast<double>(w) / 1000.0; });
        const auto report = threshold_table(rows);
        for (const auto& e : report.entries) {
            CHECK_FALSE(e.unbounded);
            if (e.residue == 0 && e.threshold == 0.10) CHECK(e.max_word_len == 99);
            if (e.residue == 3 && e.threshold == 0.10) CHECK(e.max_word_len == 91);
            if (e.residue == 0 && e.threshold == 0.20) CHECK(e.max_word_len == 198);
            if (e.residue == 3 && e.threshold == 0.20) CHECK(e.max_word_len == 190);
        }
    }
    SUBCASE("20% threshold length never falls below the 10% one") {
        const auto rows = synthetic_rows(1000, [](std::int64_t w) {
            return 0.3 * std::abs(std::sin(static_cast<double>(w) / 50.0));
        });
        const auto report = threshold_table(rows);
        std::map<std::pair<int, int>, std::int64_t> at10, at20;
        for (const auto& e : report.entries) {
            const auto key = std::make_pair(static_cast<int>(e.path), e.residue);
            (e.threshold == 0.10 ? at10 : at20)[key] =
                e.unbounded ? report.sweep_max_len + 1 : e.max_word_len;
        }
        for (const auto& [key, len10] : at10) {
            CHECK(at20.at(key) >= len10);
        }
    }
}

TEST_CASE("hardware reference table is available for juxtaposition") {
    const auto reference = jakarta_reference_table();
    REQUIRE(reference.size() == 8);
    // spot anchors from the published summary
    CHECK(reference[0].max_word_len == 66);
    CHECK(reference[3].max_word_len == 135);
    CHECK(reference[6].unbounded);
    const std::string text = format_threshold_report(threshold_table({}));
    CHECK(text.find("qiskit_default") != std::string::npos);
    CHECK(text.find(">1000") != std::string::npos);
}

TEST_CASE("emit_report") {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "modpulse_test";
    std::filesystem::create_directories(dir);

    SUBCASE("empty rows give a header-only CSV") {
        const auto path = dir / "empty.csv";
        emit_report({}, threshold_table({}), ReportFormat::kCsv, path);
        std::ifstream in(path);
        std::string line, rest;
        std::getline(in, line);
        CHECK(line ==
              "word_len,path,opt_level,residue,expected_prob,exact_prob,shot_prob,"
              "abs_error_exact,abs_error_shot,latency_ns,replication,seed");
        CHECK_FALSE(std::getline(in, rest));
    }
    SUBCASE("row counts and CSV shape") {
        ExperimentConfig config;
        config.max_len = 55;
        config.residues = {0, 3};
        const auto rows = run_sweep(config, &shared_table());
        CHECK(rows.size() == 22);  // 11 lengths x 2 paths
        const auto path = dir / "rows.csv";
        emit_report(rows, threshold_table(rows), ReportFormat::kCsv, path, &config);
        std::ifstream in(path);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 23);
    }
    SUBCASE("JSON round trips rows exactly") {
        ExperimentConfig config;
        config.max_len = 33;
        const auto rows = run_sweep(config, &shared_table());
        const auto path = dir / "rows.json";
        emit_report(rows, threshold_table(rows), ReportFormat::kJson, path, &config);

        std::ifstream in(path);
        nlohmann::json doc;
        in >> doc;
        const auto back = rows_from_json(doc.at("rows"));
        REQUIRE(back.size() == rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(std::abs(back[i].exact_prob - rows[i].exact_prob) < 1e-9);
            CHECK(std::abs(back[i].shot_prob - rows[i].shot_prob) < 1e-9);
            CHECK(back[i].seed == rows[i].seed);
            CHECK(back[i].word_len == rows[i].word_len);
        }
        CHECK(doc.at("config").at("max_len").get<std::int64_t>() == 33);
        CHECK(doc.at("thresholds").contains("hardware_reference"));
    }
    SUBCASE("unwritable destination is surfaced with the path") {
        CHECK_THROWS_WITH_AS(
            emit_report({}, threshold_table({}), ReportFormat::kCsv, "/nonexistent/dir/x.csv"),
            doctest::Contains("/nonexistent/dir/x.csv"), std::runtime_error);
    }
}

TEST_CASE("config JSON") {
    ExperimentConfig config;
    config.p = 7;
    config.residues = {0, 2};
    config.noise = false;
    config.paths = {PulsePath::kCustomSquare};
    config.seed = 77;

    const nlohmann::json doc = config_to_json(config);
    CHECK(doc.at("noise") == "off");
    const ExperimentConfig back = config_from_json(doc);
    CHECK(back.p == 7);
    CHECK(back.residues == std::vector<int>{0, 2});
    CHECK_FALSE(back.noise);
    CHECK(back.paths.size() == 1);
    CHECK(back.seed == 77);

    // overrides apply on top of an existing base
    ExperimentConfig base;
    base.shots = 256;
    const ExperimentConfig merged =
        config_from_json(nlohmann::json{{"max_len", 50}}, base);
    CHECK(merged.max_len == 50);
    CHECK(merged.shots == 256);

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"noise", "maybe"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(pulse_path_from_string("diagonal"), std::invalid_argument);
}

TEST_CASE("sweep failures name the word length and path") {
    ExperimentConfig config;
    config.max_len = 11;
    DeviceModel device = jakarta_average();
    device.constraints.granularity_dt = 7;  // calibrated pulses no longer fit the grid
    config.device = device;
    CHECK_THROWS_WITH_AS(run_sweep(config, &shared_table()),
                         doctest::Contains("word length"), std::runtime_error);
}

TEST_CASE("level-1 sweep is flat under noise") {
    ExperimentConfig config;
    config.max_len = 220;
    config.opt_level = 1;
    const auto rows = run_sweep(config, &shared_table());
    double lo = 1.0, hi = 0.0;
    for (const auto& row : rows) {
        lo = std::min(lo, row.abs_error_exact);
        hi = std::max(hi, row.abs_error_exact);
    }
    CHECK(hi - lo < 0.02);
}
