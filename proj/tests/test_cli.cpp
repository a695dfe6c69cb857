#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "colrisk/cli.hpp"
#include "colrisk/fmr.hpp"
#include "colrisk/format.hpp"
#include "colrisk/harness.hpp"
#include "colrisk/report.hpp"

using namespace colrisk;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "collision");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "colrisk_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// first non-comment line starting with the prefix
std::string data_line(const std::string& text, const std::string& prefix) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(prefix, 0) == 0 && line[0] != '#') return line;
    return {};
}

std::vector<std::string> body_lines(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> out;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("tables birthday renders the capacity ladder") {
    fs::path f = scratch("birthday.csv");
    CHECK(run({"tables", "birthday", "--format", "csv", "--output", f.string()}) == 0);
    std::string text = slurp(f);
    CHECK(text.rfind("# colrisk tables birthday", 0) == 0);
    CHECK(text.find("# format = csv") != std::string::npos);
    CHECK(data_line(text, "1e-06") == "1e-06,1178,\"1,178\"");
    CHECK(data_line(text, "1e-12").rfind("1e-12,1177411,", 0) == 0);
    CHECK(data_line(text, "1e-12").find("1,177,411") != std::string::npos);

    // the global options also work in prefix position (fallthrough)
    fs::path f2 = scratch("birthday.txt");
    CHECK(run({"--format", "text", "--output", f2.string(), "tables", "birthday"}) == 0);
    std::string t2 = slurp(f2);
    CHECK(t2.find("1,177,411") != std::string::npos);
    CHECK(t2.find("critical population") != std::string::npos);
}

TEST_CASE("tables fmr with a fixed rotation count matches the library") {
    fs::path f = scratch("fmr.json");
    CHECK(run({"tables", "fmr", "--rotations", "7", "--format", "json", "--output",
               f.string()}) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(f));
    CHECK(j["command"] == "tables fmr");
    CHECK(j["config"]["entropy"] == "245");
    CHECK(j["config"]["rotations"] == "7");
    bool found = false;
    for (const auto& row : j["rows"]) {
        if (row["threshold"].get<double>() != 0.33) continue;
        found = true;
        double want = std::exp(rotation_adjusted_fmr(raw_tail_fmr(245, 0.33), 7));
        CHECK(row["fmr"].get<double>() == doctest::Approx(want).epsilon(1e-12));
        CHECK(row["rendered"].get<std::string>() == format_one_in(want));
        CHECK(row["rendered"].get<std::string>().find("million") != std::string::npos);
    }
    CHECK(found);
    CHECK(j["rows"].size() == 9);
}

TEST_CASE("tables fmr calibrates its rotation count by default") {
    fs::path f = scratch("fmr_cal.json");
    CHECK(run({"tables", "fmr", "--format", "json", "--output", f.string()}) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(f));
    CHECK(j["config"]["rotations"] == "8 (calibrated)");
    for (const auto& row : j["rows"]) {
        double ratio = row["ratio_to_reference"].get<double>();
        CHECK(ratio > 0.2);
        CHECK(ratio < 5.0);
    }
}

TEST_CASE("tables capacity agrees with enrollable_population") {
    fs::path f = scratch("capacity.csv");
    CHECK(run({"tables", "capacity", "--format", "csv", "--output", f.string()}) == 0);
    std::string text = slurp(f);
    CHECK(body_lines(text).size() == 11);  // header row + 10 cells
    CapacityResult want = enrollable_population(245, OperatingPoint{0.28, 9, Eyes::monocular});
    std::string row = data_line(text, "245,0.28,");
    REQUIRE(!row.empty());
    CHECK(row.find("245,0.28," + std::to_string(want.critical_population)) == 0);
}

TEST_CASE("generate emits decodable deterministic hex codes") {
    fs::path f = scratch("gen.txt");
    std::vector<std::string> cmd{"generate", "--count", "3",     "--seed",   "5",
                                 "--rho-a",  "0.92",    "--rho-r", "0.62",   "--output",
                                 f.string()};
    CHECK(run(cmd) == 0);
    std::string text = slurp(f);
    std::vector<std::string> lines = body_lines(text);
    REQUIRE(lines.size() == 3);
    GeneratorParams p;
    p.geometry = default_geometry();
    p.angular_persistence = 0.92;
    p.radial_copy = 0.62;
    p.seed = 5;
    for (uint64_t i = 0; i < 3; ++i) {
        CHECK(lines[i].size() == 1024);  // 2048 bits -> 512 + 512 hex digits
        CHECK(decode_hex(lines[i], default_geometry()) == generate_code(p, i));
    }
    CHECK(run(cmd) == 0);
    CHECK(slurp(f) == text);  // byte-identical replay

    fs::path fm = scratch("gen_masked.txt");
    CHECK(run({"generate", "--count", "1", "--seed", "5", "--rho-a", "0.92", "--rho-r", "0.62",
               "--mask-model", "arcs", "--occlusion", "0.15", "--output", fm.string()}) == 0);
    IrisCode masked = decode_hex(body_lines(slurp(fm))[0], default_geometry());
    CHECK(!masked.full_mask());
}

TEST_CASE("estimate recovers entropy from a score file") {
    fs::path scores = scratch("scores.csv");
    {
        std::ofstream out(scores);
        out << "# fractional hd scores\n";
        for (int i = 0; i < 1000; ++i) out << "0.5331\n0.4669\n";
    }
    fs::path f = scratch("estimate.json");
    CHECK(run({"estimate", "--input", scores.string(), "--format", "json", "--output",
               f.string()}) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(f));
    CHECK(j["entropy_bits"] == 228);
    CHECK(j["mean_p"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(j["sigma"].get<double>() == doctest::Approx(0.0331).epsilon(1e-9));
    CHECK(j["config"]["scores"] == "2000");

    fs::path ft = scratch("estimate.txt");
    CHECK(run({"estimate", "--input", scores.string(), "--output", ft.string()}) == 0);
    CHECK(slurp(ft).find("entropy: 228 bits") != std::string::npos);

    // degenerate inputs are runtime failures, not crashes
    fs::path few = scratch("few.csv");
    std::ofstream(few) << "0.5\n0.6\n";
    CHECK(run({"estimate", "--input", few.string()}) == 1);
    fs::path bad = scratch("bad.csv");
    {
        std::ofstream out(bad);
        for (int i = 0; i < 1200; ++i) out << "1.5\n";
    }
    CHECK(run({"estimate", "--input", bad.string()}) == 1);
}

TEST_CASE("simulate all-vs-all matches a direct library run") {
    fs::path out = scratch("sim.csv"), rep = scratch("sim.report"), hist = scratch("sim.hist");
    CHECK(run({"simulate", "--mode", "all", "--size", "40", "--seed", "9", "--rho-a", "0.92",
               "--rho-r", "0.62", "--threshold", "0.33", "--threshold", "0.45", "--rotations",
               "5", "--format", "csv", "--output", out.string(), "--report", rep.string(),
               "--histogram-csv", hist.string()}) == 0);

    CohortSpec spec;
    spec.size = 40;
    spec.generator.geometry = default_geometry();
    spec.generator.angular_persistence = 0.92;
    spec.generator.radial_copy = 0.62;
    spec.generator.seed = 9;
    OperatingPoint op{0.33, 5, Eyes::monocular};
    CampaignResult want =
        run_all_vs_all_range(materialize_cohort(spec), op, {0.33, 0.45}, 0, 780);

    std::string text = slurp(out);
    CHECK(text.find("# mode = all") != std::string::npos);
    for (size_t t = 0; t < 2; ++t) {
        std::string line = data_line(text, full_precision(want.thresholds[t]) + ",");
        REQUIRE(!line.empty());
        ThresholdStat s = want.stat_at(t);
        std::ostringstream expect;
        expect << full_precision(want.thresholds[t]) << "," << s.matches << ","
               << want.comparisons << "," << full_precision(s.rate) << ","
               << full_precision(s.ci95.lo) << "," << full_precision(s.ci95.hi);
        CHECK(line == expect.str());
    }

    // structured report round trip
    std::ifstream rin(rep);
    Report r = parse_report(rin);
    CHECK(r.comparisons == want.comparisons);
    CHECK(r.thresholds == want.thresholds);
    CHECK(r.match_counts == want.match_counts);
    CHECK(r.mode == CampaignMode::all_vs_all);
    CHECK(r.config.at("mode") == "all");
    CHECK(r.config.at("size") == "40");
    CHECK(r.histogram_csv == hist.string());

    // histogram CSV reproduces the binned counts
    std::ifstream hin(hist);
    HdHistogram h = parse_histogram_csv(hin);
    CHECK(h.counts() == want.histogram.counts());
    CHECK(h.total() == want.comparisons);

    // json output carries the same numbers
    fs::path jf = scratch("sim.json");
    CHECK(run({"simulate", "--mode", "all", "--size", "40", "--seed", "9", "--rho-a", "0.92",
               "--rho-r", "0.62", "--threshold", "0.33", "--threshold", "0.45", "--rotations",
               "5", "--format", "json", "--output", jf.string()}) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(jf));
    CHECK(j["comparisons"].get<uint64_t>() == want.comparisons);
    CHECK(j["match_counts"][0].get<uint64_t>() == want.match_counts[0]);
}

TEST_CASE("simulate inter-dataset wires both cohorts through") {
    fs::path out = scratch("inter.csv");
    CHECK(run({"simulate", "--mode", "inter", "--size", "25", "--probe-size", "18", "--seed",
               "3", "--probe-seed", "4", "--rho-a", "0.9", "--rho-r", "0.5", "--threshold",
               "0.36", "--rotations", "7", "--format", "csv", "--output", out.string()}) == 0);
    std::string text = slurp(out);
    CHECK(text.find("# probe_size = 18") != std::string::npos);
    std::string line = data_line(text, full_precision(0.36) + ",");
    REQUIRE(!line.empty());
    CHECK(line.find(",450,") != std::string::npos);  // 25 x 18 ordered pairs

    // same seed for both cohorts is rejected downstream -> runtime failure
    CHECK(run({"simulate", "--mode", "inter", "--size", "10", "--seed", "3", "--probe-seed",
               "3", "--rho-a", "0.9", "--rho-r", "0.5"}) == 1);
}

TEST_CASE("simulate honors the comparison cap") {
    // 200k codes would be 2e10 pairings, over the default desk-scale cap;
    // the guard fires before any generation work
    CHECK(run({"simulate", "--mode", "all", "--size", "200000", "--rho-a", "0.9", "--rho-r",
               "0.5"}) == 1);
    CHECK(run({"simulate", "--mode", "all", "--size", "50", "--rho-a", "0.9", "--rho-r", "0.5",
               "--max-comparisons", "100"}) == 1);
    fs::path out = scratch("forced.csv");
    CHECK(run({"simulate", "--mode", "all", "--size", "50", "--rho-a", "0.9", "--rho-r", "0.5",
               "--max-comparisons", "100", "--force", "--format", "csv", "--output",
               out.string()}) == 0);
    CHECK(data_line(slurp(out), full_precision(0.32) + ",").find(",1225,") !=
          std::string::npos);
}

TEST_CASE("simulate accepts hex code files as cohorts") {
    fs::path codes = scratch("cohort.hex");
    CHECK(run({"generate", "--count", "12", "--seed", "31", "--rho-a", "0.92", "--rho-r",
               "0.62", "--output", codes.string()}) == 0);
    fs::path out = scratch("fromfile.csv");
    CHECK(run({"simulate", "--mode", "all", "--input", codes.string(), "--threshold", "0.4",
               "--rotations", "3", "--format", "csv", "--output", out.string()}) == 0);
    std::string text = slurp(out);
    CHECK(text.find("# codes = 12") != std::string::npos);
    CHECK(data_line(slurp(out), full_precision(0.4) + ",").find(",66,") != std::string::npos);
}

TEST_CASE("calibrate subcommand reports solved persistences") {
    fs::path f = scratch("cal.csv");
    CHECK(run({"calibrate", "--entropy", "245", "--format", "csv", "--output", f.string()}) ==
          0);
    std::string text = slurp(f);
    std::string row = body_lines(text).back();
    double rho_a = 0.0, rho_r = 0.0;
    REQUIRE(std::sscanf(row.c_str(), "%lf,%lf", &rho_a, &rho_r) == 2);
    CHECK(rho_a > 0.85);
    CHECK(rho_a < 0.97);
    CHECK(rho_r == doctest::Approx(0.621405).epsilon(1e-4));
}

TEST_CASE("exit codes distinguish usage from runtime failures") {
    CHECK(run({}) == 2);                       // a subcommand is required
    CHECK(run({"frobnicate"}) == 2);           // unknown subcommand
    CHECK(run({"estimate"}) == 2);             // missing required --input
    CHECK(run({"--help"}) == 0);
    CHECK(run({"tables", "birthday", "--format", "yaml"}) == 2);  // bad enum
    CHECK(run({"simulate", "--mode", "sideways", "--rho-a", "0.5", "--rho-r", "0"}) == 2);
    CHECK(run({"estimate", "--input", "/nonexistent/scores.csv"}) == 1);
    CHECK(run({"tables", "fmr", "--entropy", "0", "--rotations", "7"}) == 1);
    CHECK(run({"tables", "birthday", "--output", "/nonexistent-dir/out.txt"}) == 1);
}
