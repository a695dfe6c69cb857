#include "colrisk/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "colrisk/birthday.hpp"
#include "colrisk/fmr.hpp"
#include "colrisk/format.hpp"
#include "colrisk/harness.hpp"
#include "colrisk/report.hpp"
#include "colrisk/stats.hpp"
#include "colrisk/synthgen.hpp"

namespace colrisk {

namespace {

// reference rows the calibrated defaults aim to reproduce
const std::vector<std::pair<double, double>> kFmrReference = {
    {0.36, 1.0 / 24e3},   {0.35, 1.0 / 110e3}, {0.34, 1.0 / 556e3},
    {0.33, 1.0 / 3.1e6},  {0.32, 1.0 / 20e6},  {0.31, 1.0 / 137e6},
    {0.30, 1.0 / 1.1e9},  {0.29, 1.0 / 9e9},   {0.28, 1.0 / 92e9},
};

struct CapacityCell {
    uint32_t entropy;
    double threshold;
    double persons;
};

const std::vector<CapacityCell> kCapacityReference = {
    {225, 0.28, 134e3},  {225, 0.24, 16e6},  {235, 0.28, 222e3}, {235, 0.24, 32e6},
    {245, 0.28, 370e3},  {245, 0.24, 66e6},  {255, 0.28, 615e3}, {255, 0.24, 136e6},
    {265, 0.28, 1.02e6}, {265, 0.24, 278e6},
};

enum class OutFormat { text, csv, json };

OutFormat parse_format(const std::string& s) {
    if (s == "text") return OutFormat::text;
    if (s == "csv") return OutFormat::csv;
    if (s == "json") return OutFormat::json;
    throw CLI::ValidationError("--format", "must be text, csv or json");
}

const char* format_name(OutFormat f) {
    return f == OutFormat::text ? "text" : f == OutFormat::csv ? "csv" : "json";
}

// ordered effective-configuration echo carried into every output
using Config = std::vector<std::pair<std::string, std::string>>;

Config base_config(OutFormat fmt, const std::string& out_path) {
    return {{"format", format_name(fmt)}, {"output", out_path.empty() ? "stdout" : out_path}};
}

void echo_header(std::ostream& os, const std::string& command, const Config& cfg) {
    os << "# colrisk " << command << "\n";
    for (const auto& [k, v] : cfg) os << "# " << k << " = " << v << "\n";
}

nlohmann::json config_json(const std::string& command, const Config& cfg) {
    nlohmann::json j;
    j["command"] = command;
    auto& c = j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : cfg) c[k] = v;
    return j;
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

struct Sink {
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
    }
    std::ostream& out() { return file.is_open() ? file : std::cout; }
    std::ofstream file;
};

std::vector<double> read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
    std::vector<double> scores;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t pos = 0;
        double v = std::stod(line, &pos);
        scores.push_back(v);
    }
    return scores;
}

std::vector<IrisCode> read_codes(const std::string& path, CodeGeometry geom) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open code file '" + path + "'");
    std::vector<IrisCode> codes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        codes.push_back(decode_hex(line, geom));
    }
    if (codes.empty()) throw std::runtime_error("code file '" + path + "' holds no codes");
    return codes;
}

// --- tables ------------------------------------------------------------------

void run_tables_birthday(const std::string& out_path, OutFormat fmt) {
    const double fmrs[] = {1e-3, 1e-4, 1e-5, 1e-6, 1e-9, 1e-12, 1e-15, 1e-18};
    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(fmt, out_path);
    if (fmt == OutFormat::json) {
        nlohmann::json j = config_json("tables birthday", cfg);
        auto& rows = j["rows"] = nlohmann::json::array();
        for (double f : fmrs) {
            CapacityResult r = critical_population_exact(f);
            rows.push_back({{"fmr", f},
                            {"critical_population", r.critical_population},
                            {"rendered", format_population(r.critical_population)}});
        }
        os << j.dump(2) << "\n";
        return;
    }
    echo_header(os, "tables birthday", cfg);
    if (fmt == OutFormat::csv) os << "fmr,critical_population,rendered\n";
    else os << "fmr          critical population\n";
    char buf[160];
    for (double f : fmrs) {
        CapacityResult r = critical_population_exact(f);
        std::string rendered = format_population(r.critical_population);
        if (fmt == OutFormat::csv) {
            std::snprintf(buf, sizeof buf, "%g,%llu,%s\n", f,
                          static_cast<unsigned long long>(r.critical_population),
                          csv_quote(rendered).c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%-12g %s\n", f, rendered.c_str());
        }
        os << buf;
    }
}

void run_tables_fmr(uint64_t entropy, uint32_t rotations, const std::string& out_path,
                    OutFormat fmt) {
    bool calibrated = rotations == 0;
    uint32_t k = rotations;
    std::vector<double> ratios;
    if (calibrated) {
        RotationCalibration cal = calibrate_rotation_count(entropy, kFmrReference);
        k = cal.k;
        ratios = cal.ratios;
    }
    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(fmt, out_path);
    cfg.emplace_back("entropy", std::to_string(entropy));
    cfg.emplace_back("rotations", std::to_string(k) + (calibrated ? " (calibrated)" : ""));

    auto row_pred = [&](double t) {
        return predict_fmr(entropy, OperatingPoint{t, k, Eyes::monocular});
    };
    if (fmt == OutFormat::json) {
        nlohmann::json j = config_json("tables fmr", cfg);
        auto& rows = j["rows"] = nlohmann::json::array();
        for (size_t i = 0; i < kFmrReference.size(); ++i) {
            double t = kFmrReference[i].first;
            FmrPrediction p = row_pred(t);
            nlohmann::json row{{"threshold", t},
                               {"ln_fmr", p.adjusted},
                               {"fmr", std::exp(p.adjusted)},
                               {"rendered", format_one_in(std::exp(p.adjusted))}};
            if (calibrated) row["ratio_to_reference"] = ratios[i];
            rows.push_back(row);
        }
        os << j.dump(2) << "\n";
        return;
    }
    echo_header(os, "tables fmr", cfg);
    if (fmt == OutFormat::csv) os << "threshold,ln_fmr,fmr,rendered\n";
    else os << "threshold   fmr            rendered\n";
    char buf[160];
    for (const auto& [t, unused] : kFmrReference) {
        (void)unused;
        FmrPrediction p = row_pred(t);
        double fmr = std::exp(p.adjusted);
        std::string rendered = format_one_in(fmr);
        if (fmt == OutFormat::csv)
            std::snprintf(buf, sizeof buf, "%.2f,%s,%.6g,%s\n", t,
                          full_precision(p.adjusted).c_str(), fmr, csv_quote(rendered).c_str());
        else
            std::snprintf(buf, sizeof buf, "%-11.2f %-14.4g %s\n", t, fmr, rendered.c_str());
        os << buf;
    }
}

void run_tables_capacity(uint32_t rotations, const std::string& out_path, OutFormat fmt) {
    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(fmt, out_path);
    cfg.emplace_back("rotations", std::to_string(rotations));
    auto cell = [&](const CapacityCell& c) {
        return enrollable_population(c.entropy,
                                     OperatingPoint{c.threshold, rotations, Eyes::monocular});
    };
    if (fmt == OutFormat::json) {
        nlohmann::json j = config_json("tables capacity", cfg);
        auto& rows = j["rows"] = nlohmann::json::array();
        for (const CapacityCell& c : kCapacityReference) {
            CapacityResult r = cell(c);
            rows.push_back({{"entropy", c.entropy},
                            {"threshold", c.threshold},
                            {"capacity", r.critical_population},
                            {"rendered", format_population(r.critical_population)}});
        }
        os << j.dump(2) << "\n";
        return;
    }
    echo_header(os, "tables capacity", cfg);
    if (fmt == OutFormat::csv) os << "entropy,threshold,capacity,rendered\n";
    else os << "entropy   threshold   enrollable persons\n";
    char buf[160];
    for (const CapacityCell& c : kCapacityReference) {
        CapacityResult r = cell(c);
        std::string rendered = format_population(r.critical_population);
        if (fmt == OutFormat::csv)
            std::snprintf(buf, sizeof buf, "%u,%.2f,%llu,%s\n", c.entropy, c.threshold,
                          static_cast<unsigned long long>(r.critical_population),
                          csv_quote(rendered).c_str());
        else
            std::snprintf(buf, sizeof buf, "%-9u %-11.2f %s\n", c.entropy, c.threshold,
                          rendered.c_str());
        os << buf;
    }
}

// --- generate / calibrate -------------------------------------------------------

GeneratorParams resolve_generator(uint32_t entropy, double rho_a, double rho_r, uint64_t seed,
                                  const std::string& mask_model, double occlusion,
                                  CodeGeometry geom) {
    GeneratorParams p;
    if (rho_a >= 0.0 || rho_r >= 0.0) {
        p.geometry = geom;
        p.angular_persistence = rho_a >= 0.0 ? rho_a : 0.0;
        p.radial_copy = rho_r >= 0.0 ? rho_r : 0.0;
    } else {
        p = calibrate_persistence(entropy, geom);
    }
    p.seed = seed;
    if (mask_model == "arcs") {
        p.mask_model = MaskModel::random_arcs;
        p.occlusion_fraction = occlusion;
    } else if (mask_model != "none") {
        throw CLI::ValidationError("--mask-model", "must be none or arcs");
    }
    p.validate();
    return p;
}

void generator_config(Config& cfg, const GeneratorParams& p) {
    cfg.emplace_back("rho_a", full_precision(p.angular_persistence));
    cfg.emplace_back("rho_r", full_precision(p.radial_copy));
    cfg.emplace_back("mask_model", p.mask_model == MaskModel::none ? "none" : "arcs");
    cfg.emplace_back("occlusion", full_precision(p.occlusion_fraction));
    cfg.emplace_back("rings", std::to_string(p.geometry.rings));
    cfg.emplace_back("angular", std::to_string(p.geometry.angular_positions));
}

void run_generate(uint32_t entropy, uint64_t count, uint64_t seed, double rho_a, double rho_r,
                  const std::string& mask_model, double occlusion, CodeGeometry geom,
                  const std::string& out_path) {
    GeneratorParams p = resolve_generator(entropy, rho_a, rho_r, seed, mask_model, occlusion, geom);
    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(OutFormat::text, out_path);
    cfg.emplace_back("entropy", std::to_string(entropy));
    cfg.emplace_back("count", std::to_string(count));
    cfg.emplace_back("seed", std::to_string(seed));
    generator_config(cfg, p);
    echo_header(os, "generate", cfg);
    for (uint64_t i = 0; i < count; ++i) os << encode_hex(generate_code(p, i)) << "\n";
}

void run_calibrate(uint32_t entropy, CodeGeometry geom, const std::string& out_path,
                   OutFormat fmt) {
    GeneratorParams p = calibrate_persistence(entropy, geom);
    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(fmt, out_path);
    cfg.emplace_back("entropy", std::to_string(entropy));
    cfg.emplace_back("rings", std::to_string(geom.rings));
    cfg.emplace_back("angular", std::to_string(geom.angular_positions));
    if (fmt == OutFormat::json) {
        nlohmann::json j = config_json("calibrate", cfg);
        j["rho_a"] = p.angular_persistence;
        j["rho_r"] = p.radial_copy;
        os << j.dump(2) << "\n";
        return;
    }
    echo_header(os, "calibrate", cfg);
    if (fmt == OutFormat::csv) {
        os << "rho_a,rho_r\n"
           << full_precision(p.angular_persistence) << "," << full_precision(p.radial_copy)
           << "\n";
        return;
    }
    os << "rho_a = " << full_precision(p.angular_persistence) << "\n";
    os << "rho_r = " << full_precision(p.radial_copy) << "\n";
}

// --- estimate --------------------------------------------------------------------

void run_estimate(const std::string& input, const std::string& out_path, OutFormat fmt) {
    std::vector<double> scores = read_scores(input);
    if (scores.size() < 1000)
        throw std::domain_error("estimate: insufficient data (< 1000 scores)");
    long double s1 = 0, s2 = 0;
    for (double v : scores) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("estimate: score outside [0,1]");
        s1 += v;
        s2 += static_cast<long double>(v) * v;
    }
    long double n = static_cast<long double>(scores.size());
    double mean = static_cast<double>(s1 / n);
    double var = static_cast<double>(s2 / n - (s1 / n) * (s1 / n));
    EntropyEstimate e = estimate_entropy(mean, std::sqrt(var));

    Sink sink(out_path);
    std::ostream& os = sink.out();
    Config cfg = base_config(fmt, out_path);
    cfg.emplace_back("input", input);
    cfg.emplace_back("scores", std::to_string(scores.size()));
    if (fmt == OutFormat::json) {
        nlohmann::json j = config_json("estimate", cfg);
        j["mean_p"] = e.mean_p;
        j["sigma"] = e.sigma;
        j["effective_bits"] = e.effective_bits;
        j["entropy_bits"] = e.reported_bits();
        os << j.dump(2) << "\n";
        return;
    }
    echo_header(os, "estimate", cfg);
    if (fmt == OutFormat::csv) {
        os << "mean_p,sigma,effective_bits,entropy_bits\n";
        os << full_precision(e.mean_p) << "," << full_precision(e.sigma) << ","
           << full_precision(e.effective_bits) << "," << e.reported_bits() << "\n";
        return;
    }
    os << "mean_p = " << full_precision(e.mean_p) << "\n";
    os << "sigma = " << full_precision(e.sigma) << "\n";
    os << "effective_bits = " << full_precision(e.effective_bits) << "\n";
    os << "entropy: " << e.reported_bits() << " bits\n";
}

// --- simulate --------------------------------------------------------------------

struct SimulateArgs {
    std::string mode = "all";
    uint64_t size = 1000, probe_size = 0;
    uint64_t seed = 1, probe_seed = 2;
    uint64_t duplicates = 0;
    uint32_t entropy = 245;
    double rho_a = -1.0, rho_r = -1.0;
    std::string mask_model = "none";
    double occlusion = 0.0;
    uint32_t rings = 8, angular = 256;
    std::vector<double> thresholds{0.32};
    uint32_t rotations = 7;
    uint64_t max_comparisons = 10'000'000'000ull;
    bool force = false;
    uint32_t shards = 1, threads = 1;
    std::string input, gallery, probes;
    std::string report_path, histogram_path, out_path;
    std::string format = "text";
};

void run_simulate(const SimulateArgs& a) {
    OutFormat fmt = parse_format(a.format);
    CodeGeometry geom{a.rings, a.angular};
    OperatingPoint op{a.thresholds.empty() ? 0.5 : a.thresholds.front(), a.rotations,
                      Eyes::monocular};
    op.validate();
    CampaignLimits limits;
    limits.max_comparisons = a.max_comparisons;
    limits.override_cap = a.force;
    limits.shards = a.shards;
    limits.threads = a.threads;

    Config cfg = base_config(fmt, a.out_path);
    cfg.emplace_back("mode", a.mode);
    CampaignResult result;
    bool from_files = !a.input.empty() || !a.gallery.empty();
    if (from_files) {
        cfg.emplace_back("rings", std::to_string(geom.rings));
        cfg.emplace_back("angular", std::to_string(geom.angular_positions));
        if (a.mode == "all") {
            if (a.input.empty()) throw CLI::ValidationError("--input", "required for --mode all");
            std::vector<IrisCode> codes = read_codes(a.input, geom);
            cfg.emplace_back("input", a.input);
            cfg.emplace_back("codes", std::to_string(codes.size()));
            uint64_t total = codes.size() * (codes.size() - 1) / 2;
            if (!a.force && total > limits.max_comparisons)
                throw std::domain_error("campaign exceeds the comparison cap");
            result = run_all_vs_all_range(codes, op, a.thresholds, 0, total);
        } else {
            if (a.gallery.empty() || a.probes.empty())
                throw CLI::ValidationError("--gallery/--probes", "required for --mode inter");
            std::vector<IrisCode> g = read_codes(a.gallery, geom);
            std::vector<IrisCode> p = read_codes(a.probes, geom);
            cfg.emplace_back("gallery", a.gallery);
            cfg.emplace_back("probes", a.probes);
            cfg.emplace_back("gallery_codes", std::to_string(g.size()));
            cfg.emplace_back("probe_codes", std::to_string(p.size()));
            uint64_t total = g.size() * p.size();
            if (!a.force && total > limits.max_comparisons)
                throw std::domain_error("campaign exceeds the comparison cap");
            result = run_inter_dataset_range(g, p, op, a.thresholds, 0, total);
        }
    } else {
        GeneratorParams gen = resolve_generator(a.entropy, a.rho_a, a.rho_r, a.seed, a.mask_model,
                                                a.occlusion, geom);
        cfg.emplace_back("entropy", std::to_string(a.entropy));
        generator_config(cfg, gen);
        CohortSpec cohort{a.size, gen, a.duplicates};
        cfg.emplace_back("size", std::to_string(a.size));
        cfg.emplace_back("seed", std::to_string(a.seed));
        cfg.emplace_back("duplicates", std::to_string(a.duplicates));
        if (a.mode == "all") {
            result = run_all_vs_all(cohort, op, a.thresholds, limits);
        } else if (a.mode == "inter") {
            GeneratorParams gen2 = gen;
            gen2.seed = a.probe_seed;
            CohortSpec probes{a.probe_size ? a.probe_size : a.size, gen2, 0};
            cfg.emplace_back("probe_size", std::to_string(probes.size));
            cfg.emplace_back("probe_seed", std::to_string(a.probe_seed));
            result = run_inter_dataset(cohort, probes, op, a.thresholds, limits);
        } else {
            throw CLI::ValidationError("--mode", "must be all or inter");
        }
    }
    cfg.emplace_back("rotations", std::to_string(op.rotation_trials));
    {
        std::string ts;
        for (size_t i = 0; i < a.thresholds.size(); ++i)
            ts += (i ? "," : "") + full_precision(a.thresholds[i]);
        cfg.emplace_back("thresholds", ts);
    }
    cfg.emplace_back("shards", std::to_string(a.shards));
    cfg.emplace_back("threads", std::to_string(a.threads));

    if (!a.histogram_path.empty()) {
        std::ofstream hf(a.histogram_path);
        if (!hf) throw std::runtime_error("cannot open '" + a.histogram_path + "'");
        write_histogram_csv(hf, result.histogram);
    }
    std::map<std::string, std::string> cfg_map(cfg.begin(), cfg.end());
    Report rep = Report::from_result(result, cfg_map, a.histogram_path);
    if (!a.report_path.empty()) {
        std::ofstream rf(a.report_path);
        if (!rf) throw std::runtime_error("cannot open '" + a.report_path + "'");
        write_report(rf, rep);
    }

    Sink sink(a.out_path);
    std::ostream& os = sink.out();
    if (fmt == OutFormat::json) {
        os << report_to_json(rep) << "\n";
        return;
    }
    if (fmt == OutFormat::csv) {
        echo_header(os, "simulate", cfg);
        os << "threshold,matches,comparisons,rate,ci_lo,ci_hi\n";
        for (size_t i = 0; i < result.thresholds.size(); ++i) {
            ThresholdStat s = result.stat_at(i);
            os << full_precision(result.thresholds[i]) << "," << s.matches << ","
               << result.comparisons << "," << full_precision(s.rate) << ","
               << full_precision(s.ci95.lo) << "," << full_precision(s.ci95.hi) << "\n";
        }
        return;
    }
    echo_header(os, "simulate", cfg);
    os << "comparisons = " << result.comparisons << "\n";
    for (size_t i = 0; i < result.thresholds.size(); ++i) {
        ThresholdStat s = result.stat_at(i);
        os << "threshold " << full_precision(result.thresholds[i]) << ": matches = " << s.matches
           << ", rate = " << full_precision(s.rate) << " [" << full_precision(s.ci95.lo) << ", "
           << full_precision(s.ci95.hi) << "]";
        if (s.rate > 0.0 && result.comparisons > 0) os << " (" << format_one_in(s.rate) << ")";
        os << "\n";
    }
    if (result.comparisons == 0) os << "no comparisons performed\n";
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"identity-collision risk modeling: synthetic iris-like codes, "
                 "Hamming-distance campaigns, binomial-tail FMR and birthday-bound capacity"};
    app.require_subcommand(1);
    std::string format = "text";
    std::string out_path;
    app.add_option("--format", format, "output format: text, csv, json")->capture_default_str();
    app.add_option("--output", out_path, "write output to file instead of stdout");

    // tables
    CLI::App* tables = app.add_subcommand("tables", "reproduce the reference tables");
    tables->require_subcommand(1);
    tables->fallthrough();
    CLI::App* t_birthday =
        tables->add_subcommand("birthday", "critical populations across FMR decades");
    t_birthday->fallthrough();
    uint64_t fmr_entropy = 245;
    uint32_t fmr_rotations = 0;
    CLI::App* t_fmr = tables->add_subcommand("fmr", "predicted FMR per HD threshold");
    t_fmr->fallthrough();
    t_fmr->add_option("--entropy", fmr_entropy, "effective entropy bits")->capture_default_str();
    t_fmr->add_option("--rotations", fmr_rotations,
                      "rotation trials k; 0 = calibrate against the reference rows")
        ->capture_default_str();
    t_fmr->add_flag_callback("--calibrated", [&] { fmr_rotations = 0; },
                             "calibrate k against the reference rows (default)");
    uint32_t cap_rotations = 9;
    CLI::App* t_capacity =
        tables->add_subcommand("capacity", "enrollable populations per entropy and threshold");
    t_capacity->fallthrough();
    t_capacity->add_option("--rotations", cap_rotations, "rotation trials k")
        ->capture_default_str();

    // generate
    CLI::App* gen = app.add_subcommand("generate", "emit synthetic codes in hex, one per line");
    gen->fallthrough();
    uint32_t g_entropy = 245;
    uint64_t g_count = 1, g_seed = 0;
    double g_rho_a = -1.0, g_rho_r = -1.0, g_occlusion = 0.0;
    std::string g_mask = "none";
    uint32_t g_rings = 8, g_angular = 256;
    gen->add_option("--entropy", g_entropy, "target effective entropy bits (calibrated)")
        ->capture_default_str();
    gen->add_option("--count", g_count, "number of codes")->capture_default_str();
    gen->add_option("--seed", g_seed, "generation seed")->capture_default_str();
    gen->add_option("--rho-a", g_rho_a, "explicit angular persistence (skips calibration)");
    gen->add_option("--rho-r", g_rho_r, "explicit radial copy probability (skips calibration)");
    gen->add_option("--mask-model", g_mask, "none or arcs")->capture_default_str();
    gen->add_option("--occlusion", g_occlusion, "occluded fraction for arcs")
        ->capture_default_str();
    gen->add_option("--rings", g_rings, "code rings")->capture_default_str();
    gen->add_option("--angular", g_angular, "angular positions per ring")->capture_default_str();

    // estimate
    CLI::App* est = app.add_subcommand("estimate",
                                       "effective entropy from a file of fractional HD scores");
    est->fallthrough();
    std::string est_input;
    est->add_option("--input", est_input, "CSV of fractional HD values, one per line")
        ->required();

    // simulate
    SimulateArgs sim;
    CLI::App* simc = app.add_subcommand("simulate", "run a comparison campaign");
    simc->fallthrough();
    simc->add_option("--mode", sim.mode, "all (all-vs-all) or inter (inter-dataset)")
        ->capture_default_str();
    simc->add_option("--size", sim.size, "cohort size")->capture_default_str();
    simc->add_option("--probe-size", sim.probe_size, "probe cohort size (inter; 0 = --size)")
        ->capture_default_str();
    simc->add_option("--seed", sim.seed, "cohort seed")->capture_default_str();
    simc->add_option("--probe-seed", sim.probe_seed, "probe cohort seed (inter)")
        ->capture_default_str();
    simc->add_option("--duplicates", sim.duplicates,
                     "subjects enrolled twice (mated copies at noise 0.10)")
        ->capture_default_str();
    simc->add_option("--entropy", sim.entropy, "target effective entropy bits (calibrated)")
        ->capture_default_str();
    simc->add_option("--rho-a", sim.rho_a, "explicit angular persistence (skips calibration)");
    simc->add_option("--rho-r", sim.rho_r, "explicit radial copy (skips calibration)");
    simc->add_option("--mask-model", sim.mask_model, "none or arcs")->capture_default_str();
    simc->add_option("--occlusion", sim.occlusion, "occluded fraction for arcs")
        ->capture_default_str();
    simc->add_option("--rings", sim.rings, "code rings")->capture_default_str();
    simc->add_option("--angular", sim.angular, "angular positions per ring")
        ->capture_default_str();
    simc->add_option("--threshold", sim.thresholds, "match threshold(s)")
        ->capture_default_str()
        ->expected(-1);
    simc->add_option("--rotations", sim.rotations, "rotation trials k (window = k/2)")
        ->capture_default_str();
    simc->add_option("--max-comparisons", sim.max_comparisons, "comparison cap")
        ->capture_default_str();
    simc->add_flag("--force", sim.force, "override the comparison cap");
    simc->add_option("--shards", sim.shards, "shard count")->capture_default_str();
    simc->add_option("--threads", sim.threads, "worker threads")->capture_default_str();
    simc->add_option("--input", sim.input, "hex code file (all-vs-all on file cohort)");
    simc->add_option("--gallery", sim.gallery, "hex code file: gallery cohort (inter)");
    simc->add_option("--probes", sim.probes, "hex code file: probe cohort (inter)");
    simc->add_option("--report", sim.report_path, "write structured report to file");
    simc->add_option("--histogram-csv", sim.histogram_path, "write histogram CSV to file");

    // calibrate
    CLI::App* cal = app.add_subcommand("calibrate", "solve persistences for a target entropy");
    cal->fallthrough();
    uint32_t c_entropy = 245, c_rings = 8, c_angular = 256;
    cal->add_option("--entropy", c_entropy, "target effective entropy bits")
        ->capture_default_str();
    cal->add_option("--rings", c_rings, "code rings")->capture_default_str();
    cal->add_option("--angular", c_angular, "angular positions per ring")->capture_default_str();

    try {
        app.parse(argc, argv);
        OutFormat fmt = parse_format(format);
        if (t_birthday->parsed()) run_tables_birthday(out_path, fmt);
        else if (t_fmr->parsed()) run_tables_fmr(fmr_entropy, fmr_rotations, out_path, fmt);
        else if (t_capacity->parsed()) run_tables_capacity(cap_rotations, out_path, fmt);
        else if (gen->parsed())
            run_generate(g_entropy, g_count, g_seed, g_rho_a, g_rho_r, g_mask, g_occlusion,
                         CodeGeometry{g_rings, g_angular}, out_path);
        else if (est->parsed()) run_estimate(est_input, out_path, fmt);
        else if (simc->parsed()) {
            sim.format = format;
            sim.out_path = out_path;
            run_simulate(sim);
        } else if (cal->parsed())
            run_calibrate(c_entropy, CodeGeometry{c_rings, c_angular}, out_path, fmt);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace colrisk
