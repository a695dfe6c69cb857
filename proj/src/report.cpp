#include "colrisk/report.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "colrisk/format.hpp"
#include "json.hpp"

namespace colrisk {

namespace {

constexpr const char* kHeader = "colrisk-report v1";

std::string join(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(',');
        out += full_precision(v[i]);
    }
    return out;
}

std::string join(const std::vector<uint64_t>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    size_t from = 0;
    for (size_t at; (at = s.find(sep, from)) != std::string::npos; from = at + 1)
        out.push_back(s.substr(from, at - from));
    out.push_back(s.substr(from));
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& f : split(s, ',')) out.push_back(std::stod(f));
    return out;
}

std::vector<uint64_t> parse_u64s(const std::string& s) {
    std::vector<uint64_t> out;
    for (const std::string& f : split(s, ',')) out.push_back(std::stoull(f));
    return out;
}

const char* mode_name(CampaignMode m) {
    return m == CampaignMode::all_vs_all ? "all_vs_all" : "inter_dataset";
}

CampaignMode mode_from(const std::string& s) {
    if (s == "all_vs_all") return CampaignMode::all_vs_all;
    if (s == "inter_dataset") return CampaignMode::inter_dataset;
    throw std::runtime_error("report: unknown mode '" + s + "'");
}

} // namespace

Report Report::from_result(const CampaignResult& r, std::map<std::string, std::string> config,
                           std::string histogram_csv_path) {
    Report rep;
    rep.config = std::move(config);
    rep.mode = r.mode;
    rep.comparisons = r.comparisons;
    rep.thresholds = r.thresholds;
    rep.match_counts = r.match_counts;
    for (size_t i = 0; i < r.thresholds.size(); ++i) {
        ThresholdStat s = r.stat_at(i);
        rep.rates.push_back(s.rate);
        rep.ci_lo.push_back(s.ci95.lo);
        rep.ci_hi.push_back(s.ci95.hi);
    }
    rep.histogram_csv = std::move(histogram_csv_path);
    return rep;
}

void write_report(std::ostream& os, const Report& r) {
    os << kHeader << "\n";
    for (const auto& [k, v] : r.config) os << "config." << k << " = " << v << "\n";
    os << "mode = " << mode_name(r.mode) << "\n";
    os << "comparisons = " << r.comparisons << "\n";
    os << "thresholds = " << join(r.thresholds) << "\n";
    os << "match_counts = " << join(r.match_counts) << "\n";
    os << "rates = " << join(r.rates) << "\n";
    os << "ci_lo = " << join(r.ci_lo) << "\n";
    os << "ci_hi = " << join(r.ci_hi) << "\n";
    os << "histogram_csv = " << (r.histogram_csv.empty() ? "-" : r.histogram_csv) << "\n";
    os << "end\n";
}

Report parse_report(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kHeader)
        throw std::runtime_error("report: unrecognized header");
    Report r;
    bool closed = false;
    while (std::getline(is, line)) {
        if (line == "end") {
            closed = true;
            break;
        }
        size_t eq = line.find(" = ");
        if (eq == std::string::npos) throw std::runtime_error("report: malformed line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 3);
        if (key.rfind("config.", 0) == 0) r.config[key.substr(7)] = val;
        else if (key == "mode") r.mode = mode_from(val);
        else if (key == "comparisons") r.comparisons = std::stoull(val);
        else if (key == "thresholds") r.thresholds = parse_doubles(val);
        else if (key == "match_counts") r.match_counts = parse_u64s(val);
        else if (key == "rates") r.rates = parse_doubles(val);
        else if (key == "ci_lo") r.ci_lo = parse_doubles(val);
        else if (key == "ci_hi") r.ci_hi = parse_doubles(val);
        else if (key == "histogram_csv") r.histogram_csv = val == "-" ? "" : val;
        else throw std::runtime_error("report: unknown key '" + key + "'");
    }
    if (!closed) throw std::runtime_error("report: missing end marker");
    if (r.thresholds.size() != r.match_counts.size() || r.thresholds.size() != r.rates.size())
        throw std::runtime_error("report: inconsistent field lengths");
    return r;
}

std::string report_to_json(const Report& r) {
    nlohmann::json j;
    j["report"] = "colrisk";
    j["version"] = 1;
    j["config"] = r.config;
    j["mode"] = mode_name(r.mode);
    j["comparisons"] = r.comparisons;
    j["thresholds"] = r.thresholds;
    j["match_counts"] = r.match_counts;
    j["rates"] = r.rates;
    j["ci_lo"] = r.ci_lo;
    j["ci_hi"] = r.ci_hi;
    j["histogram_csv"] = r.histogram_csv;
    return j.dump(2);
}

void write_histogram_csv(std::ostream& os, const HdHistogram& h) {
    char edge[16];
    const auto& counts = h.counts();
    for (uint32_t b = 0; b < HdHistogram::kBins; ++b) {
        if (!counts[b]) continue;
        std::snprintf(edge, sizeof edge, "%.3f", b * 0.001);
        os << edge << "," << counts[b] << "\n";
    }
    os << "total," << h.total() << "\n";
}

HdHistogram parse_histogram_csv(std::istream& is) {
    HdHistogram h;
    std::string line;
    bool closed = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("histogram csv: malformed line '" + line + "'");
        std::string head = line.substr(0, comma);
        uint64_t count = std::stoull(line.substr(comma + 1));
        if (head == "total") {
            if (count != h.total()) throw std::runtime_error("histogram csv: total mismatch");
            closed = true;
            break;
        }
        uint32_t bin = static_cast<uint32_t>(std::llround(std::stod(head) * 1000.0));
        h.add_binned(bin, count);
    }
    if (!closed) throw std::runtime_error("histogram csv: missing total row");
    return h;
}

} // namespace colrisk
