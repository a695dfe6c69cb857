#pragma once
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "colrisk/harness.hpp"

namespace colrisk {

// Versioned structured-text campaign report. All floating-point fields are
// written with %.17g so a parse round-trip reproduces them exactly.
struct Report {
    std::map<std::string, std::string> config;  // effective configuration echo
    CampaignMode mode = CampaignMode::all_vs_all;
    uint64_t comparisons = 0;
    std::vector<double> thresholds;
    std::vector<uint64_t> match_counts;
    std::vector<double> rates;
    std::vector<double> ci_lo, ci_hi;
    std::string histogram_csv;  // path reference ("" = not written)

    static Report from_result(const CampaignResult& r,
                              std::map<std::string, std::string> config,
                              std::string histogram_csv_path);
};

void write_report(std::ostream& os, const Report& r);
Report parse_report(std::istream& is);

// json rendering of the same report (nlohmann::json under the hood)
std::string report_to_json(const Report& r);

// Histogram CSV: "bin_lower,count" rows for nonzero bins plus a
// "total,<comparisons>" trailer.
void write_histogram_csv(std::ostream& os, const HdHistogram& h);
HdHistogram parse_histogram_csv(std::istream& is);

} // namespace colrisk
