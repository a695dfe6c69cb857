#pragma once
#include <cstdint>
#include <map>
#include <vector>

#include "colrisk/fmr.hpp"
#include "colrisk/stats.hpp"
#include "colrisk/synthgen.hpp"

namespace colrisk {

struct CohortSpec {
    uint64_t size = 0;
    GeneratorParams generator{};
    // subjects enrolled twice under distinct identities: the last `duplicates`
    // entries are low-noise mated copies of the first `duplicates` codes
    uint64_t duplicates = 0;

    void validate() const;
};

enum class CampaignMode { all_vs_all, inter_dataset };

struct ThresholdStat {
    uint64_t matches = 0;
    double rate = 0.0;
    PoissonCi ci95{0.0, 0.0};  // on the rate
};

struct CampaignResult {
    CampaignMode mode = CampaignMode::all_vs_all;
    uint64_t comparisons = 0;
    HdHistogram histogram;
    std::vector<double> thresholds;
    std::vector<uint64_t> match_counts;  // parallel to thresholds
    OperatingPoint op{0.5, 1, Eyes::monocular};

    ThresholdStat stat_at(size_t i) const;
    void finalize();  // recompute rates/history after merges
};

struct CampaignLimits {
    uint64_t max_comparisons = 10'000'000'000ull;  // desk-scale cap
    bool override_cap = false;
    uint32_t shards = 1;   // evaluated serially or via threads; result identical
    uint32_t threads = 1;
};

// Every unordered pair exactly once (canonical row-major upper triangle).
CampaignResult run_all_vs_all(const CohortSpec& cohort, const OperatingPoint& op,
                              const std::vector<double>& thresholds,
                              const CampaignLimits& limits = {});

// All N x M ordered pairs once; cohorts must have distinct seeds.
CampaignResult run_inter_dataset(const CohortSpec& gallery, const CohortSpec& probes,
                                 const OperatingPoint& op,
                                 const std::vector<double>& thresholds,
                                 const CampaignLimits& limits = {});

struct ContaminationReport {
    double measured_fmr = 0.0;
    double floor = 0.0;        // 2 / size^2
    uint64_t matches = 0;
    uint64_t comparisons = 0;
};

// Plants `duplicates` twice-enrolled subjects (mated copies at noise 0.10) in
// an all-vs-all campaign and reports the measured FMR against the 2/N^2 floor.
ContaminationReport contamination_experiment(uint64_t size, uint64_t duplicates,
                                             const OperatingPoint& op, double threshold);

// Bin-wise and count-wise sums; associative and commutative. Modes,
// thresholds and operating points must agree.
CampaignResult merge_results(const CampaignResult& a, const CampaignResult& b);

// Shard interface used internally and by the determinism tests: runs the
// contiguous pair-index range [begin, end) of the canonical enumeration.
CampaignResult run_all_vs_all_range(const std::vector<IrisCode>& codes,
                                    const OperatingPoint& op,
                                    const std::vector<double>& thresholds,
                                    uint64_t begin, uint64_t end);
CampaignResult run_inter_dataset_range(const std::vector<IrisCode>& gallery,
                                       const std::vector<IrisCode>& probes,
                                       const OperatingPoint& op,
                                       const std::vector<double>& thresholds,
                                       uint64_t begin, uint64_t end);

// Cohort materialization (exposed for tests/CLI): index i < size-duplicates
// is generate_code(gen, i); entry size-duplicates+j re-enrolls subject j as a
// mated copy at noise 0.10.
std::vector<IrisCode> materialize_cohort(const CohortSpec& spec);

} // namespace colrisk
