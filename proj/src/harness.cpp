#include "colrisk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "colrisk/match.hpp"

namespace colrisk {

void CohortSpec::validate() const {
    if (size < 1) throw std::domain_error("cohort size must be >= 1");
    if (duplicates * 2 > size)
        throw std::domain_error("duplicates cannot exceed half the cohort");
    generator.validate();
}

std::vector<IrisCode> materialize_cohort(const CohortSpec& spec) {
    spec.validate();
    std::vector<IrisCode> codes;
    codes.reserve(spec.size);
    uint64_t base = spec.size - spec.duplicates;
    for (uint64_t i = 0; i < base; ++i) codes.push_back(generate_code(spec.generator, i));
    for (uint64_t j = 0; j < spec.duplicates; ++j)
        codes.push_back(generate_mated_pair(spec.generator, j, 0.10).second);
    return codes;
}

ThresholdStat CampaignResult::stat_at(size_t i) const {
    if (i >= thresholds.size()) throw std::out_of_range("threshold index out of range");
    ThresholdStat s;
    s.matches = match_counts[i];
    if (comparisons > 0) {
        s.rate = static_cast<double>(s.matches) / static_cast<double>(comparisons);
        PoissonCi ci = poisson_ci95(s.matches);
        s.ci95 = {ci.lo / static_cast<double>(comparisons),
                  ci.hi / static_cast<double>(comparisons)};
    }
    return s;
}

void CampaignResult::finalize() {
    if (thresholds.size() != match_counts.size())
        throw std::logic_error("campaign bookkeeping out of sync");
}

namespace {

constexpr uint64_t kContaminationSeed = 0xD0C5EEDull;

// Shared per-range accumulator. When every mask is full the campaign runs on
// an integer tally keyed by disagreeing-bit count and thresholds are applied
// afterwards with the same double comparison the per-pair path would use.
struct RangeAccum {
    HdHistogram hist;
    std::vector<uint64_t> matches;
    std::vector<uint64_t> tally;
    bool exact = false;
    uint32_t valid_bits = 0;
};

inline void score_pair(const MatchScore& s, const std::vector<double>& thresholds,
                       RangeAccum& acc) {
    if (acc.exact) {
        acc.tally[s.disagreeing_bits]++;
        return;
    }
    acc.hist.add_exact(s.disagreeing_bits, s.valid_bits, s.hd);
    for (size_t t = 0; t < thresholds.size(); ++t)
        if (s.hd <= thresholds[t]) acc.matches[t]++;
}

void flush(RangeAccum& acc, const std::vector<double>& thresholds, CampaignResult& res) {
    if (acc.exact) {
        acc.hist.add_exact_tally(acc.tally, acc.valid_bits);
        for (size_t t = 0; t < thresholds.size(); ++t) {
            uint64_t m = 0;
            for (uint32_t d = 0; d < acc.tally.size(); ++d)
                if (static_cast<double>(d) / acc.valid_bits <= thresholds[t]) m += acc.tally[d];
            acc.matches[t] = m;
        }
    }
    res.histogram = std::move(acc.hist);
    res.match_counts = std::move(acc.matches);
}

void check_uniform_geometry(const std::vector<IrisCode>& codes) {
    for (const auto& c : codes)
        if (!(c.geometry() == codes[0].geometry()))
            throw std::domain_error("cohort mixes geometries");
}

bool all_full_mask(const std::vector<IrisCode>& codes) {
    return std::all_of(codes.begin(), codes.end(),
                       [](const IrisCode& c) { return c.full_mask(); });
}

void check_cap(unsigned __int128 total, const CampaignLimits& limits) {
    if (total > static_cast<unsigned __int128>(~0ull))
        throw std::overflow_error("campaign size exceeds 2^64 comparisons");
    if (!limits.override_cap && total > limits.max_comparisons)
        throw std::domain_error("campaign exceeds the comparison cap; raise it explicitly");
}

CampaignResult run_sharded(uint64_t total, const CampaignLimits& limits,
                           const std::function<CampaignResult(uint64_t, uint64_t)>& shard_fn) {
    uint32_t shards = std::max(1u, limits.shards);
    auto bound = [&](uint32_t s) {
        return static_cast<uint64_t>(static_cast<unsigned __int128>(total) * s / shards);
    };
    std::vector<CampaignResult> parts(shards);
    if (limits.threads <= 1) {
        for (uint32_t s = 0; s < shards; ++s) parts[s] = shard_fn(bound(s), bound(s + 1));
    } else {
        std::atomic<uint32_t> next{0};
        auto worker = [&] {
            for (uint32_t s; (s = next.fetch_add(1)) < shards;)
                parts[s] = shard_fn(bound(s), bound(s + 1));
        };
        std::vector<std::thread> pool;
        uint32_t nthreads = std::min(limits.threads, shards);
        pool.reserve(nthreads);
        for (uint32_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    CampaignResult out = std::move(parts[0]);
    for (uint32_t s = 1; s < shards; ++s) out = merge_results(out, parts[s]);
    out.finalize();
    return out;
}

} // namespace

CampaignResult run_all_vs_all_range(const std::vector<IrisCode>& codes, const OperatingPoint& op,
                                    const std::vector<double>& thresholds, uint64_t begin,
                                    uint64_t end) {
    op.validate();
    if (codes.empty()) throw std::domain_error("empty cohort");
    check_uniform_geometry(codes);
    const uint64_t n = codes.size();
    unsigned __int128 total = static_cast<unsigned __int128>(n) * (n - 1) / 2;
    if (begin > end || static_cast<unsigned __int128>(end) > total)
        throw std::domain_error("pair range out of bounds");

    CampaignResult res;
    res.mode = CampaignMode::all_vs_all;
    res.op = op;
    res.thresholds = thresholds;
    res.comparisons = end - begin;

    RangeAccum acc;
    acc.matches.assign(thresholds.size(), 0);
    acc.exact = all_full_mask(codes);
    acc.valid_bits = codes[0].geometry().total_bits();
    if (acc.exact) acc.tally.assign(acc.valid_bits + 1, 0);
    if (begin == end) {
        flush(acc, thresholds, res);
        return res;
    }

    const uint32_t w = op.rotation_trials / 2;
    auto row_offset = [n](uint64_t i) {
        return static_cast<uint64_t>(static_cast<unsigned __int128>(i) * (2 * n - 1 - i) / 2);
    };
    // row of the first pair: largest i with row_offset(i) <= begin
    long double b = static_cast<long double>(2 * n - 1);
    uint64_t i = static_cast<uint64_t>(
        (b - std::sqrt(b * b - 8.0L * static_cast<long double>(begin))) / 2.0L);
    i = std::min(i, n - 2);
    while (row_offset(i + 1) <= begin) ++i;
    while (i > 0 && row_offset(i) > begin) --i;

    uint64_t q = begin;
    while (q < end) {
        uint64_t j = i + 1 + (q - row_offset(i));
        uint64_t stop = std::min(end, row_offset(i + 1));
        RotatedProbe probe(codes[i], w);
        for (; q < stop; ++j, ++q) score_pair(probe.min_against(codes[j]), thresholds, acc);
        ++i;
    }
    flush(acc, thresholds, res);
    res.finalize();
    return res;
}

CampaignResult run_inter_dataset_range(const std::vector<IrisCode>& gallery,
                                       const std::vector<IrisCode>& probes,
                                       const OperatingPoint& op,
                                       const std::vector<double>& thresholds, uint64_t begin,
                                       uint64_t end) {
    op.validate();
    if (gallery.empty() || probes.empty()) throw std::domain_error("empty cohort");
    check_uniform_geometry(gallery);
    check_uniform_geometry(probes);
    if (!(gallery[0].geometry() == probes[0].geometry()))
        throw std::domain_error("gallery and probe geometries differ");
    const uint64_t g = gallery.size();
    unsigned __int128 total = static_cast<unsigned __int128>(g) * probes.size();
    if (begin > end || static_cast<unsigned __int128>(end) > total)
        throw std::domain_error("pair range out of bounds");

    CampaignResult res;
    res.mode = CampaignMode::inter_dataset;
    res.op = op;
    res.thresholds = thresholds;
    res.comparisons = end - begin;

    RangeAccum acc;
    acc.matches.assign(thresholds.size(), 0);
    acc.exact = all_full_mask(gallery) && all_full_mask(probes);
    acc.valid_bits = gallery[0].geometry().total_bits();
    if (acc.exact) acc.tally.assign(acc.valid_bits + 1, 0);
    if (begin == end) {
        flush(acc, thresholds, res);
        return res;
    }

    const uint32_t w = op.rotation_trials / 2;
    uint64_t q = begin;
    uint64_t i = q / g;  // probe row; gallery index advances fastest
    uint64_t j = q % g;
    while (q < end) {
        uint64_t stop = static_cast<uint64_t>(
            std::min<unsigned __int128>(end, static_cast<unsigned __int128>(i + 1) * g));
        RotatedProbe probe(probes[i], w);
        for (; q < stop; ++j, ++q) score_pair(probe.min_against(gallery[j]), thresholds, acc);
        j = 0;
        ++i;
    }
    flush(acc, thresholds, res);
    res.finalize();
    return res;
}

CampaignResult run_all_vs_all(const CohortSpec& cohort, const OperatingPoint& op,
                              const std::vector<double>& thresholds,
                              const CampaignLimits& limits) {
    cohort.validate();
    op.validate();
    unsigned __int128 total =
        static_cast<unsigned __int128>(cohort.size) * (cohort.size - 1) / 2;
    check_cap(total, limits);
    std::vector<IrisCode> codes = materialize_cohort(cohort);
    return run_sharded(static_cast<uint64_t>(total), limits, [&](uint64_t b, uint64_t e) {
        return run_all_vs_all_range(codes, op, thresholds, b, e);
    });
}

CampaignResult run_inter_dataset(const CohortSpec& gallery, const CohortSpec& probes,
                                 const OperatingPoint& op, const std::vector<double>& thresholds,
                                 const CampaignLimits& limits) {
    gallery.validate();
    probes.validate();
    op.validate();
    if (gallery.generator.seed == probes.generator.seed)
        throw std::domain_error("inter-dataset cohorts must use distinct seeds");
    unsigned __int128 total = static_cast<unsigned __int128>(gallery.size) * probes.size;
    check_cap(total, limits);
    std::vector<IrisCode> g = materialize_cohort(gallery);
    std::vector<IrisCode> p = materialize_cohort(probes);
    return run_sharded(static_cast<uint64_t>(total), limits, [&](uint64_t b, uint64_t e) {
        return run_inter_dataset_range(g, p, op, thresholds, b, e);
    });
}

CampaignResult merge_results(const CampaignResult& a, const CampaignResult& b) {
    if (a.mode != b.mode || a.thresholds != b.thresholds ||
        a.op.hd_threshold != b.op.hd_threshold || a.op.rotation_trials != b.op.rotation_trials ||
        a.op.eyes != b.op.eyes)
        throw std::domain_error("cannot merge campaigns with different configurations");
    CampaignResult out = a;
    out.comparisons += b.comparisons;
    out.histogram.merge(b.histogram);
    for (size_t t = 0; t < out.match_counts.size(); ++t) out.match_counts[t] += b.match_counts[t];
    out.finalize();
    return out;
}

ContaminationReport contamination_experiment(uint64_t size, uint64_t duplicates,
                                             const OperatingPoint& op, double threshold) {
    if (size < 2) throw std::domain_error("contamination: size must be >= 2");
    // default cohort: the 245-bit preset, fixed internal seed
    static const GeneratorParams gen = [] {
        GeneratorParams p = calibrate_persistence(245, default_geometry());
        p.seed = kContaminationSeed;
        return p;
    }();
    CohortSpec spec;
    spec.size = size;
    spec.duplicates = duplicates;
    spec.generator = gen;
    CampaignResult r = run_all_vs_all(spec, op, {threshold});
    ContaminationReport rep;
    rep.matches = r.match_counts[0];
    rep.comparisons = r.comparisons;
    rep.measured_fmr = static_cast<double>(rep.matches) / static_cast<double>(rep.comparisons);
    rep.floor = 2.0 / (static_cast<double>(size) * static_cast<double>(size));
    return rep;
}

} // namespace colrisk
