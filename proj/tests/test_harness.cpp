#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "colrisk/harness.hpp"
#include "colrisk/match.hpp"

using namespace colrisk;

namespace {

std::vector<IrisCode> make_cohort(uint32_t n, double rho_a, double rho_r, uint64_t seed,
                                  double occlusion = 0.0) {
    GeneratorParams p;
    p.geometry = default_geometry();
    p.angular_persistence = rho_a;
    p.radial_copy = rho_r;
    p.seed = seed;
    if (occlusion > 0.0) {
        p.mask_model = MaskModel::random_arcs;
        p.occlusion_fraction = occlusion;
    }
    std::vector<IrisCode> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(generate_code(p, i));
    return out;
}

// reference campaign built pair-by-pair from the public single-pair matcher;
// the harness rotates its row probe, which mirrors rotating the other side
CampaignResult oracle_all_vs_all(const std::vector<IrisCode>& codes, const OperatingPoint& op,
                                 const std::vector<double>& thresholds) {
    CampaignResult res;
    res.mode = CampaignMode::all_vs_all;
    res.op = op;
    res.thresholds = thresholds;
    res.match_counts.assign(thresholds.size(), 0);
    const uint32_t w = op.rotation_trials / 2;
    for (size_t i = 0; i < codes.size(); ++i)
        for (size_t j = i + 1; j < codes.size(); ++j) {
            MatchScore s = w == 0 ? hamming_distance(codes[i], codes[j])
                                  : best_rotation_hd(codes[j], codes[i], w);
            res.histogram.add_exact(s.disagreeing_bits, s.valid_bits);
            for (size_t t = 0; t < thresholds.size(); ++t)
                if (s.hd <= thresholds[t]) res.match_counts[t]++;
            res.comparisons++;
        }
    return res;
}

} // namespace

TEST_CASE("all-vs-all campaign equals the single-pair oracle (masked)") {
    std::vector<IrisCode> codes = make_cohort(45, 0.92, 0.62, 101, 0.15);
    OperatingPoint op{0.33, 5, Eyes::monocular};
    std::vector<double> thr{0.33, 0.40, 0.47};
    CampaignResult got = run_all_vs_all_range(codes, op, thr, 0, 45 * 44 / 2);
    CampaignResult want = oracle_all_vs_all(codes, op, thr);
    CHECK(got.comparisons == 990);
    CHECK(got.histogram.counts() == want.histogram.counts());
    CHECK(got.match_counts == want.match_counts);
    CHECK(!got.histogram.has_exact());  // occlusion varies the valid count
}

TEST_CASE("all-vs-all campaign equals the oracle on the exact-tally path") {
    std::vector<IrisCode> codes = make_cohort(45, 0.92, 0.62, 55);
    OperatingPoint op{0.33, 5, Eyes::monocular};
    std::vector<double> thr{0.33, 0.40, 0.47};
    CampaignResult got = run_all_vs_all_range(codes, op, thr, 0, 990);
    CampaignResult want = oracle_all_vs_all(codes, op, thr);
    CHECK(got.histogram.counts() == want.histogram.counts());
    CHECK(got.match_counts == want.match_counts);
    REQUIRE(got.histogram.has_exact());
    CHECK(got.histogram.fixed_valid() == 2048);
    CHECK(got.histogram.exact_tally() == want.histogram.exact_tally());
}

TEST_CASE("k = 1 campaigns take the plain hamming path") {
    std::vector<IrisCode> codes = make_cohort(40, 0.5, 0.0, 7);
    OperatingPoint op{0.40, 1, Eyes::monocular};
    CampaignResult got = run_all_vs_all_range(codes, op, {0.40}, 0, 780);
    CampaignResult want = oracle_all_vs_all(codes, op, {0.40});
    CHECK(got.histogram.counts() == want.histogram.counts());
    CHECK(got.match_counts == want.match_counts);
}

TEST_CASE("even rotation counts round up to the same physical window") {
    std::vector<IrisCode> codes = make_cohort(30, 0.92, 0.62, 19, 0.10);
    std::vector<double> thr{0.35};
    CampaignResult k2 = run_all_vs_all_range(codes, {0.35, 2}, thr, 0, 435);
    CampaignResult k3 = run_all_vs_all_range(codes, {0.35, 3}, thr, 0, 435);
    CampaignResult k1 = run_all_vs_all_range(codes, {0.35, 1}, thr, 0, 435);
    CHECK(k2.histogram.counts() == k3.histogram.counts());
    CHECK(k2.match_counts == k3.match_counts);
    CHECK(k1.histogram.counts() != k3.histogram.counts());
}

TEST_CASE("sharded and threaded runs are bit-identical to serial") {
    std::vector<IrisCode> codes = make_cohort(60, 0.92, 0.62, 23, 0.15);
    OperatingPoint op{0.33, 7, Eyes::monocular};
    std::vector<double> thr{0.33, 0.45};
    const uint64_t total = 60 * 59 / 2;
    CampaignResult serial = run_all_vs_all_range(codes, op, thr, 0, total);

    // manual ragged shards stitched with merge_results
    CampaignResult merged = run_all_vs_all_range(codes, op, thr, 0, 0);
    uint64_t cuts[] = {0, 411, 887, 1234, total};
    for (int s = 0; s < 4; ++s)
        merged = merge_results(merged, run_all_vs_all_range(codes, op, thr, cuts[s], cuts[s + 1]));
    CHECK(merged.comparisons == serial.comparisons);
    CHECK(merged.histogram.counts() == serial.histogram.counts());
    CHECK(merged.match_counts == serial.match_counts);

    // the public entry point with shards/threads
    CohortSpec spec;
    spec.size = 60;
    spec.generator.geometry = default_geometry();
    spec.generator.angular_persistence = 0.92;
    spec.generator.radial_copy = 0.62;
    spec.generator.seed = 23;
    spec.generator.mask_model = MaskModel::random_arcs;
    spec.generator.occlusion_fraction = 0.15;
    CampaignLimits limits;
    limits.shards = 5;
    limits.threads = 3;
    CampaignResult pub = run_all_vs_all(spec, op, thr, limits);
    CHECK(pub.histogram.counts() == serial.histogram.counts());
    CHECK(pub.match_counts == serial.match_counts);
    CHECK(pub.comparisons == serial.comparisons);
}

TEST_CASE("inter-dataset campaign equals its oracle and is probe-major") {
    std::vector<IrisCode> gallery = make_cohort(33, 0.92, 0.62, 1001, 0.12);
    std::vector<IrisCode> probes = make_cohort(21, 0.92, 0.62, 2002, 0.12);
    OperatingPoint op{0.33, 7, Eyes::monocular};
    std::vector<double> thr{0.36, 0.46};
    CampaignResult got = run_inter_dataset_range(gallery, probes, op, thr, 0, 33 * 21);
    CHECK(got.comparisons == 693);
    CHECK(got.mode == CampaignMode::inter_dataset);

    CampaignResult want;
    want.match_counts.assign(thr.size(), 0);
    for (size_t p = 0; p < probes.size(); ++p)
        for (size_t g = 0; g < gallery.size(); ++g) {
            MatchScore s = best_rotation_hd(gallery[g], probes[p], 3);
            want.histogram.add_exact(s.disagreeing_bits, s.valid_bits);
            for (size_t t = 0; t < thr.size(); ++t)
                if (s.hd <= thr[t]) want.match_counts[t]++;
        }
    CHECK(got.histogram.counts() == want.histogram.counts());
    CHECK(got.match_counts == want.match_counts);

    // a mid-stream shard [begin, end) covers exactly the probe-major slice
    CampaignResult part = run_inter_dataset_range(gallery, probes, op, thr, 100, 500);
    CampaignResult rest = merge_results(
        merge_results(run_inter_dataset_range(gallery, probes, op, thr, 0, 100), part),
        run_inter_dataset_range(gallery, probes, op, thr, 500, 693));
    CHECK(rest.histogram.counts() == got.histogram.counts());
    CHECK(rest.match_counts == got.match_counts);
}

TEST_CASE("inter-dataset cohorts must differ in seed") {
    CohortSpec a, b;
    a.size = b.size = 10;
    a.generator.geometry = b.generator.geometry = default_geometry();
    a.generator.seed = b.generator.seed = 5;
    OperatingPoint op{0.33, 7};
    CHECK_THROWS_AS(run_inter_dataset(a, b, op, {0.33}), std::domain_error);
    b.generator.seed = 6;
    CampaignResult r = run_inter_dataset(a, b, op, {0.33});
    CHECK(r.comparisons == 100);
}

TEST_CASE("campaign guards: ranges, caps, cohort shape") {
    std::vector<IrisCode> codes = make_cohort(10, 0.0, 0.0, 3);
    OperatingPoint op{0.33, 1};
    CHECK_THROWS_AS(run_all_vs_all_range(codes, op, {0.33}, 0, 46), std::domain_error);
    CHECK_THROWS_AS(run_all_vs_all_range(codes, op, {0.33}, 7, 6), std::domain_error);
    CHECK_THROWS_AS(run_all_vs_all_range({}, op, {0.33}, 0, 0), std::domain_error);
    CampaignResult empty = run_all_vs_all_range(codes, op, {0.33}, 17, 17);
    CHECK(empty.comparisons == 0);
    CHECK(empty.histogram.total() == 0);

    std::vector<IrisCode> mixed = codes;
    mixed.push_back(IrisCode::zeros(CodeGeometry{2, 8}));
    CHECK_THROWS_AS(run_all_vs_all_range(mixed, op, {0.33}, 0, 1), std::domain_error);

    CohortSpec spec;
    spec.size = 60;
    spec.generator.geometry = default_geometry();
    spec.generator.seed = 8;
    CampaignLimits tight;
    tight.max_comparisons = 1000;  // 60 choose 2 = 1770 exceeds this
    CHECK_THROWS_AS(run_all_vs_all(spec, op, {0.33}, tight), std::domain_error);
    tight.override_cap = true;
    CHECK(run_all_vs_all(spec, op, {0.33}, tight).comparisons == 1770);

    CohortSpec bad;
    bad.size = 10;
    bad.duplicates = 6;  // more than half
    bad.generator.geometry = default_geometry();
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    CHECK_THROWS_AS(CohortSpec{}.validate(), std::domain_error);
}

TEST_CASE("materialize_cohort plants re-enrolled subjects at the tail") {
    CohortSpec spec;
    spec.size = 10;
    spec.duplicates = 3;
    spec.generator.geometry = default_geometry();
    spec.generator.angular_persistence = 0.92;
    spec.generator.radial_copy = 0.62;
    spec.generator.seed = 77;
    std::vector<IrisCode> cohort = materialize_cohort(spec);
    REQUIRE(cohort.size() == 10);
    for (uint64_t i = 0; i < 7; ++i) CHECK(cohort[i] == generate_code(spec.generator, i));
    for (uint64_t j = 0; j < 3; ++j) {
        CHECK(cohort[7 + j] == generate_mated_pair(spec.generator, j, 0.10).second);
        double hd = hamming_distance(cohort[7 + j], cohort[j]).hd;
        CHECK(hd > 0.04);
        CHECK(hd < 0.17);  // a noisy copy, nowhere near an independent code
    }
}

TEST_CASE("match counts follow the binomial tail for iid cohorts") {
    // 300 iid full-entropy codes: every pairing is 2048 fair coin flips, so
    // the counts at a threshold must sit within sampling noise of the tail
    std::vector<IrisCode> codes = make_cohort(300, 0.0, 0.0, 12321);
    OperatingPoint op{0.48, 1};
    std::vector<double> thr{0.47, 0.48};
    CampaignResult r = run_all_vs_all_range(codes, op, thr, 0, 300 * 299 / 2);
    for (size_t t = 0; t < thr.size(); ++t) {
        uint64_t cut = static_cast<uint64_t>(thr[t] * 2048.0);
        double expect = static_cast<double>(r.comparisons) *
                        std::exp(log_binomial_cdf(2048, 0.5, cut));
        double sigma = std::sqrt(expect);
        CHECK(std::fabs(static_cast<double>(r.match_counts[t]) - expect) <= 3.0 * sigma + 1.0);
    }
}

TEST_CASE("stat_at scales the Garwood interval by the comparison count") {
    std::vector<IrisCode> codes = make_cohort(12, 0.0, 0.0, 4);
    CampaignResult r = run_all_vs_all_range(codes, {0.5, 1}, {0.6, 0.2}, 0, 66);
    ThresholdStat all = r.stat_at(0);
    CHECK(all.matches == 66);  // hd <= 0.6 always
    CHECK(all.rate == 1.0);
    PoissonCi raw = poisson_ci95(66);
    CHECK(all.ci95.lo == doctest::Approx(raw.lo / 66.0).epsilon(1e-12));
    CHECK(all.ci95.hi == doctest::Approx(raw.hi / 66.0).epsilon(1e-12));
    ThresholdStat none = r.stat_at(1);
    CHECK(none.matches == 0);  // hd <= 0.2 between strangers: never at n=2048
    CHECK(none.rate == 0.0);
    CHECK(none.ci95.hi > 0.0);  // zero counts still carry an upper bound
    CHECK_THROWS_AS(r.stat_at(2), std::out_of_range);
}

TEST_CASE("merge_results rejects mismatched campaigns") {
    std::vector<IrisCode> codes = make_cohort(10, 0.0, 0.0, 3);
    CampaignResult a = run_all_vs_all_range(codes, {0.33, 1}, {0.33}, 0, 45);
    CampaignResult b = run_all_vs_all_range(codes, {0.33, 1}, {0.34}, 0, 45);
    CHECK_THROWS_AS(merge_results(a, b), std::domain_error);
    CampaignResult c = run_all_vs_all_range(codes, {0.33, 3}, {0.33}, 0, 45);
    CHECK_THROWS_AS(merge_results(a, c), std::domain_error);
}

TEST_CASE("contamination experiment reports duplicates against the floor") {
    OperatingPoint op{0.33, 7};
    ContaminationReport rep = contamination_experiment(1500, 1, op, 0.33);
    CHECK(rep.comparisons == 1500ull * 1499 / 2);
    CHECK(rep.floor == doctest::Approx(2.0 / (1500.0 * 1500.0)).epsilon(1e-12));
    CHECK(rep.matches >= 1);  // the planted duplicate pair always matches
    CHECK(rep.measured_fmr >= rep.floor * 0.9);

    // a clean cohort at a deep threshold stays below the floor
    ContaminationReport clean = contamination_experiment(1500, 0, op, 0.25);
    CHECK(clean.matches == 0);
    CHECK(clean.measured_fmr < clean.floor);
    CHECK_THROWS_AS(contamination_experiment(1, 0, op, 0.33), std::domain_error);
}
