#include "colrisk/synthgen.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "colrisk/match.hpp"
#include "colrisk/rng.hpp"

namespace colrisk {

namespace {

// substream layout per (seed, index): one chain per ring, one radial selector
// stream per ring, then mask / mated-pair streams. Order- and thread-safe.
constexpr uint64_t kChainBase = 0;
constexpr uint64_t kRadialBase = 64;
constexpr uint64_t kMaskArcs = 128;
constexpr uint64_t kMatedFlips = 192;
constexpr uint64_t kMatedMask = 193;

constexpr uint64_t kCalibrationSeed = 0xCA11B8A7Eull;
constexpr uint32_t kCalibrationCodes = 1448;  // 1448*1447/2 > 1e6 pairings

// Transition probabilities for a circular two-state chain: at position a the
// next bit keeps the previous value with probability chosen so the chain,
// continued for the remaining m = A - a steps, closes on the ring's first bit
// with the correct stationary statistics. P^m(x -> x) = (1 + rho^m)/2.
struct BridgeTable {
    std::vector<double> keep_eq;  // P[keep | prev == first], index a-1
    std::vector<double> keep_ne;  // P[keep | prev != first]
};

BridgeTable make_bridge(double rho, uint32_t angular) {
    BridgeTable t;
    t.keep_eq.resize(angular - 1);
    t.keep_ne.resize(angular - 1);
    double keep1 = (1.0 + rho) / 2.0;
    double flip1 = (1.0 - rho) / 2.0;
    for (uint32_t a = 1; a < angular; ++a) {
        double rm = std::pow(rho, static_cast<double>(angular - a));
        double close_eq = (1.0 + rm) / 2.0;   // m-step return probability
        double close_ne = (1.0 - rm) / 2.0;
        double wk = keep1 * close_eq, wf = flip1 * close_ne;
        t.keep_eq[a - 1] = wk / (wk + wf);
        wk = keep1 * close_ne;
        wf = flip1 * close_eq;
        t.keep_ne[a - 1] = wk / (wk + wf);
    }
    return t;
}

void run_chain(Rng& rng, const BridgeTable& bt, uint32_t angular, std::vector<uint8_t>& out) {
    out[0] = rng.fair_bit() ? 1 : 0;
    for (uint32_t a = 1; a < angular; ++a) {
        bool keep = rng.bernoulli(out[a - 1] == out[0] ? bt.keep_eq[a - 1] : bt.keep_ne[a - 1]);
        out[a] = keep ? out[a - 1] : 1 - out[a - 1];
    }
}

uint32_t uniform_below(Rng& rng, uint32_t n) {
    uint64_t span = (~0ull / n) * n;  // rejection keeps the draw unbiased
    uint64_t u;
    do u = rng.next_u64();
    while (u >= span);
    return static_cast<uint32_t>(u % n);
}

// One contiguous occluded arc per ring pair (eyelid-like): rings grouped
// (0,1), (2,3), ...; each group shares an arc of length round(f * A) at an
// independent random start, so the occluded fraction is ~= f overall.
void apply_mask(CodeBuilder& b, const GeneratorParams& p, Rng rng) {
    b.fill_mask();
    if (p.mask_model == MaskModel::none) return;
    const uint32_t rings = p.geometry.rings;
    const uint32_t angular = p.geometry.angular_positions;
    uint32_t len = static_cast<uint32_t>(std::llround(p.occlusion_fraction * angular));
    if (len == 0) return;
    for (uint32_t g = 0; g < rings; g += 2) {
        uint32_t start = uniform_below(rng, angular);
        for (uint32_t r = g; r < rings && r < g + 2; ++r)
            for (uint32_t i = 0; i < len; ++i)
                b.set_mask_bit(r * angular + (start + i) % angular, false);
    }
}

void fill_rings(const GeneratorParams& p, uint64_t index,
                std::vector<std::vector<uint8_t>>& ring) {
    const uint32_t rings = p.geometry.rings;
    const uint32_t angular = p.geometry.angular_positions;
    BridgeTable bt = make_bridge(p.angular_persistence, angular);
    std::vector<uint8_t> chain(angular);
    for (uint32_t r = 0; r < rings; ++r) {
        Rng crng(p.seed, index, kChainBase + r);
        run_chain(crng, bt, angular, chain);
        if (r == 0) {
            ring[0] = chain;
            continue;
        }
        Rng srng(p.seed, index, kRadialBase + r);
        for (uint32_t a = 0; a < angular; ++a)
            ring[r][a] = srng.bernoulli(p.radial_copy) ? ring[r - 1][a] : chain[a];
    }
}

} // namespace

void GeneratorParams::validate() const {
    geometry.validate();
    if (geometry.rings > 64) throw std::domain_error("generator supports at most 64 rings");
    if (!(angular_persistence >= 0.0 && angular_persistence < 1.0))
        throw std::domain_error("angular_persistence must be in [0,1)");
    if (!(radial_copy >= 0.0 && radial_copy < 1.0))
        throw std::domain_error("radial_copy must be in [0,1)");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0))
        throw std::domain_error("occlusion_fraction must be in [0,1)");
    if (mask_model == MaskModel::none && occlusion_fraction != 0.0)
        throw std::domain_error("occlusion_fraction requires the random_arcs mask model");
}

IrisCode generate_code(const GeneratorParams& params, uint64_t index) {
    params.validate();
    const uint32_t rings = params.geometry.rings;
    const uint32_t angular = params.geometry.angular_positions;
    std::vector<std::vector<uint8_t>> ring(rings, std::vector<uint8_t>(angular));
    fill_rings(params, index, ring);
    CodeBuilder b(params.geometry);
    for (uint32_t r = 0; r < rings; ++r)
        for (uint32_t a = 0; a < angular; ++a)
            b.set_code_bit(r * angular + a, ring[r][a]);
    apply_mask(b, params, Rng(params.seed, index, kMaskArcs));
    return b.freeze();
}

std::pair<IrisCode, IrisCode> generate_mated_pair(const GeneratorParams& params,
                                                  uint64_t index, double noise_fraction) {
    if (!(noise_fraction >= 0.0 && noise_fraction < 0.5))
        throw std::domain_error("noise_fraction must be in [0, 0.5)");
    IrisCode first = generate_code(params, index);
    CodeBuilder b(params.geometry);
    Rng flips(params.seed, index, kMatedFlips);
    const uint32_t n = params.geometry.total_bits();
    for (uint32_t i = 0; i < n; ++i)
        b.set_code_bit(i, first.code_bit(i) != flips.bernoulli(noise_fraction));
    apply_mask(b, params, Rng(params.seed, index, kMatedMask));
    IrisCode second = b.freeze();
    return {std::move(first), std::move(second)};
}

double default_radial_copy() {
    // agreement q with 1 - H2(q) = 0.3 bits of mutual information per bit
    static const double rho = [] {
        double lo = 0.5, hi = 1.0 - 1e-15;
        for (int i = 0; i < 200; ++i) {
            double q = 0.5 * (lo + hi);
            double h2 = -(q * std::log2(q) + (1.0 - q) * std::log2(1.0 - q));
            (h2 > 0.7 ? lo : hi) = q;
        }
        return 2.0 * (0.5 * (lo + hi)) - 1.0;
    }();
    return rho;
}

namespace {

// effective bits N = p(1-p)/sigma^2 measured over all pairings of a fresh
// unmasked cohort generated at the given persistences (fixed internal seed)
double measure_entropy(double rho_a, double rho_r, CodeGeometry geom) {
    GeneratorParams p;
    p.geometry = geom;
    p.angular_persistence = rho_a;
    p.radial_copy = rho_r;
    p.seed = kCalibrationSeed;
    std::vector<IrisCode> codes;
    codes.reserve(kCalibrationCodes);
    for (uint32_t i = 0; i < kCalibrationCodes; ++i) codes.push_back(generate_code(p, i));

    const uint32_t words = codes[0].words();
    const double valid = geom.total_bits();
    unsigned __int128 s1 = 0, s2 = 0;
    uint64_t n = 0;
    for (uint32_t i = 0; i < kCalibrationCodes; ++i)
        for (uint32_t j = i + 1; j < kCalibrationCodes; ++j) {
            uint64_t d = xor_count(codes[i].code_words().data(), codes[j].code_words().data(),
                                   words);
            s1 += d;
            s2 += static_cast<unsigned __int128>(d) * d;
            ++n;
        }
    long double m1 = static_cast<long double>(s1) / n / valid;
    long double m2 = static_cast<long double>(s2) / n / (valid * valid);
    long double var = m2 - m1 * m1;
    return static_cast<double>(m1 * (1.0L - m1) / var);
}

} // namespace

GeneratorParams calibrate_persistence(uint32_t target_entropy_bits, CodeGeometry geometry) {
    geometry.validate();
    const uint32_t total = geometry.total_bits();
    if (target_entropy_bits < 1 || target_entropy_bits > total)
        throw std::domain_error("target entropy must be in [1, total_bits]");

    GeneratorParams out;
    out.geometry = geometry;
    if (target_entropy_bits == total) return out;  // (0,0): independent fair bits

    const double target = target_entropy_bits;
    const double rho_r0 = default_radial_copy();
    double radial_only = measure_entropy(0.0, rho_r0, geometry);

    if (target <= radial_only) {
        // radial share pinned; solve the angular persistence (N decreasing)
        double lo = 0.0, hi = 0.9995;
        if (measure_entropy(hi, rho_r0, geometry) > target)
            throw std::runtime_error("target entropy unreachable within persistence range");
        // analytic single-chain seed rho_a = (n - N)/(n + N) as the first probe
        double guess = (static_cast<double>(total) - target) / (static_cast<double>(total) + target);
        if (guess > lo && guess < hi)
            (measure_entropy(guess, rho_r0, geometry) > target ? lo : hi) = guess;
        for (int i = 0; i < 40; ++i) {
            double mid = 0.5 * (lo + hi);
            (measure_entropy(mid, rho_r0, geometry) > target ? lo : hi) = mid;
        }
        out.angular_persistence = 0.5 * (lo + hi);
        out.radial_copy = rho_r0;
    } else {
        // beyond the radial-only ceiling: no angular structure, thin the
        // radial copying instead (N increasing as rho_r drops toward 0)
        double lo = 0.0, hi = rho_r0;
        for (int i = 0; i < 40; ++i) {
            double mid = 0.5 * (lo + hi);
            (measure_entropy(0.0, mid, geometry) > target ? lo : hi) = mid;
        }
        out.angular_persistence = 0.0;
        out.radial_copy = 0.5 * (lo + hi);
    }
    return out;
}

} // namespace colrisk
