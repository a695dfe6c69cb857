#pragma once
#include <cstdint>
#include <string>
#include <utility>

#include "colrisk/iris_code.hpp"

namespace colrisk {

enum class MaskModel { none, random_arcs };

struct GeneratorParams {
    CodeGeometry geometry{};
    // P[a bit repeats its angular predecessor] = (1 + rho_a)/2 within a ring
    double angular_persistence = 0.0;   // rho_a in [0,1)
    // P[a bit copies the same-angle bit of the previous ring] = rho_r
    // (else it takes its own ring's chain value, agreeing with the previous
    // ring only by chance) -- adjacent-ring agreement = (1 + rho_r)/2
    double radial_copy = 0.0;           // rho_r in [0,1)
    MaskModel mask_model = MaskModel::none;
    double occlusion_fraction = 0.0;    // f in [0,1), random_arcs only
    uint64_t seed = 0;

    void validate() const;
};

struct DemographicPreset {
    std::string name;
    uint32_t target_entropy_bits;  // observed span: 225..265
};

// Deterministic for (params, index); marginal bit probability is exactly 1/2.
// Every ring runs its own circular two-state Markov chain with angular
// persistence rho_a (seam closed exactly by bridge conditioning each step on
// the ring's first bit); ring r > 0 then copies ring r-1 per-bit with
// probability rho_r. Mask per mask_model: one random contiguous occluded arc
// per ring pair, total occluded fraction ~= occlusion_fraction.
IrisCode generate_code(const GeneratorParams& params, uint64_t index);

// Second code = first with each bit independently flipped with probability
// noise_fraction (in [0, 0.5)); masks regenerated independently.
std::pair<IrisCode, IrisCode> generate_mated_pair(const GeneratorParams& params,
                                                  uint64_t index, double noise_fraction);

// Solve for params whose population measures the target effective entropy:
// analytic seed rho_a = (n - N)/(n + N), then bisection on the sigma measured
// over >= 1e6 independent pairings. Radial share fixed at mutual information
// 0.3 bits/bit (rho_r = 0.621405) while the target stays reachable with
// rho_a in [0,1); for large targets rho_a pins to 0 and rho_r is solved; the
// full-entropy target returns (0,0).
GeneratorParams calibrate_persistence(uint32_t target_entropy_bits, CodeGeometry geometry);

// rho_r with 1 - H2((1+rho_r)/2) = 0.3 bits: the default radial split.
double default_radial_copy();

} // namespace colrisk
