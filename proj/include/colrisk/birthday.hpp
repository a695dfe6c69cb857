#pragma once
#include <cstdint>

namespace colrisk {

struct CollisionQuery {
    double fmr;           // in (0,1)
    uint64_t population;  // >= 1
};

enum class CapacityMethod { exact, approximate };

struct CapacityResult {
    uint64_t critical_population = 0;
    CapacityMethod method = CapacityMethod::exact;
    // N(N-1)/2 pairings at the critical population
    unsigned long long pairings_at_critical = 0;
};

// (1 - fmr)^(N(N-1)/2), evaluated as exp(pairings * log1p(-fmr)).
double no_collision_probability(const CollisionQuery& q);

// Smallest N >= 2 with N(N-1) >= 2 ln 2 / (-ln(1 - fmr)): the population at
// which an all-versus-all collision becomes likelier than not. Closed-form
// square root followed by a local integer walk.
CapacityResult critical_population_exact(double fmr);

// ceil(sqrt(2 ln 2 / fmr)); valid in the small-FMR regime (fmr < 0.01),
// errors otherwise advising the exact method.
CapacityResult critical_population_approx(double fmr);

} // namespace colrisk
