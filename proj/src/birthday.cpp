#include "colrisk/birthday.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace colrisk {

namespace {

void check_fmr(double fmr) {
    if (!(fmr > 0.0 && fmr < 1.0)) throw std::domain_error("fmr must be in (0,1)");
}

unsigned long long half_pairings(uint64_t n) {
    unsigned __int128 p = static_cast<unsigned __int128>(n) * (n - 1) / 2;
    return static_cast<unsigned long long>(p);
}

} // namespace

double no_collision_probability(const CollisionQuery& q) {
    check_fmr(q.fmr);
    if (q.population < 1) throw std::domain_error("population must be >= 1");
    unsigned __int128 pairings =
        static_cast<unsigned __int128>(q.population) * (q.population - 1) / 2;
    long double exponent = static_cast<long double>(pairings) * std::log1p(-q.fmr);
    return static_cast<double>(std::exp(exponent));
}

CapacityResult critical_population_exact(double fmr) {
    check_fmr(fmr);
    // smallest N >= 2 with N(N-1) >= 2 ln 2 / (-ln(1-fmr))
    long double r = 2.0L * std::numbers::ln2_v<long double> /
                    (-std::log1p(-static_cast<long double>(fmr)));
    long double root = std::sqrt(r);
    if (root > 4.0e18L) throw std::overflow_error("critical population exceeds uint64 range");

    uint64_t n = root > 4.0L ? static_cast<uint64_t>(root) - 2 : 2;
    auto satisfies = [r](uint64_t k) {
        return static_cast<long double>(static_cast<unsigned __int128>(k) * (k - 1)) >= r;
    };
    while (!satisfies(n)) ++n;
    while (n > 2 && satisfies(n - 1)) --n;

    CapacityResult out;
    out.critical_population = n;
    out.method = CapacityMethod::exact;
    out.pairings_at_critical = half_pairings(n);
    return out;
}

CapacityResult critical_population_approx(double fmr) {
    check_fmr(fmr);
    if (fmr >= 0.01)
        throw std::domain_error("approximation only valid for fmr < 0.01; use the exact solver");
    long double root = std::sqrt(2.0L * std::numbers::ln2_v<long double> / fmr);
    if (root > 4.0e18L) throw std::overflow_error("critical population exceeds uint64 range");

    CapacityResult out;
    out.critical_population = static_cast<uint64_t>(std::ceil(root));
    out.method = CapacityMethod::approximate;
    out.pairings_at_critical = half_pairings(out.critical_population);
    return out;
}

} // namespace colrisk
