#pragma once
#include <cstdint>
#include <string>

namespace colrisk {

// Round to 2 significant figures.
double round_2sf(double x);

// "1 in 3.1 million" style rendering of a probability (2 significant figures,
// word scale above 10^6). p >= 1 renders as "1 in 1".
std::string format_one_in(double probability);

// Population rendering: plain integer below 10^6; above, the coarse 2-figure
// style with the exact value alongside, e.g. "1.2 million (1,177,411)".
std::string format_population(uint64_t n);

// thousands separators
std::string with_commas(uint64_t n);

// full-precision round-trippable float (%.17g)
std::string full_precision(double x);

} // namespace colrisk
