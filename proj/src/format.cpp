#include "colrisk/format.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace colrisk {

double round_2sf(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    double mag = std::pow(10.0, std::floor(std::log10(std::fabs(x))) - 1.0);
    return std::round(x / mag) * mag;
}

std::string with_commas(uint64_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    out.reserve(digits.size() + digits.size() / 3);
    size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
    for (size_t i = 0; i < digits.size(); ++i) {
        if (i >= lead && (i - lead) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string full_precision(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

struct Scale {
    double value;
    const char* word;
};

constexpr Scale kScales[] = {
    {1e27, "octillion"}, {1e24, "septillion"}, {1e21, "sextillion"},
    {1e18, "quintillion"}, {1e15, "quadrillion"}, {1e12, "trillion"},
    {1e9, "billion"}, {1e6, "million"},
};

// 2-significant-figure value with a word scale above a million
std::string coarse(double x) {
    char buf[64];
    double rx = round_2sf(x);
    if (rx >= 1e30) {
        std::snprintf(buf, sizeof buf, "%.1e", rx);
        return buf;
    }
    for (const Scale& s : kScales) {
        if (rx < s.value) continue;
        double v = rx / s.value;
        std::snprintf(buf, sizeof buf, v < 9.95 ? "%.1f %s" : "%.0f %s", v, s.word);
        return buf;
    }
    if (rx < 10.0) {
        std::snprintf(buf, sizeof buf, "%.1f", rx);
        return buf;
    }
    return with_commas(static_cast<uint64_t>(std::llround(rx)));
}

} // namespace

std::string format_one_in(double probability) {
    if (!(probability > 0.0) || !std::isfinite(probability))
        throw std::domain_error("format_one_in: probability must be positive");
    if (probability >= 1.0) return "1 in 1";
    return "1 in " + coarse(1.0 / probability);
}

std::string format_population(uint64_t n) {
    if (n < 1'000'000) return with_commas(n);
    return coarse(static_cast<double>(n)) + " (" + with_commas(n) + ")";
}

} // namespace colrisk
