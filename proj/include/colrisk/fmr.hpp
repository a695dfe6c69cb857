#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "colrisk/birthday.hpp"

namespace colrisk {

enum class Eyes { monocular, binocular };

struct OperatingPoint {
    double hd_threshold;        // in (0, 0.5]
    uint32_t rotation_trials;   // k >= 1
    Eyes eyes = Eyes::monocular;
    void validate() const;
};

struct FmrPrediction {
    double raw_tail;   // ln P[match], single comparison, no rotation search
    double adjusted;   // ln P[match] after min-of-k rotation selection
    double one_in;     // 1/exp(adjusted), rounded to 2 significant figures
};

// ln P[HD <= t] for a comparison modeled as N effective fair-coin tosses:
// log_binomial_cdf(N, 1/2, floor(t*N)). Match rule is inclusive.
double raw_tail_fmr(uint64_t entropy_bits, double threshold);

// ln(1 - (1 - e^raw)^k), stable for very negative raw (-> raw + ln k).
// k = 1 returns raw unchanged. Models rotation selection as min of k
// independent draws; k is an effective parameter, not a physical count.
double rotation_adjusted_fmr(double raw, uint32_t k);

// Both-eyes-must-match fusion: squares the probability (doubles the log).
double binocular_fused_fmr(double monocular);

struct RotationCalibration {
    uint32_t k = 1;
    std::vector<double> ratios;   // predicted/target per row at the chosen k
    double mse_log = 0.0;
    bool within_factor_5 = true;  // calibration-failure flag when false
};

// Integer k in [1,31] minimizing mean squared log-FMR error against the
// target table of (threshold, fmr) rows. Never silent: the report carries
// per-row ratios and a failure flag when no k puts every row within 5x.
RotationCalibration calibrate_rotation_count(
    uint64_t entropy_bits, const std::vector<std::pair<double, double>>& table);

FmrPrediction predict_fmr(uint64_t entropy_bits, const OperatingPoint& op);

// Enrollable population with all-versus-all collision unlikely: the
// approximate critical population at the operating point's FMR
// (rotation-adjusted; squared when binocular).
CapacityResult enrollable_population(uint64_t entropy_bits, const OperatingPoint& op);

} // namespace colrisk
