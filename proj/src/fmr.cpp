#include "colrisk/fmr.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "colrisk/format.hpp"
#include "colrisk/stats.hpp"

namespace colrisk {

void OperatingPoint::validate() const {
    if (!(hd_threshold > 0.0 && hd_threshold <= 0.5))
        throw std::domain_error("hd_threshold must be in (0, 0.5]");
    if (rotation_trials < 1) throw std::domain_error("rotation_trials must be >= 1");
}

double raw_tail_fmr(uint64_t entropy_bits, double threshold) {
    if (entropy_bits < 1) throw std::domain_error("entropy_bits must be >= 1");
    if (!(threshold > 0.0 && threshold <= 0.5))
        throw std::domain_error("threshold must be in (0, 0.5]");
    uint64_t cut = static_cast<uint64_t>(threshold * static_cast<double>(entropy_bits));
    return log_binomial_cdf(entropy_bits, 0.5, cut);
}

double rotation_adjusted_fmr(double raw, uint32_t k) {
    if (!(raw <= 0.0)) throw std::domain_error("raw must be a log probability (<= 0)");
    if (k < 1) throw std::domain_error("k must be >= 1");
    if (k == 1) return raw;
    if (raw < -700.0) return raw + std::log(static_cast<double>(k));  // exp underflows; kp regime
    // ln(1 - (1-p)^k) with p = e^raw
    double l = static_cast<double>(k) * std::log1p(-std::exp(raw));
    return std::log(-std::expm1(l));
}

double binocular_fused_fmr(double monocular) {
    if (!(monocular <= 0.0)) throw std::domain_error("monocular must be a log probability (<= 0)");
    return 2.0 * monocular;
}

RotationCalibration calibrate_rotation_count(
    uint64_t entropy_bits, const std::vector<std::pair<double, double>>& table) {
    if (table.empty()) throw std::domain_error("calibration table is empty");
    std::vector<double> raw(table.size()), target(table.size());
    for (size_t i = 0; i < table.size(); ++i) {
        if (!(table[i].second > 0.0 && table[i].second < 1.0))
            throw std::domain_error("target fmr must be in (0,1)");
        raw[i] = raw_tail_fmr(entropy_bits, table[i].first);
        target[i] = std::log(table[i].second);
    }
    uint32_t best_k = 1;
    double best_mse = std::numeric_limits<double>::infinity();
    for (uint32_t k = 1; k <= 31; ++k) {
        double mse = 0.0;
        for (size_t i = 0; i < table.size(); ++i) {
            double d = rotation_adjusted_fmr(raw[i], k) - target[i];
            mse += d * d;
        }
        mse /= static_cast<double>(table.size());
        if (mse < best_mse) {
            best_mse = mse;
            best_k = k;
        }
    }
    RotationCalibration cal;
    cal.k = best_k;
    cal.mse_log = best_mse;
    for (size_t i = 0; i < table.size(); ++i) {
        double ratio = std::exp(rotation_adjusted_fmr(raw[i], best_k) - target[i]);
        cal.ratios.push_back(ratio);
        if (ratio > 5.0 || ratio < 0.2) cal.within_factor_5 = false;
    }
    return cal;
}

FmrPrediction predict_fmr(uint64_t entropy_bits, const OperatingPoint& op) {
    op.validate();
    FmrPrediction pred;
    pred.raw_tail = raw_tail_fmr(entropy_bits, op.hd_threshold);
    pred.adjusted = rotation_adjusted_fmr(pred.raw_tail, op.rotation_trials);
    if (op.eyes == Eyes::binocular) pred.adjusted = binocular_fused_fmr(pred.adjusted);
    pred.one_in = round_2sf(std::exp(-pred.adjusted));
    return pred;
}

CapacityResult enrollable_population(uint64_t entropy_bits, const OperatingPoint& op) {
    FmrPrediction pred = predict_fmr(entropy_bits, op);
    if (pred.adjusted < -700.0)
        throw std::overflow_error("critical population exceeds uint64 range");
    return critical_population_approx(std::exp(pred.adjusted));
}

} // namespace colrisk
