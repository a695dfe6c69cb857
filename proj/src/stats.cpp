#include "colrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace colrisk {

// --- log gamma ---------------------------------------------------------------
// Lanczos approximation, g = 7, 9 coefficients: ~1e-14 relative accuracy on
// the positive axis, pure function (no lgamma_r/signgam dependence).

double log_gamma(double x) {
    static const double c[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,    12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
    if (x < 0.5) {
        // reflection keeps the series in its sweet spot
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    double z = x - 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
    double t = z + 7.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double log_choose(uint64_t n, uint64_t k) {
    if (k > n) throw std::domain_error("log_choose: k > n");
    if (k == 0 || k == n) return 0.0;
    return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
           log_gamma(static_cast<double>(n - k) + 1.0);
}

double log_binomial_pmf(uint64_t n, double p, uint64_t j) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("binomial: p must be in (0,1)");
    if (j > n) throw std::domain_error("binomial: j > n");
    return log_choose(n, j) + static_cast<double>(j) * std::log(p) +
           static_cast<double>(n - j) * std::log1p(-p);
}

double log_binomial_cdf(uint64_t n, double p, uint64_t m) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("binomial: p must be in (0,1)");
    if (m > n) throw std::domain_error("binomial: m > n");
    if (m == n) return 0.0;  // full support, probability 1

    std::vector<double> terms(m + 1);
    for (uint64_t j = 0; j <= m; ++j) terms[j] = log_binomial_pmf(n, p, j);
    // log-sum-exp with the terms added smallest-first so low-order mass is not
    // absorbed before it can accumulate
    std::sort(terms.begin(), terms.end());
    double mx = terms.back();
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - mx);
    return mx + std::log(acc);
}

double flat_entropy(uint64_t b) {
    // H = -sum_{i<2^b} 2^-b log2(2^-b) = 2^b * (2^-b * b) = b
    return static_cast<double>(b);
}

// --- regularized incomplete gamma ---------------------------------------------

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 3e-16;
constexpr double kFpMin = 1e-300;

// series representation, good for x < a+1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps)
            return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw std::runtime_error("gamma_p: series did not converge");
}

// Lentz continued fraction for Q(a,x), good for x >= a+1
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            return h * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw std::runtime_error("gamma_q: continued fraction did not converge");
}

} // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_p: requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: requires a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

// --- exact Poisson interval -----------------------------------------------------

namespace {

// smallest lambda with gamma_p(a, lambda) >= target (gamma_p increases in x)
double invert_gamma_p(double a, double target) {
    double lo = 0.0;
    double hi = a + 10.0 * std::sqrt(a) + 20.0;
    while (gamma_p(a, hi) < target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (gamma_p(a, mid) < target) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

PoissonCi poisson_ci95(uint64_t count) {
    // Garwood: P[X >= c; lo] = 0.025 and P[X <= c; hi] = 0.025
    double c = static_cast<double>(count);
    PoissonCi ci;
    ci.lo = count == 0 ? 0.0 : invert_gamma_p(c, 0.025);
    ci.hi = invert_gamma_p(c + 1.0, 0.975);
    return ci;
}

// --- histogram -------------------------------------------------------------------

uint32_t HdHistogram::bin_of(double hd) {
    if (!(hd >= 0.0 && hd <= 1.0)) throw std::domain_error("histogram: hd outside [0,1]");
    uint32_t b = static_cast<uint32_t>(hd * 1000.0);
    return b > 1000 ? 1000 : b;
}

void HdHistogram::add(double hd) {
    counts_[bin_of(hd)]++;
    total_++;
    // a plain fractional observation breaks the exact-tally guarantee
    fixed_valid_.reset();
    exact_.clear();
    exact_broken_ = true;
}

void HdHistogram::add_exact(uint32_t disagreeing, uint32_t valid) {
    add_exact(disagreeing, valid, static_cast<double>(disagreeing) / valid);
}

void HdHistogram::add_exact(uint32_t disagreeing, uint32_t valid, double hd) {
    if (valid == 0 || disagreeing > valid)
        throw std::domain_error("histogram: bad exact tally entry");
    counts_[bin_of(hd)]++;
    total_++;
    if (exact_broken_) return;
    if (fixed_valid_ && *fixed_valid_ != valid) {
        fixed_valid_.reset();
        exact_.clear();
        exact_broken_ = true;
        return;
    }
    fixed_valid_ = valid;
    exact_[disagreeing]++;
}

void HdHistogram::add_binned(uint32_t bin, uint64_t count) {
    if (bin >= kBins) throw std::domain_error("histogram: bin out of range");
    counts_[bin] += count;
    total_ += count;
    fixed_valid_.reset();
    exact_.clear();
    exact_broken_ = true;
}

void HdHistogram::add_exact_tally(const std::vector<uint64_t>& tally, uint32_t valid) {
    for (uint32_t d = 0; d < tally.size(); ++d) {
        if (!tally[d]) continue;
        uint64_t c = tally[d];
        counts_[bin_of(static_cast<double>(d) / valid)] += c;
        total_ += c;
        if (!exact_broken_) {
            if (fixed_valid_ && *fixed_valid_ != valid) {
                fixed_valid_.reset();
                exact_.clear();
                exact_broken_ = true;
            } else {
                fixed_valid_ = valid;
                exact_[d] += c;
            }
        }
    }
}

void HdHistogram::merge(const HdHistogram& other) {
    for (uint32_t b = 0; b < kBins; ++b) counts_[b] += other.counts_[b];
    total_ += other.total_;
    if (other.total_ == 0) return;
    if (total_ == other.total_) {  // we were empty: adopt their tally state
        exact_broken_ = other.exact_broken_;
        fixed_valid_ = other.fixed_valid_;
        exact_ = other.exact_;
        return;
    }
    if (exact_broken_ || other.exact_broken_ || !fixed_valid_ || !other.fixed_valid_ ||
        *fixed_valid_ != *other.fixed_valid_) {
        fixed_valid_.reset();
        exact_.clear();
        exact_broken_ = true;
        return;
    }
    for (const auto& [d, c] : other.exact_) exact_[d] += c;
}

void HdHistogram::moments(double& mean, double& var) const {
    if (total_ == 0) throw std::domain_error("histogram: empty");
    if (has_exact()) {
        unsigned __int128 s1 = 0, s2 = 0;
        for (const auto& [d, c] : exact_) {
            s1 += static_cast<unsigned __int128>(d) * c;
            s2 += static_cast<unsigned __int128>(d) * d * c;
        }
        long double v = *fixed_valid_;
        long double n = static_cast<long double>(total_);
        long double m1 = static_cast<long double>(s1) / (v * n);
        long double m2 = static_cast<long double>(s2) / (v * v * n);
        mean = static_cast<double>(m1);
        var = static_cast<double>(m2 - m1 * m1);
        return;
    }
    long double s1 = 0, s2 = 0;
    for (uint32_t b = 0; b < kBins; ++b) {
        if (!counts_[b]) continue;
        long double mid = std::min((b + 0.5) * 0.001L, 1.0L);
        s1 += mid * counts_[b];
        s2 += mid * mid * counts_[b];
    }
    long double n = static_cast<long double>(total_);
    long double m1 = s1 / n;
    mean = static_cast<double>(m1);
    var = static_cast<double>(s2 / n - m1 * m1);
}

// --- degrees of freedom ------------------------------------------------------------

int64_t EntropyEstimate::reported_bits() const { return std::llround(effective_bits); }

EntropyEstimate estimate_entropy(const HdHistogram& h) {
    if (h.total() < 1000) throw std::domain_error("estimate_entropy: insufficient data (< 1000)");
    double mean, var;
    h.moments(mean, var);
    if (!(var > 0.0)) throw std::domain_error("estimate_entropy: degenerate sigma = 0");
    if (!(mean > 0.0 && mean < 1.0))
        throw std::domain_error("estimate_entropy: mean outside (0,1)");
    EntropyEstimate e;
    e.mean_p = mean;
    e.sigma = std::sqrt(var);  // population form: campaigns have >= 1e6 samples
    e.effective_bits = mean * (1.0 - mean) / var;
    return e;
}

EntropyEstimate estimate_entropy(double mean_p, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("estimate_entropy: degenerate sigma = 0");
    if (!(mean_p > 0.0 && mean_p < 1.0))
        throw std::domain_error("estimate_entropy: mean outside (0,1)");
    EntropyEstimate e;
    e.mean_p = mean_p;
    e.sigma = sigma;
    e.effective_bits = mean_p * (1.0 - mean_p) / (sigma * sigma);
    return e;
}

// --- binomial overlay ---------------------------------------------------------------

OverlayFit fit_binomial_overlay(const HdHistogram& h, uint64_t N, double p) {
    if (N < 1) throw std::domain_error("overlay: N must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("overlay: p must be in (0,1)");
    if (h.total() == 0) throw std::domain_error("overlay: empty histogram");

    OverlayFit fit;
    fit.expected.assign(HdHistogram::kBins, 0.0);
    double total = static_cast<double>(h.total());
    for (uint64_t m = 0; m <= N; ++m) {
        double mass = std::exp(log_binomial_pmf(N, p, m));
        fit.expected[HdHistogram::bin_of(static_cast<double>(m) / N)] += mass * total;
    }
    const auto& obs = h.counts();
    double chi2 = 0.0;
    uint32_t used = 0;
    for (uint32_t b = 0; b < HdHistogram::kBins; ++b) {
        if (fit.expected[b] < 5.0) continue;
        double d = static_cast<double>(obs[b]) - fit.expected[b];
        chi2 += d * d / fit.expected[b];
        ++used;
    }
    fit.chi_square = chi2;
    fit.bins_used = used;
    fit.p_value = used > 1 ? gamma_q((used - 1) / 2.0, chi2 / 2.0) : 1.0;
    return fit;
}

} // namespace colrisk
