#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace colrisk {

// --- special functions (self-contained, thread-safe, deterministic) --------

// ln Gamma(x), x > 0. Lanczos g=7, 9 terms: |rel err| < 1e-13 over the domain.
double log_gamma(double x);

// ln C(n, k)
double log_choose(uint64_t n, uint64_t k);

// Regularized incomplete gamma P(a,x) (lower) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Exact (Garwood) 95% confidence interval on a Poisson count.
struct PoissonCi {
    double lo;
    double hi;
};
PoissonCi poisson_ci95(uint64_t count);

// ln sum_{j=0..m} C(n,j) p^j (1-p)^(n-j), entirely in log space: per-term
// log mass via log_gamma, then log-sum-exp with the terms accumulated in
// ascending magnitude order. Relative error of the log <= 1e-10 for n <= 1e4.
double log_binomial_cdf(uint64_t n, double p, uint64_t m);

// ln of the Binomial(n,p) mass at j.
double log_binomial_pmf(uint64_t n, double p, uint64_t j);

// Entropy of the uniform distribution over 2^b outcomes. H = -sum 2^-b *
// log2(2^-b) = 2^b * 2^-b * b = b: returned via that identity, no summation.
double flat_entropy(uint64_t b);

// --- histogram --------------------------------------------------------------

// Fractional-HD histogram: 1001 bins of width 0.001 over [0,1], last bin
// closed (hd = 1.0 lands in bin 1000). Supports an exact integer tally keyed
// by disagreeing-bit count when every comparison shares one valid-bit count
// (unmasked fixed-n campaigns); estimation then has no binning error.
class HdHistogram {
  public:
    static constexpr uint32_t kBins = 1001;

    HdHistogram() : counts_(kBins, 0) {}

    void add(double hd);
    void add_exact(uint32_t disagreeing, uint32_t valid);
    // campaign path: hd is the caller's already-computed disagreeing/valid
    void add_exact(uint32_t disagreeing, uint32_t valid, double hd);
    // bulk form used by the campaign kernel
    void add_exact_tally(const std::vector<uint64_t>& tally, uint32_t valid);
    // bulk binned counts (CSV ingestion); the exact tally does not survive
    void add_binned(uint32_t bin, uint64_t count);

    void merge(const HdHistogram& other);

    uint64_t total() const { return total_; }
    const std::vector<uint64_t>& counts() const { return counts_; }
    static uint32_t bin_of(double hd);

    bool has_exact() const { return fixed_valid_.has_value(); }
    uint32_t fixed_valid() const { return *fixed_valid_; }
    const std::map<uint32_t, uint64_t>& exact_tally() const { return exact_; }

    // mean and population variance of the stored distribution (exact tally
    // when available, bin midpoints otherwise)
    void moments(double& mean, double& var) const;

  private:
    std::vector<uint64_t> counts_;
    uint64_t total_ = 0;
    std::optional<uint32_t> fixed_valid_;
    std::map<uint32_t, uint64_t> exact_;
    bool exact_broken_ = false;  // sticky once mixed-valid or fractional adds occur
};

// --- degrees-of-freedom estimation ------------------------------------------

struct EntropyEstimate {
    double mean_p = 0.0;
    double sigma = 0.0;
    double effective_bits = 0.0;          // N = p(1-p)/sigma^2, unrounded
    int64_t reported_bits() const;        // rounded to nearest integer
};

// Requires >= 1000 comparisons and a nondegenerate sigma.
EntropyEstimate estimate_entropy(const HdHistogram& h);

// Same estimator on already-computed moments (raw score streams).
EntropyEstimate estimate_entropy(double mean_p, double sigma);

// --- binomial overlay fit ----------------------------------------------------

struct OverlayFit {
    std::vector<double> expected;  // per-bin expected counts (kBins entries)
    double chi_square = 0.0;       // over bins with expected >= 5
    uint32_t bins_used = 0;
    double p_value = 1.0;          // upper tail of chi^2 with bins_used-1 dof
};

OverlayFit fit_binomial_overlay(const HdHistogram& h, uint64_t N, double p);

} // namespace colrisk
