#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace penal {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

struct TestReport {
    std::string name;
    double statistic = 0.0;
    // NaN when the check is a tolerance comparison rather than a test.
    double p_value = 0.0;
    double margin = 0.0;
    bool pass = false;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
};

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample_distance(std::vector<double> a, std::vector<double> b);

// One-sample KS with the asymptotic p-value (Stephens' small-sample correction).
TestReport ks_test(const std::vector<double>& sample, const std::function<double(double)>& cdf, double level = 0.01,
                   std::string name = "ks");
TestReport ks_two_sample(const std::vector<double>& a, const std::vector<double>& b, double level = 0.01,
                         std::string name = "ks2");

// Pearson chi-square; cells with expected count below 5 are pooled with neighbours.
// The last pmf cell should carry the tail mass of everything beyond it.
TestReport chi2_test(const std::vector<double>& counts, const std::vector<double>& pmf, double level = 0.01,
                     std::string name = "chi2");

// Plain mean when weights are empty, self-normalized weighted mean otherwise.
McEstimate mc_mean(const std::vector<double>& values, const std::vector<double>& weights = {});

// Running sums for a plain mean; merge in a fixed order for reproducible results.
class MeanAccumulator {
  public:
    void add(double x) {
        ++n_;
        sum_ += x;
        sum2_ += x * x;
    }
    void merge(const MeanAccumulator& o) {
        n_ += o.n_;
        sum_ += o.sum_;
        sum2_ += o.sum2_;
    }
    McEstimate estimate() const;
    std::size_t count() const { return n_; }

  private:
    std::size_t n_ = 0;
    double sum_ = 0.0;
    double sum2_ = 0.0;
};

// Sums for a ratio of means E[a] / E[b] with a delta-method standard error.
class RatioAccumulator {
  public:
    void add(double a, double b) {
        ++n_;
        sa_ += a;
        sb_ += b;
        saa_ += a * a;
        sbb_ += b * b;
        sab_ += a * b;
    }
    void merge(const RatioAccumulator& o) {
        n_ += o.n_;
        sa_ += o.sa_;
        sb_ += o.sb_;
        saa_ += o.saa_;
        sbb_ += o.sbb_;
        sab_ += o.sab_;
    }
    // Throws ConfigError when the denominator mean is zero.
    McEstimate estimate() const;
    McEstimate numerator() const;
    McEstimate denominator() const;
    std::size_t count() const { return n_; }

  private:
    std::size_t n_ = 0;
    double sa_ = 0.0, sb_ = 0.0, saa_ = 0.0, sbb_ = 0.0, sab_ = 0.0;
};

double combined_se(const McEstimate& a, const McEstimate& b);

}  // namespace penal
