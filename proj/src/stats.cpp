#include "penal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "penal/errors.hpp"

namespace penal {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_sample(std::size_t n, std::size_t min_n, const std::string& what) {
    if (n == 0) throw ConfigError(what + ": empty input");
    if (n < min_n) throw ConfigError(what + ": needs at least " + std::to_string(min_n) + " values");
}

}  // namespace

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.0) {
        // Theta-function form converges fast for small lambda.
        double cdf = 0.0;
        const double c = kPi * kPi / (8.0 * lambda * lambda);
        for (int k = 1; k <= 50; ++k) {
            const int m = 2 * k - 1;
            const double term = std::exp(-m * m * c);
            cdf += term;
            if (term < 1e-300) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    require_sample(sample.size(), 1, "ks");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t j = 0; j < sample.size(); ++j) {
        const double f = cdf(sample[j]);
        d = std::max({d, (j + 1) / n - f, f - j / n});
    }
    return d;
}

double ks_two_sample_distance(std::vector<double> a, std::vector<double> b) {
    require_sample(a.size(), 1, "ks2");
    require_sample(b.size(), 1, "ks2");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

TestReport ks_test(const std::vector<double>& sample, const std::function<double(double)>& cdf, double level,
                   std::string name) {
    require_sample(sample.size(), 10, "ks");
    TestReport r;
    r.name = std::move(name);
    r.statistic = ks_distance(sample, cdf);
    const double sn = std::sqrt(static_cast<double>(sample.size()));
    r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * r.statistic);
    r.margin = r.p_value - level;
    r.pass = r.p_value > level;
    return r;
}

TestReport ks_two_sample(const std::vector<double>& a, const std::vector<double>& b, double level, std::string name) {
    require_sample(a.size(), 10, "ks2");
    require_sample(b.size(), 10, "ks2");
    TestReport r;
    r.name = std::move(name);
    r.statistic = ks_two_sample_distance(a, b);
    const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    const double sn = std::sqrt(ne);
    r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * r.statistic);
    r.margin = r.p_value - level;
    r.pass = r.p_value > level;
    return r;
}

TestReport chi2_test(const std::vector<double>& counts, const std::vector<double>& pmf, double level, std::string name) {
    if (counts.size() != pmf.size()) throw ConfigError("chi2: counts and pmf differ in length");
    double n = 0.0;
    for (double c : counts) {
        if (c < 0.0) throw ConfigError("chi2: negative count");
        n += c;
    }
    require_sample(static_cast<std::size_t>(n), 10, "chi2");
    // Pool from the left until every cell expects at least 5.
    std::vector<double> obs, expct;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        o_acc += counts[k];
        e_acc += n * pmf[k];
        if (e_acc >= 5.0) {
            obs.push_back(o_acc);
            expct.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (expct.empty()) {
            obs.push_back(o_acc);
            expct.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            expct.back() += e_acc;
        }
    }
    TestReport r;
    r.name = std::move(name);
    if (expct.size() < 2) throw ConfigError("chi2: fewer than two cells after pooling");
    double stat = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        if (!(expct[k] > 0.0)) {
            if (obs[k] > 0.0) stat = std::numeric_limits<double>::infinity();
            continue;
        }
        stat += (obs[k] - expct[k]) * (obs[k] - expct[k]) / expct[k];
    }
    r.statistic = stat;
    const boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
    r.p_value = std::isfinite(stat) ? boost::math::cdf(boost::math::complement(dist, stat)) : 0.0;
    r.margin = r.p_value - level;
    r.pass = r.p_value > level;
    return r;
}

McEstimate mc_mean(const std::vector<double>& values, const std::vector<double>& weights) {
    require_sample(values.size(), 1, "mc_mean");
    if (weights.empty()) {
        MeanAccumulator acc;
        for (double v : values) acc.add(v);
        return acc.estimate();
    }
    if (weights.size() != values.size()) throw ConfigError("mc_mean: weights and values differ in length");
    RatioAccumulator acc;
    for (std::size_t k = 0; k < values.size(); ++k) acc.add(weights[k] * values[k], weights[k]);
    return acc.estimate();
}

McEstimate MeanAccumulator::estimate() const {
    if (n_ == 0) throw ConfigError("mean of an empty sample");
    const double n = static_cast<double>(n_);
    const double mean = sum_ / n;
    const double var = n_ > 1 ? std::max(0.0, (sum2_ - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n), n_};
}

McEstimate RatioAccumulator::numerator() const {
    MeanAccumulator m;
    return n_ == 0 ? m.estimate() : McEstimate{sa_ / n_, std::sqrt(std::max(0.0, saa_ / n_ - (sa_ / n_) * (sa_ / n_)) / n_), n_};
}

McEstimate RatioAccumulator::denominator() const {
    MeanAccumulator m;
    return n_ == 0 ? m.estimate() : McEstimate{sb_ / n_, std::sqrt(std::max(0.0, sbb_ / n_ - (sb_ / n_) * (sb_ / n_)) / n_), n_};
}

McEstimate RatioAccumulator::estimate() const {
    if (n_ == 0) throw ConfigError("ratio of an empty sample");
    const double n = static_cast<double>(n_);
    const double ma = sa_ / n;
    const double mb = sb_ / n;
    if (mb == 0.0) throw ConfigError("degenerate configuration: zero denominator estimate");
    const double r = ma / mb;
    const double vaa = saa_ / n - ma * ma;
    const double vbb = sbb_ / n - mb * mb;
    const double vab = sab_ / n - ma * mb;
    const double v = std::max(0.0, vaa - 2.0 * r * vab + r * r * vbb) / (mb * mb);
    return {r, std::sqrt(v / n), n_};
}

double combined_se(const McEstimate& a, const McEstimate& b) {
    return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

}  // namespace penal
