#ifndef FLOWLAB_STATS_HPP
#define FLOWLAB_STATS_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace flowlab {

/// Standard normal CDF.
double normal_cdf(double x);

/// Binomial confidence interval that stays sane for p near 0 or 1.
struct WilsonInterval {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                               double z = 1.959963984540054);

/// Two-sample Kolmogorov-Smirnov statistic, sup |F1 - F2|.
/// Inputs need not be sorted; they are copied and sorted internally.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Least-squares line y = slope*x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson chi-squared statistic for a 2x2 contingency table
/// [[a, b], [c, d]]. Returns 0 when a margin is empty.
double chi2_2x2(std::size_t a, std::size_t b, std::size_t c, std::size_t d);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

} // namespace flowlab

#endif
