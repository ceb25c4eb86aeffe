#include "flowlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowlab {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: trials must be >= 1");
    if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    WilsonInterval w;
    w.p_hat = p;
    w.lo = (successes == 0) ? 0.0 : std::max(0.0, center - half);
    w.hi = (successes == trials) ? 1.0 : std::min(1.0, center + half);
    return w;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
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
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need >= 2 points with matching sizes");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

double chi2_2x2(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const double r1 = static_cast<double>(a + b);
    const double r2 = static_cast<double>(c + d);
    const double c1 = static_cast<double>(a + c);
    const double c2 = static_cast<double>(b + d);
    const double n = r1 + r2;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return 0.0;
    const double ad_bc = static_cast<double>(a) * static_cast<double>(d) -
                         static_cast<double>(b) * static_cast<double>(c);
    return n * ad_bc * ad_bc / (r1 * r2 * c1 * c2);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_stddev: need >= 2 values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace flowlab
