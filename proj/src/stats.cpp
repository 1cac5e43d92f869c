#include "decon/stats.hpp"

#include <algorithm>
#include <cmath>

#include "decon/errors.hpp"
#include "decon/kernels.hpp"

namespace decon::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw InputError("mean of empty sample");
    return kernels::sum(x.data(), x.size()) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw InputError("variance needs at least two samples");
    const double m = mean(x);
    const double ss = kernels::dot(x.data(), x.data(), x.size());
    const double n = static_cast<double>(x.size());
    return std::max(0.0, (ss - n * m * m) / (n - 1.0));
}

double sample_sd(std::span<const double> x) { return std::sqrt(variance(x)); }

double covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("covariance: length mismatch");
    if (x.size() < 2) throw InputError("covariance needs at least two samples");
    const double mx = mean(x), my = mean(y);
    const double s = kernels::dot(x.data(), y.data(), x.size());
    const double n = static_cast<double>(x.size());
    return (s - n * mx * my) / (n - 1.0);
}

double correlation(std::span<const double> x, std::span<const double> y) {
    const double sx = sample_sd(x), sy = sample_sd(y);
    if (sx == 0.0 || sy == 0.0) throw InputError("correlation undefined for constant sample");
    return covariance(x, y) / (sx * sy);
}

double covariance_se(std::span<const double> x, std::span<const double> y) {
    const double c = covariance(x, y);
    return std::sqrt((variance(x) * variance(y) + c * c) / static_cast<double>(x.size()));
}

double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw InputError("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw InputError("quantile probability out of [0, 1]");
    std::sort(x.begin(), x.end());
    const double h = p * static_cast<double>(x.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + frac * (x[lo + 1] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double sign_test_p(std::size_t wins, std::size_t n) {
    if (wins > n) throw InputError("sign test: wins exceed trials");
    // Tail sum of Binomial(n, 1/2) via log factorials.
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    double p = 0.0;
    for (std::size_t k = wins; k <= n; ++k) {
        const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                                  std::lgamma(static_cast<double>(k) + 1.0) -
                                  std::lgamma(static_cast<double>(n - k) + 1.0);
        p += std::exp(log_choose + log_half_n);
    }
    return std::min(1.0, p);
}

}  // namespace decon::stats
