#pragma once

#include <span>
#include <vector>

namespace decon::stats {

double mean(std::span<const double> x);
double variance(std::span<const double> x);           // n-1 denominator
double sample_sd(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);  // n-1
double correlation(std::span<const double> x, std::span<const double> y);

// Large-sample standard error of the sample covariance of (x, y).
double covariance_se(std::span<const double> x, std::span<const double> y);

// Linear-interpolation quantile (R type 7) of an unsorted sample.
double quantile(std::vector<double> x, double p);
double median(std::vector<double> x);

// One-sided sign test: P(#wins >= wins | p = 1/2, n trials).
double sign_test_p(std::size_t wins, std::size_t n);

}  // namespace decon::stats
