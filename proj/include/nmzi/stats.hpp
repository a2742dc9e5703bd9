#pragma once

#include <span>
#include <vector>

namespace nmzi {

struct MeanSe {
    double mean = 0;
    double se = 0;
};

MeanSe mean_se(std::span<const double> v);

// Batch-means standard error for autocorrelated series.
MeanSe batch_mean_se(std::span<const double> v, std::size_t batches);

struct TestResult {
    double statistic = 0;
    double p_value = 1;
};

// Spearman rank correlation with average ranks for ties; two-sided p-value
// from the t approximation with n - 2 degrees of freedom.
TestResult spearman(std::span<const double> x, std::span<const double> y);

// Two-sample Kolmogorov-Smirnov test, asymptotic p-value.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// P(K > t) for the Kolmogorov distribution.
double kolmogorov_survival(double t);

// Exponentially weighted moving average with the given half-life (in
// samples), seeded with the first value.
std::vector<double> ewma_smooth(std::span<const double> v, double half_life);

} // namespace nmzi
