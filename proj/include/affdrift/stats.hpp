#pragma once

#include <optional>
#include <span>
#include <vector>

namespace affdrift::stats {

double mean(std::span<const double> x);

// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);

// Pearson correlation; nullopt when either input has zero variance or the
// lengths differ.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

// Linear-interpolation percentile (q in [0, 100]) of unsorted data.
double percentile(std::vector<double> x, double q);

double median(std::vector<double> x);

double logistic(double z);

// log(1 + exp(z)) without overflow.
double softplus(double z);

}  // namespace affdrift::stats
