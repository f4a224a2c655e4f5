#pragma once

#include <cstddef>
#include <vector>

namespace wbgsec {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
/// Series expansion for x < a+1, Lentz continued fraction otherwise.
/// Needed by the block-frequency randomness test (no GSL on the host).
double regularized_gamma_q(double a, double x);

/// Percentile with linear interpolation on a copy of the data, p in [0, 100].
double percentile(std::vector<double> values, double p);

double mean(const std::vector<double>& v);

/// Sample standard deviation (N-1 divisor).
double sample_stddev(const std::vector<double>& v);

}  // namespace wbgsec
