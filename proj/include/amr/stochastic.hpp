#pragma once

namespace amr {

// A time quantity modeled as a normal distribution by its first two moments.
// var == 0 denotes a deterministic time.
struct GaussianTime {
  double mean = 0.0;
  double var = 0.0;
};

double norm_pdf(double x);
double norm_cdf(double x);

// Sum of independent Gaussian times.
GaussianTime gauss_sum(const GaussianTime& a, const GaussianTime& b);

// Moments of max{X, e} for X ~ N(mean, var). The deterministic limit
// (var == 0) is handled exactly, not by perturbation.
GaussianTime max_with_constant(const GaussianTime& x, double e);

// E(A - h)^+ = E(max{h, A}) - h. Non-negative.
double expected_lateness(const GaussianTime& arrival, double h);

// P{X < deadline}. For var == 0: 1 if mean < deadline, else 0.
double prob_before(const GaussianTime& x, double deadline);

}  // namespace amr
