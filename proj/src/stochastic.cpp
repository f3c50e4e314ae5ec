#include "amr/stochastic.hpp"

#include <algorithm>
#include <cmath>

namespace amr {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

GaussianTime gauss_sum(const GaussianTime& a, const GaussianTime& b) {
  return {a.mean + b.mean, a.var + b.var};
}

GaussianTime max_with_constant(const GaussianTime& x, double e) {
  if (x.var <= 0.0) {
    return {std::max(x.mean, e), 0.0};
  }
  const double sigma = std::sqrt(x.var);
  const double z = (x.mean - e) / sigma;
  const double cdf = norm_cdf(z);
  const double cdf_neg = norm_cdf(-z);
  const double pdf = norm_pdf(z);
  const double mean = x.mean * cdf + e * cdf_neg + sigma * pdf;
  const double second = (x.var + x.mean * x.mean) * cdf + e * e * cdf_neg +
                        (x.mean + e) * sigma * pdf;
  return {mean, std::max(0.0, second - mean * mean)};
}

double expected_lateness(const GaussianTime& arrival, double h) {
  if (arrival.var <= 0.0) {
    return std::max(0.0, arrival.mean - h);
  }
  const double sigma = std::sqrt(arrival.var);
  const double z = (h - arrival.mean) / sigma;
  const double value =
      h * norm_cdf(z) + arrival.mean * norm_cdf(-z) + sigma * norm_pdf(z) - h;
  return std::max(0.0, value);
}

double prob_before(const GaussianTime& x, double deadline) {
  if (x.var <= 0.0) {
    return x.mean < deadline ? 1.0 : 0.0;
  }
  return norm_cdf((deadline - x.mean) / std::sqrt(x.var));
}

}  // namespace amr
