#include "blockid/numcore/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "blockid/errors.hpp"

namespace blockid::numcore {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// Acklam's rational approximation, relative error about 1.15e-9.
double quantile_initial_guess(double p) noexcept {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double lower_quantile(double p) noexcept {
  double x = quantile_initial_guess(p);
  for (int it = 0; it < 4; ++it) {
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    const double step = (normal_cdf(x) - p) / pdf;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_quantile: p outside [0, 1]");
  }
  if (p > 0.5) return -lower_quantile(1.0 - p);
  return lower_quantile(p);
}

double standard_normal(RngStream& rng) noexcept {
  const double u1 = rng.next_double_open_zero();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector sample_standard_normal(RngStream& rng, std::size_t n) {
  if (n == 0) throw EmptyRequestError("sample_standard_normal: n must be >= 1");
  Vector out(n);
  for (double& v : out) v = standard_normal(rng);
  return out;
}

Vector sample_uniform(RngStream& rng, double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw std::domain_error("sample_uniform: requires lo < hi");
  Vector out(n);
  const double width = hi - lo;
  for (double& v : out) {
    v = lo + width * rng.next_double();
    // Rounding of lo + width*u can land on hi for u just below 1.
    if (v >= hi) v = std::nextafter(hi, lo);
  }
  return out;
}

double sample_truncated_normal(RngStream& rng, double mu, double sigma, double lo, double hi) {
  if (!(sigma > 0.0)) throw std::domain_error("sample_truncated_normal: sigma must be > 0");
  if (!(lo < hi)) throw std::domain_error("sample_truncated_normal: requires lo < hi");
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  // Work in the lower tail where Phi keeps relative precision.
  const bool flip = a > 0.0;
  if (flip) {
    const double t = a;
    a = -b;
    b = -t;
  }
  const double cdf_a = normal_cdf(a);
  const double cdf_b = normal_cdf(b);
  const double u = rng.next_double();
  const double p = cdf_a + u * (cdf_b - cdf_a);
  double x = p > 0.0 ? normal_quantile(p) : a;
  x = std::clamp(x, a, b);
  if (flip) x = -x;
  return std::clamp(mu + sigma * x, lo, hi);
}

namespace {

struct TruncatedMoments {
  double mass;
  double pdf_a;
  double pdf_b;
  double a;
  double b;
};

TruncatedMoments truncated_moments(double mu, double sigma, double lo, double hi) {
  if (!(sigma > 0.0) || !(lo < hi)) throw std::domain_error("truncated normal: bad parameters");
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double mass = a > 0.0 ? normal_cdf(-a) - normal_cdf(-b) : normal_cdf(b) - normal_cdf(a);
  return {mass, normal_pdf(a), normal_pdf(b), a, b};
}

}  // namespace

double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
  const auto m = truncated_moments(mu, sigma, lo, hi);
  return mu + sigma * (m.pdf_a - m.pdf_b) / m.mass;
}

double truncated_normal_variance(double mu, double sigma, double lo, double hi) {
  const auto m = truncated_moments(mu, sigma, lo, hi);
  const double shift = (m.pdf_a - m.pdf_b) / m.mass;
  return sigma * sigma * (1.0 + (m.a * m.pdf_a - m.b * m.pdf_b) / m.mass - shift * shift);
}

Matrix sample_wishart(RngStream& rng, std::size_t dim, std::size_t df) {
  if (dim == 0) throw EmptyRequestError("sample_wishart: dim must be >= 1");
  if (df < dim) {
    throw std::domain_error("sample_wishart: df " + std::to_string(df) + " < dim " +
                            std::to_string(dim));
  }
  Matrix a(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double chi2 = 0.0;
    for (std::size_t k = 0; k < df - i; ++k) {
      const double e = standard_normal(rng);
      chi2 += e * e;
    }
    a(i, i) = std::sqrt(chi2);
    for (std::size_t j = 0; j < i; ++j) a(i, j) = standard_normal(rng);
  }
  Matrix w(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += a(i, k) * a(j, k);
      w(i, j) = s;
      w(j, i) = s;
    }
  }
  return w;
}

}  // namespace blockid::numcore
