#pragma once

#include <cstddef>

#include "blockid/numcore/matrix.hpp"
#include "blockid/numcore/rng.hpp"

namespace blockid::numcore {

/// Standard normal CDF, computed as erfc(-x/sqrt 2)/2.
double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;
/// Inverse of normal_cdf on (0, 1). Rational initial guess refined by Newton steps.
double normal_quantile(double p);

/// One standard normal draw (Box-Muller, cosine branch only).
double standard_normal(RngStream& rng) noexcept;

Vector sample_standard_normal(RngStream& rng, std::size_t n);
Vector sample_uniform(RngStream& rng, double lo, double hi, std::size_t n);

/// N(mu, sigma^2) conditioned on [lo, hi], drawn by inverse CDF on the truncated interval.
double sample_truncated_normal(RngStream& rng, double mu, double sigma, double lo, double hi);
/// Closed-form mean of the truncated normal.
double truncated_normal_mean(double mu, double sigma, double lo, double hi);
double truncated_normal_variance(double mu, double sigma, double lo, double hi);

/// Wishart(I, df) of size dim x dim via the Bartlett decomposition.
Matrix sample_wishart(RngStream& rng, std::size_t dim, std::size_t df);

}  // namespace blockid::numcore
