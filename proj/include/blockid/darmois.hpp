#pragma once

#include <span>
#include <vector>

#include "blockid/eval.hpp"
#include "blockid/mixing.hpp"
#include "blockid/numcore/matrix.hpp"

namespace blockid::darmois {

using numcore::Matrix;
using numcore::Vector;

/// Sequential conditionals of a Gaussian: c_i | c_{<i} ~ N(mean_i + w_i . (c_{<i} - mean_{<i}), sd_i^2).
struct GaussianChain {
  Vector mean;
  Matrix covariance;
  Matrix lower;                      // Cholesky factor of covariance
  std::vector<Vector> coefficients;  // w_i, length i
  Vector conditional_std;            // sd_i = lower(i, i)

  std::size_t dim() const noexcept { return mean.size(); }
};

GaussianChain build_chain(std::span<const double> mean, const Matrix& covariance);

/// u_i = Phi((c_i - E[c_i | c_{<i}]) / sd_i); uniform on (0,1)^n for c ~ N(mean, covariance).
Vector darmois_map(const GaussianChain& chain, std::span<const double> c);
Matrix darmois_map_rows(const GaussianChain& chain, const Matrix& c);

/// x -> darmois_map(first n_c coordinates of f^{-1}(x)). Holds a reference to
/// `mixing`, which must outlive the returned function.
eval::Representation ideal_encoder(const mixing::MixingMLP& mixing, GaussianChain chain);

}  // namespace blockid::darmois
