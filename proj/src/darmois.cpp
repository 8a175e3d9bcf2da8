#include "blockid/darmois.hpp"

#include <stdexcept>
#include <string>

#include "blockid/errors.hpp"
#include "blockid/numcore/distributions.hpp"
#include "blockid/numcore/linalg.hpp"

namespace blockid::darmois {

GaussianChain build_chain(std::span<const double> mean, const Matrix& covariance) {
  if (!covariance.is_square() || covariance.rows() != mean.size()) {
    throw DimensionError("build_chain: covariance must be square with the mean's dimension");
  }
  GaussianChain chain;
  chain.mean.assign(mean.begin(), mean.end());
  chain.covariance = covariance;
  chain.lower = numcore::cholesky(covariance);
  const std::size_t n = mean.size();
  chain.conditional_std.resize(n);
  chain.coefficients.resize(n);
  // w_i^T = L[i, <i] * L[<i, <i]^{-1}, i.e. solve L[<i,<i]^T w_i = L[i, <i]^T.
  for (std::size_t i = 0; i < n; ++i) {
    chain.conditional_std[i] = chain.lower(i, i);
    Vector w(chain.lower.row(i).begin(), chain.lower.row(i).begin() + static_cast<std::ptrdiff_t>(i));
    for (std::size_t jj = i; jj-- > 0;) {
      double s = w[jj];
      for (std::size_t k = jj + 1; k < i; ++k) s -= chain.lower(k, jj) * w[k];
      w[jj] = s / chain.lower(jj, jj);
    }
    chain.coefficients[i] = std::move(w);
  }
  return chain;
}

Vector darmois_map(const GaussianChain& chain, std::span<const double> c) {
  if (c.size() != chain.dim()) {
    throw DimensionError("darmois_map: input has length " + std::to_string(c.size()) +
                         ", expected " + std::to_string(chain.dim()));
  }
  Vector u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double cond_mean = chain.mean[i];
    const auto& w = chain.coefficients[i];
    for (std::size_t k = 0; k < i; ++k) cond_mean += w[k] * (c[k] - chain.mean[k]);
    u[i] = numcore::normal_cdf((c[i] - cond_mean) / chain.conditional_std[i]);
  }
  return u;
}

Matrix darmois_map_rows(const GaussianChain& chain, const Matrix& c) {
  Matrix out(c.rows(), chain.dim());
  for (std::size_t r = 0; r < c.rows(); ++r) {
    const Vector u = darmois_map(chain, c.row(r));
    std::copy(u.begin(), u.end(), out.row(r).begin());
  }
  return out;
}

eval::Representation ideal_encoder(const mixing::MixingMLP& mixing, GaussianChain chain) {
  if (chain.dim() > mixing.dim()) {
    throw DimensionError("ideal_encoder: content dimension exceeds mixing dimension");
  }
  return [&mixing, chain = std::move(chain)](const Matrix& x) {
    Matrix out(x.rows(), chain.dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const Vector z = mixing.invert(x.row(r));
      const Vector u =
          darmois_map(chain, std::span<const double>(z.data(), chain.dim()));
      std::copy(u.begin(), u.end(), out.row(r).begin());
    }
    return out;
  };
}

}  // namespace blockid::darmois
