#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "blockid/numcore/linalg.hpp"
#include "blockid/numcore/matrix.hpp"
#include "blockid/numcore/rng.hpp"

namespace blockid::mixing {

using numcore::Matrix;
using numcore::RngStream;
using numcore::Vector;

inline constexpr double kMixingSlope = 0.2;
inline constexpr std::size_t kDefaultMaxAttempts = 1'000'000;

/// Invertible observation map x = W3 act(W2 act(W1 z)) with LeakyReLU
/// activations between layers and a linear last layer.
class MixingMLP {
 public:
  MixingMLP(std::vector<Matrix> weights, double alpha = kMixingSlope,
            double cond_threshold = std::numeric_limits<double>::infinity(),
            std::vector<std::size_t> attempts = {});

  std::size_t dim() const noexcept { return dim_; }
  double alpha() const noexcept { return alpha_; }
  double cond_threshold() const noexcept { return threshold_; }
  const std::vector<Matrix>& weights() const noexcept { return weights_; }
  /// Rejection-sampling draws per layer (empty for hand-built networks).
  const std::vector<std::size_t>& attempts() const noexcept { return attempts_; }
  const std::vector<double>& layer_condition_numbers() const noexcept { return conds_; }

  Vector apply(std::span<const double> z) const;
  Vector invert(std::span<const double> x) const;
  Matrix apply_rows(const Matrix& z) const;
  Matrix invert_rows(const Matrix& x) const;

  /// Upper bound on the Lipschitz constant of invert.
  double inverse_lipschitz_bound() const noexcept { return inverse_lipschitz_; }

  std::string to_json() const;
  static MixingMLP from_json(const std::string& text);

 private:
  std::size_t dim_;
  double alpha_;
  double threshold_;
  std::vector<Matrix> weights_;
  std::vector<std::size_t> attempts_;
  std::vector<numcore::LuFactorization> lu_;
  std::vector<double> conds_;
  double inverse_lipschitz_ = 1.0;
};

/// dim x dim matrix with U(-1, 1) entries and unit l2-norm columns.
Matrix sample_column_normalized(std::size_t dim, RngStream& rng);

/// Minimum condition number over `trials` column-normalised draws.
double precompute_cond_threshold(std::size_t dim, std::size_t trials, RngStream& rng);

/// Three independently accepted layers; throws ThresholdInfeasibleError when a
/// layer exceeds max_attempts draws.
MixingMLP sample_mixing(std::size_t dim, double threshold, RngStream& rng,
                        std::size_t max_attempts = kDefaultMaxAttempts);

}  // namespace blockid::mixing
