#pragma once

#include "blockid/numcore/matrix.hpp"

namespace blockid::encoder {

using numcore::Matrix;

enum class Reduction { mean, sum };

inline constexpr double kBarlowVarianceEps = 1e-8;

/// Loss value with its gradients with respect to both embedding batches.
struct LossValue {
  double value = 0.0;
  Matrix grad_h;
  Matrix grad_h_tilde;
  bool degenerate = false;  // set when a standardised dimension had ~zero variance
};

/// InfoNCE with similarity -||u - v||^2:
///   sum_i ||h_i - h~_i||^2 / tau + log sum_j exp(-||h_i - h~_j||^2 / tau),
/// averaged (or summed) over anchors i. The j = i term stays in the denominator.
LossValue infonce_l2_loss(const Matrix& h, const Matrix& h_tilde, double tau = 1.0,
                          Reduction reduction = Reduction::mean);

/// sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2 with C the batch
/// cross-correlation of the standardised embeddings (biased variance).
LossValue barlow_twins_loss(const Matrix& h, const Matrix& h_tilde, double lambda);

/// Batch cross-correlation used by barlow_twins_loss.
Matrix cross_correlation(const Matrix& h, const Matrix& h_tilde);

}  // namespace blockid::encoder
