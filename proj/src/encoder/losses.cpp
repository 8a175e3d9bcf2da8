#include "blockid/encoder/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "blockid/errors.hpp"

namespace blockid::encoder {

namespace {

void require_pair_shapes(const Matrix& h, const Matrix& h_tilde, const char* who) {
  if (h.rows() != h_tilde.rows() || h.cols() != h_tilde.cols()) {
    throw DimensionError(std::string(who) + ": embedding batches differ in shape");
  }
  if (h.rows() < 2) {
    throw std::invalid_argument(std::string(who) + ": need at least 2 pairs (one negative)");
  }
}

struct Standardized {
  Matrix z;
  std::vector<double> scale;  // sqrt(var + eps)
  bool degenerate = false;
};

Standardized standardize(const Matrix& h) {
  const std::size_t k = h.rows();
  const std::size_t d = h.cols();
  Standardized out{Matrix(k, d), std::vector<double>(d), false};
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < k; ++r) mean += h(r, c);
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (std::size_t r = 0; r < k; ++r) var += (h(r, c) - mean) * (h(r, c) - mean);
    var /= static_cast<double>(k);
    if (var < 1e-10) out.degenerate = true;
    const double s = std::sqrt(var + kBarlowVarianceEps);
    out.scale[c] = s;
    for (std::size_t r = 0; r < k; ++r) out.z(r, c) = (h(r, c) - mean) / s;
  }
  return out;
}

// Backward through column standardisation with biased variance.
Matrix standardize_backward(const Standardized& st, const Matrix& grad_z) {
  const std::size_t k = grad_z.rows();
  const std::size_t d = grad_z.cols();
  Matrix grad_h(k, d);
  for (std::size_t c = 0; c < d; ++c) {
    double mean_g = 0.0;
    double mean_gz = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      mean_g += grad_z(r, c);
      mean_gz += grad_z(r, c) * st.z(r, c);
    }
    mean_g /= static_cast<double>(k);
    mean_gz /= static_cast<double>(k);
    for (std::size_t r = 0; r < k; ++r) {
      grad_h(r, c) = (grad_z(r, c) - mean_g - st.z(r, c) * mean_gz) / st.scale[c];
    }
  }
  return grad_h;
}

}  // namespace

LossValue infonce_l2_loss(const Matrix& h, const Matrix& h_tilde, double tau,
                          Reduction reduction) {
  require_pair_shapes(h, h_tilde, "infonce_l2_loss");
  if (!(tau > 0.0)) throw std::invalid_argument("infonce_l2_loss: tau must be > 0");
  const std::size_t k = h.rows();
  const std::size_t d = h.cols();
  const double scale = reduction == Reduction::mean ? 1.0 / static_cast<double>(k) : 1.0;

  LossValue out{0.0, Matrix(k, d), Matrix(k, d), false};
  std::vector<double> logits(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto hi = h.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      logits[j] = -numcore::squared_distance(hi, h_tilde.row(j)) / tau;
      best = std::max(best, logits[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      logits[j] = std::exp(logits[j] - best);
      denom += logits[j];
    }
    const double align = numcore::squared_distance(hi, h_tilde.row(i)) / tau;
    total += align + best + std::log(denom);

    // logits now hold unnormalised softmax weights p_ij * denom.
    auto gi = out.grad_h.row(i);
    const double two_over_tau = 2.0 * scale / tau;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = hi[c] - h_tilde(i, c);
      gi[c] += two_over_tau * diff;
      out.grad_h_tilde(i, c) -= two_over_tau * diff;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double p = logits[j] / denom;
      if (p == 0.0) continue;
      auto gtj = out.grad_h_tilde.row(j);
      auto htj = h_tilde.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        const double g = two_over_tau * p * (hi[c] - htj[c]);
        gi[c] -= g;
        gtj[c] += g;
      }
    }
  }
  out.value = total * scale;
  return out;
}

Matrix cross_correlation(const Matrix& h, const Matrix& h_tilde) {
  require_pair_shapes(h, h_tilde, "cross_correlation");
  const auto a = standardize(h);
  const auto b = standardize(h_tilde);
  Matrix c = a.z.transposed() * b.z;
  return (1.0 / static_cast<double>(h.rows())) * c;
}

LossValue barlow_twins_loss(const Matrix& h, const Matrix& h_tilde, double lambda) {
  require_pair_shapes(h, h_tilde, "barlow_twins_loss");
  const std::size_t k = h.rows();
  const std::size_t d = h.cols();
  const auto a = standardize(h);
  const auto b = standardize(h_tilde);
  const double inv_k = 1.0 / static_cast<double>(k);
  Matrix corr = inv_k * (a.z.transposed() * b.z);

  LossValue out;
  out.degenerate = a.degenerate || b.degenerate;
  Matrix grad_c(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        const double r = 1.0 - corr(i, i);
        out.value += r * r;
        grad_c(i, i) = -2.0 * r;
      } else {
        out.value += lambda * corr(i, j) * corr(i, j);
        grad_c(i, j) = 2.0 * lambda * corr(i, j);
      }
    }
  }
  // C = Za^T Zb / k  =>  dZa = Zb dC^T / k,  dZb = Za dC / k.
  const Matrix grad_za = inv_k * (b.z * grad_c.transposed());
  const Matrix grad_zb = inv_k * (a.z * grad_c);
  out.grad_h = standardize_backward(a, grad_za);
  out.grad_h_tilde = standardize_backward(b, grad_zb);
  return out;
}

}  // namespace blockid::encoder
