#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockid/errors.hpp"
#include "blockid/numcore/matrix.hpp"
#include "blockid/numcore/rng.hpp"

namespace blockid::encoder {

template <class T>
using EMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using EVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline constexpr double kEncoderSlope = 0.01;

/// Hidden widths are multipliers of the input dimension.
struct Architecture {
  std::size_t input_dim = 10;
  std::size_t output_dim = 5;
  std::vector<std::size_t> hidden_multipliers{10, 50, 50, 50, 50, 10};
  double slope = kEncoderSlope;

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input_dim};
    for (std::size_t m : hidden_multipliers) w.push_back(m * input_dim);
    w.push_back(output_dim);
    return w;
  }
  std::size_t layer_count() const noexcept { return hidden_multipliers.size() + 1; }
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <class T>
struct DenseLayer {
  EMatrix<T> weight;  // out x in
  EVector<T> bias;    // out
};

/// Per-layer parameter gradients, same shapes as the encoder layers.
template <class T>
using Gradients = std::vector<DenseLayer<T>>;

/// Fully connected LeakyReLU network; the last layer is linear.
template <class T>
class BasicEncoder {
 public:
  using Scalar = T;

  /// All parameters zero.
  explicit BasicEncoder(Architecture arch) : arch_(std::move(arch)) {
    if (arch_.input_dim == 0 || arch_.output_dim == 0) {
      throw std::invalid_argument("encoder: dimensions must be >= 1");
    }
    const auto w = arch_.widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      layers_.push_back({EMatrix<T>::Zero(static_cast<Eigen::Index>(w[l + 1]),
                                          static_cast<Eigen::Index>(w[l])),
                         EVector<T>::Zero(static_cast<Eigen::Index>(w[l + 1]))});
    }
  }

  /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static BasicEncoder initialized(Architecture arch, numcore::RngStream& rng) {
    BasicEncoder enc(std::move(arch));
    for (auto& layer : enc.layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
        layer.weight.data()[i] = static_cast<T>(bound * (2.0 * rng.next_double() - 1.0));
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
        layer.bias[i] = static_cast<T>(bound * (2.0 * rng.next_double() - 1.0));
    }
    return enc;
  }

  const Architecture& architecture() const noexcept { return arch_; }
  std::vector<DenseLayer<T>>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer<T>>& layers() const noexcept { return layers_; }
  T slope() const noexcept { return static_cast<T>(arch_.slope); }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  bool all_finite() const noexcept {
    for (const auto& l : layers_)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  template <class U>
  BasicEncoder<U> cast() const {
    BasicEncoder<U> out(arch_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      out.layers()[l].weight = layers_[l].weight.template cast<U>();
      out.layers()[l].bias = layers_[l].bias.template cast<U>();
    }
    return out;
  }

  friend bool operator==(const BasicEncoder& a, const BasicEncoder& b) {
    if (!(a.arch_ == b.arch_)) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l) {
      if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias)
        return false;
    }
    return true;
  }

 private:
  Architecture arch_;
  std::vector<DenseLayer<T>> layers_;
};

/// Activations kept by forward() for the backward pass.
template <class T>
struct ForwardCache {
  std::vector<EMatrix<T>> inputs;  // input to each layer
  std::vector<EMatrix<T>> pre;     // pre-activation of each layer
};

template <class T>
EMatrix<T> forward(const BasicEncoder<T>& enc, const EMatrix<T>& x,
                   ForwardCache<T>* cache = nullptr) {
  const auto& layers = enc.layers();
  if (static_cast<std::size_t>(x.cols()) != enc.architecture().input_dim) {
    throw DimensionError("encoder forward: input has " + std::to_string(x.cols()) +
                         " columns, expected " + std::to_string(enc.architecture().input_dim));
  }
  if (cache) {
    cache->inputs.resize(layers.size());
    cache->pre.resize(layers.size());
  }
  const T slope = enc.slope();
  EMatrix<T> h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    EMatrix<T> z(h.rows(), layers[l].weight.rows());
    z.noalias() = h * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    if (cache) cache->inputs[l] = std::move(h);
    if (l + 1 < layers.size()) {
      // max(z, slope*z) is LeakyReLU for slope <= 1 and vectorises, unlike a branch.
      h = slope <= T(1) ? EMatrix<T>(z.cwiseMax(slope * z)) : EMatrix<T>(z.cwiseMin(slope * z));
    } else {
      h = z;
    }
    if (cache) cache->pre[l] = std::move(z);
  }
  return h;
}

/// Exact reverse-mode gradients of a scalar loss given dLoss/dOutput.
template <class T>
Gradients<T> backward(const BasicEncoder<T>& enc, const ForwardCache<T>& cache,
                      const EMatrix<T>& grad_out) {
  const auto& layers = enc.layers();
  if (cache.pre.size() != layers.size()) {
    throw std::logic_error("encoder backward: forward cache missing");
  }
  const T slope = enc.slope();
  Gradients<T> grads(layers.size());
  EMatrix<T> delta = grad_out;
  for (std::size_t l = layers.size(); l-- > 0;) {
    grads[l].weight.noalias() = delta.transpose() * cache.inputs[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    EMatrix<T> upstream(delta.rows(), layers[l].weight.cols());
    upstream.noalias() = delta * layers[l].weight;
    const auto& pre = cache.pre[l - 1];
    delta.resize(upstream.rows(), upstream.cols());
    delta.array() = upstream.array() * ((pre.array() < T(0)).template cast<T>() * (slope - T(1)) + T(1));
  }
  return grads;
}

template <class T>
EMatrix<T> to_eigen(const numcore::Matrix& m) {
  EMatrix<T> out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = static_cast<T>(m.data()[i]);
  return out;
}

template <class T>
numcore::Matrix from_eigen(const EMatrix<T>& m) {
  numcore::Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = static_cast<double>(m.data()[i]);
  return out;
}

/// Batched forward on a numcore matrix.
template <class T>
numcore::Matrix forward(const BasicEncoder<T>& enc, const numcore::Matrix& x) {
  return from_eigen<T>(forward(enc, to_eigen<T>(x)));
}

}  // namespace blockid::encoder
