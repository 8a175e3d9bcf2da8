#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "blockid/encoder/mlp.hpp"

namespace blockid::encoder {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments; buffers mirror the encoder layers.
template <class T>
class AdamState {
 public:
  AdamState(const BasicEncoder<T>& enc, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& l : enc.layers()) {
      first_.push_back({EMatrix<T>::Zero(l.weight.rows(), l.weight.cols()),
                        EVector<T>::Zero(l.bias.size())});
      second_.push_back(first_.back());
    }
  }

  void step(BasicEncoder<T>& enc, const Gradients<T>& grads) {
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    const T b1 = static_cast<T>(cfg_.beta1);
    const T b2 = static_cast<T>(cfg_.beta2);
    const T step_size = static_cast<T>(cfg_.lr / c1);
    const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
    const T eps = static_cast<T>(cfg_.eps);
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m.array() = b1 * m.array() + (T(1) - b1) * g.array();
      v.array() = b2 * v.array() + (T(1) - b2) * g.array().square();
      param.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_c2 + eps);
    };
    auto& layers = enc.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight, first_[l].weight, second_[l].weight, grads[l].weight);
      update(layers[l].bias, first_[l].bias, second_[l].bias, grads[l].bias);
    }
  }

  std::uint64_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  const std::vector<DenseLayer<T>>& first_moments() const noexcept { return first_; }
  const std::vector<DenseLayer<T>>& second_moments() const noexcept { return second_; }

 private:
  AdamConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<DenseLayer<T>> first_;
  std::vector<DenseLayer<T>> second_;
};

}  // namespace blockid::encoder
