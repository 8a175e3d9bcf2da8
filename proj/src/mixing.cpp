#include "blockid/mixing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "blockid/errors.hpp"
#include "blockid/numcore/distributions.hpp"
#include "json.hpp"

namespace blockid::mixing {

namespace {

void leaky(std::span<double> v, double alpha) noexcept {
  for (double& x : v)
    if (x < 0.0) x *= alpha;
}

void leaky_inverse(std::span<double> v, double alpha) noexcept {
  for (double& x : v)
    if (x < 0.0) x /= alpha;
}

}  // namespace

MixingMLP::MixingMLP(std::vector<Matrix> weights, double alpha, double cond_threshold,
                     std::vector<std::size_t> attempts)
    : dim_(weights.empty() ? 0 : weights.front().rows()),
      alpha_(alpha),
      threshold_(cond_threshold),
      weights_(std::move(weights)),
      attempts_(std::move(attempts)) {
  if (weights_.empty()) throw std::invalid_argument("MixingMLP: no layers");
  if (!(alpha_ > 0.0)) throw std::invalid_argument("MixingMLP: LeakyReLU slope must be > 0");
  for (const auto& w : weights_) {
    if (w.rows() != dim_ || w.cols() != dim_) {
      throw DimensionError("MixingMLP: every layer must be " + std::to_string(dim_) + "x" +
                           std::to_string(dim_));
    }
  }
  lu_.reserve(weights_.size());
  for (const auto& w : weights_) {
    lu_.emplace_back(w);
    const Vector sv = numcore::singular_values(w);
    conds_.push_back(numcore::condition_number(w));
    inverse_lipschitz_ /= sv.back();
  }
  for (std::size_t i = 0; i + 1 < weights_.size(); ++i) inverse_lipschitz_ /= alpha_;
}

Vector MixingMLP::apply(std::span<const double> z) const {
  if (z.size() != dim_) {
    throw DimensionError("MixingMLP::apply: input length " + std::to_string(z.size()) +
                         ", expected " + std::to_string(dim_));
  }
  Vector h(z.begin(), z.end());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = numcore::matvec(weights_[l], h);
    if (l + 1 < weights_.size()) leaky(h, alpha_);
  }
  return h;
}

Vector MixingMLP::invert(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw DimensionError("MixingMLP::invert: input length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(dim_));
  }
  Vector h(x.begin(), x.end());
  for (std::size_t l = weights_.size(); l-- > 0;) {
    if (l + 1 < weights_.size()) leaky_inverse(h, alpha_);
    h = lu_[l].solve(h);
  }
  for (double v : h)
    if (!std::isfinite(v)) throw std::runtime_error("MixingMLP::invert: non-finite solution");
  return h;
}

Matrix MixingMLP::apply_rows(const Matrix& z) const {
  Matrix out(z.rows(), dim_);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const Vector x = apply(z.row(r));
    std::copy(x.begin(), x.end(), out.row(r).begin());
  }
  return out;
}

Matrix MixingMLP::invert_rows(const Matrix& x) const {
  Matrix out(x.rows(), dim_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Vector z = invert(x.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

std::string MixingMLP::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["alpha"] = alpha_;
  // JSON has no infinity; null stands for "no threshold".
  j["cond_threshold"] = std::isfinite(threshold_) ? nlohmann::json(threshold_) : nlohmann::json();
  j["attempts"] = attempts_;
  auto layers = nlohmann::json::array();
  for (const auto& w : weights_) layers.push_back(std::vector<double>(w.data().begin(), w.data().end()));
  j["weights"] = layers;
  return j.dump(2);
}

MixingMLP MixingMLP::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto dim = j.at("dim").get<std::size_t>();
  std::vector<Matrix> weights;
  for (const auto& layer : j.at("weights")) {
    weights.emplace_back(dim, dim, layer.get<std::vector<double>>());
  }
  const double threshold = j.at("cond_threshold").is_null()
                               ? std::numeric_limits<double>::infinity()
                               : j.at("cond_threshold").get<double>();
  return MixingMLP(std::move(weights), j.at("alpha").get<double>(), threshold,
                   j.value("attempts", std::vector<std::size_t>{}));
}

Matrix sample_column_normalized(std::size_t dim, RngStream& rng) {
  const Vector entries = numcore::sample_uniform(rng, -1.0, 1.0, dim * dim);
  Matrix w(dim, dim, entries);
  for (std::size_t c = 0; c < dim; ++c) {
    double norm2 = 0.0;
    for (std::size_t r = 0; r < dim; ++r) norm2 += w(r, c) * w(r, c);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t r = 0; r < dim; ++r) w(r, c) *= inv;
  }
  return w;
}

double precompute_cond_threshold(std::size_t dim, std::size_t trials, RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("precompute_cond_threshold: trials must be >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    best = std::min(best, numcore::condition_number(sample_column_normalized(dim, rng)));
  }
  return best;
}

MixingMLP sample_mixing(std::size_t dim, double threshold, RngStream& rng,
                        std::size_t max_attempts) {
  constexpr std::size_t kLayers = 3;
  std::vector<Matrix> weights;
  std::vector<std::size_t> attempts;
  for (std::size_t l = 0; l < kLayers; ++l) {
    std::size_t tries = 0;
    while (true) {
      if (tries == max_attempts) {
        throw ThresholdInfeasibleError("sample_mixing: layer " + std::to_string(l) +
                                       " exceeded " + std::to_string(max_attempts) +
                                       " draws for threshold " + std::to_string(threshold));
      }
      ++tries;
      Matrix w = sample_column_normalized(dim, rng);
      if (std::isinf(threshold) || numcore::condition_number(w) <= threshold) {
        weights.push_back(std::move(w));
        break;
      }
    }
    attempts.push_back(tries);
  }
  return MixingMLP(std::move(weights), kMixingSlope, threshold, std::move(attempts));
}

}  // namespace blockid::mixing
