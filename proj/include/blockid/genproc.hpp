#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "blockid/mixing.hpp"
#include "blockid/numcore/matrix.hpp"
#include "blockid/numcore/rng.hpp"

namespace blockid::genproc {

using numcore::Matrix;
using numcore::RngStream;
using numcore::Vector;

struct GenerativeConfig {
  std::size_t n_c = 5;
  std::size_t n_s = 5;
  double p_change = 0.75;
  bool stat_dep = false;   // Wishart covariances instead of identities
  bool causal_dep = false; // style mean a + B c instead of 0
  std::uint64_t seed = 0;

  std::size_t latent_dim() const noexcept { return n_c + n_s; }
  void validate() const;
};

/// Latent model: c ~ N(0, Sigma_c), s | c ~ N(a + B c, Sigma_s), and style
/// changes s~_A | s_A ~ N(s_A, Sigma(A)). Immutable once built.
class GroundTruthProcess {
 public:
  GroundTruthProcess(Matrix sigma_c, Matrix sigma_s, Vector a, Matrix b, Matrix sigma_change);

  std::size_t n_c() const noexcept { return sigma_c_.rows(); }
  std::size_t n_s() const noexcept { return sigma_s_.rows(); }

  const Matrix& sigma_c() const noexcept { return sigma_c_; }
  const Matrix& sigma_s() const noexcept { return sigma_s_; }
  const Vector& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  const Matrix& sigma_change() const noexcept { return sigma_change_; }

  const Matrix& chol_c() const noexcept { return chol_c_; }
  const Matrix& chol_s() const noexcept { return chol_s_; }
  const Matrix& chol_change() const noexcept { return chol_change_; }

  /// Cholesky factor of the principal submatrix Sigma(A), for sorted indices A.
  Matrix change_factor(std::span<const std::size_t> change_set) const;

 private:
  static std::uint64_t mask_of(std::span<const std::size_t> change_set);

  Matrix sigma_c_, sigma_s_;
  Vector a_;
  Matrix b_;
  Matrix sigma_change_;
  Matrix chol_c_, chol_s_, chol_change_;
  // Indexed by bitmask of A; populated for n_s <= kMaxMemoStyleDim.
  std::vector<Matrix> subset_factors_;
};

inline constexpr std::size_t kMaxMemoStyleDim = 16;

struct LatentPair {
  Vector z;        // (c, s)
  Vector z_tilde;  // (c, s~)
  std::vector<std::size_t> change_set;  // zero-based style indices, ascending
};

/// Observations and latents of k pairs, one pair per row.
struct Batch {
  Matrix x, x_tilde, z, z_tilde;
};

/// Any observation map; MixingMLP::apply is the usual one.
using ObservationMap = std::function<Vector(std::span<const double>)>;

GroundTruthProcess build_process(const GenerativeConfig& cfg, RngStream& rng);

Vector sample_content(const GroundTruthProcess& proc, RngStream& rng);
Vector sample_style_given_content(const GroundTruthProcess& proc, std::span<const double> c,
                                  RngStream& rng);
std::vector<std::size_t> sample_change_set(const GenerativeConfig& cfg, RngStream& rng);
/// s~ with the indices in change_set perturbed by N(0, Sigma(A)), all others copied.
Vector sample_style_change(const GroundTruthProcess& proc, std::span<const double> s,
                           std::span<const std::size_t> change_set, RngStream& rng);
LatentPair sample_pair(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                       RngStream& rng);

/// k latent draws z = (c, s) from the marginal, one per row.
Matrix sample_marginal(const GroundTruthProcess& proc, std::size_t k, RngStream& rng);

Batch generate_batch(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                     const ObservationMap& mixing, std::size_t observation_dim, std::size_t k,
                     RngStream& rng);
Batch generate_batch(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                     const mixing::MixingMLP& mixing, std::size_t k, RngStream& rng);

/// CSV with header z_*, ztilde_*, x_*, xtilde_* and 17 significant digits.
void write_batch_csv(const Batch& batch, const std::filesystem::path& path);

}  // namespace blockid::genproc
