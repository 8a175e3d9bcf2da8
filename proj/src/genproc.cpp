#include "blockid/genproc.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

#include "blockid/errors.hpp"
#include "blockid/io.hpp"
#include "blockid/numcore/distributions.hpp"
#include "blockid/numcore/linalg.hpp"

namespace blockid::genproc {

void GenerativeConfig::validate() const {
  if (n_c < 1) throw std::invalid_argument("GenerativeConfig: n_c must be >= 1");
  if (n_s < 1) throw std::invalid_argument("GenerativeConfig: n_s must be >= 1");
  if (!(p_change >= 0.0 && p_change <= 1.0)) {
    throw std::invalid_argument("GenerativeConfig: p_change must lie in [0, 1]");
  }
}

GroundTruthProcess::GroundTruthProcess(Matrix sigma_c, Matrix sigma_s, Vector a, Matrix b,
                                       Matrix sigma_change)
    : sigma_c_(std::move(sigma_c)),
      sigma_s_(std::move(sigma_s)),
      a_(std::move(a)),
      b_(std::move(b)),
      sigma_change_(std::move(sigma_change)) {
  const std::size_t nc = sigma_c_.rows();
  const std::size_t ns = sigma_s_.rows();
  if (!sigma_c_.is_square() || !sigma_s_.is_square() || sigma_change_.rows() != ns ||
      !sigma_change_.is_square() || a_.size() != ns || b_.rows() != ns || b_.cols() != nc) {
    throw DimensionError("GroundTruthProcess: inconsistent block dimensions");
  }
  chol_c_ = numcore::cholesky(sigma_c_);
  chol_s_ = numcore::cholesky(sigma_s_);
  chol_change_ = numcore::cholesky(sigma_change_);

  if (ns <= kMaxMemoStyleDim) {
    const std::uint64_t subsets = std::uint64_t{1} << ns;
    subset_factors_.resize(subsets);
    std::vector<std::size_t> idx;
    for (std::uint64_t mask = 1; mask < subsets; ++mask) {
      idx.clear();
      for (std::size_t j = 0; j < ns; ++j)
        if (mask & (std::uint64_t{1} << j)) idx.push_back(j);
      subset_factors_[mask] = numcore::cholesky(sigma_change_.principal(idx));
    }
  }
}

std::uint64_t GroundTruthProcess::mask_of(std::span<const std::size_t> change_set) {
  std::uint64_t mask = 0;
  for (std::size_t j : change_set) mask |= std::uint64_t{1} << j;
  return mask;
}

Matrix GroundTruthProcess::change_factor(std::span<const std::size_t> change_set) const {
  if (change_set.empty()) return Matrix();
  for (std::size_t j : change_set)
    if (j >= n_s()) throw DimensionError("change_factor: style index out of range");
  if (!subset_factors_.empty()) return subset_factors_[mask_of(change_set)];
  return numcore::cholesky(sigma_change_.principal(change_set));
}

GroundTruthProcess build_process(const GenerativeConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t nc = cfg.n_c;
  const std::size_t ns = cfg.n_s;
  Matrix sigma_c = Matrix::identity(nc);
  Matrix sigma_s = Matrix::identity(ns);
  Matrix sigma_change = Matrix::identity(ns);
  if (cfg.stat_dep) {
    sigma_c = numcore::sample_wishart(rng, nc, nc);
    sigma_s = numcore::sample_wishart(rng, ns, ns);
    sigma_change = numcore::sample_wishart(rng, ns, ns);
  }
  Vector a(ns, 0.0);
  Matrix b(ns, nc);
  if (cfg.causal_dep) {
    a = numcore::sample_standard_normal(rng, ns);
    const Vector bv = numcore::sample_standard_normal(rng, ns * nc);
    b = Matrix(ns, nc, bv);
  }
  return GroundTruthProcess(std::move(sigma_c), std::move(sigma_s), std::move(a), std::move(b),
                            std::move(sigma_change));
}

namespace {

// out = mean + L * eps, eps drawn fresh.
Vector correlated_normal(const Matrix& lower, std::span<const double> mean, RngStream& rng) {
  const std::size_t n = lower.rows();
  Vector eps(n);
  for (double& e : eps) e = numcore::standard_normal(rng);
  Vector out(mean.begin(), mean.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += lower(i, k) * eps[k];
    out[i] += s;
  }
  return out;
}

}  // namespace

Vector sample_content(const GroundTruthProcess& proc, RngStream& rng) {
  const Vector zero(proc.n_c(), 0.0);
  return correlated_normal(proc.chol_c(), zero, rng);
}

Vector sample_style_given_content(const GroundTruthProcess& proc, std::span<const double> c,
                                  RngStream& rng) {
  if (c.size() != proc.n_c()) {
    throw DimensionError("sample_style_given_content: content has length " +
                         std::to_string(c.size()) + ", expected " + std::to_string(proc.n_c()));
  }
  Vector mean = numcore::matvec(proc.b(), c);
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += proc.a()[i];
  return correlated_normal(proc.chol_s(), mean, rng);
}

std::vector<std::size_t> sample_change_set(const GenerativeConfig& cfg, RngStream& rng) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < cfg.n_s; ++j)
    if (rng.next_double() < cfg.p_change) out.push_back(j);
  return out;
}

Vector sample_style_change(const GroundTruthProcess& proc, std::span<const double> s,
                           std::span<const std::size_t> change_set, RngStream& rng) {
  if (s.size() != proc.n_s()) throw DimensionError("sample_style_change: style length mismatch");
  Vector out(s.begin(), s.end());
  if (change_set.empty()) return out;
  const Matrix factor = proc.change_factor(change_set);
  Vector sub(change_set.size());
  for (std::size_t i = 0; i < change_set.size(); ++i) sub[i] = s[change_set[i]];
  const Vector moved = correlated_normal(factor, sub, rng);
  for (std::size_t i = 0; i < change_set.size(); ++i) out[change_set[i]] = moved[i];
  return out;
}

LatentPair sample_pair(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                       RngStream& rng) {
  const Vector c = sample_content(proc, rng);
  const Vector s = sample_style_given_content(proc, c, rng);
  LatentPair pair;
  pair.change_set = sample_change_set(cfg, rng);
  const Vector s_tilde = sample_style_change(proc, s, pair.change_set, rng);
  pair.z = c;
  pair.z.insert(pair.z.end(), s.begin(), s.end());
  pair.z_tilde = c;
  pair.z_tilde.insert(pair.z_tilde.end(), s_tilde.begin(), s_tilde.end());
  return pair;
}

Matrix sample_marginal(const GroundTruthProcess& proc, std::size_t k, RngStream& rng) {
  const std::size_t n = proc.n_c() + proc.n_s();
  Matrix z(k, n);
  for (std::size_t r = 0; r < k; ++r) {
    const Vector c = sample_content(proc, rng);
    const Vector s = sample_style_given_content(proc, c, rng);
    auto row = z.row(r);
    std::copy(c.begin(), c.end(), row.begin());
    std::copy(s.begin(), s.end(), row.begin() + static_cast<std::ptrdiff_t>(c.size()));
  }
  return z;
}

Batch generate_batch(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                     const ObservationMap& mixing, std::size_t observation_dim, std::size_t k,
                     RngStream& rng) {
  const std::size_t n = proc.n_c() + proc.n_s();
  if (cfg.n_c != proc.n_c() || cfg.n_s != proc.n_s()) {
    throw DimensionError("generate_batch: config and process dimensions differ");
  }
  Batch batch{Matrix(k, observation_dim), Matrix(k, observation_dim), Matrix(k, n),
              Matrix(k, n)};
  for (std::size_t r = 0; r < k; ++r) {
    const LatentPair pair = sample_pair(proc, cfg, rng);
    const Vector x = mixing(pair.z);
    const Vector xt = mixing(pair.z_tilde);
    if (x.size() != observation_dim || xt.size() != observation_dim) {
      throw DimensionError("generate_batch: observation map returned length " +
                           std::to_string(x.size()) + ", expected " +
                           std::to_string(observation_dim));
    }
    std::copy(pair.z.begin(), pair.z.end(), batch.z.row(r).begin());
    std::copy(pair.z_tilde.begin(), pair.z_tilde.end(), batch.z_tilde.row(r).begin());
    std::copy(x.begin(), x.end(), batch.x.row(r).begin());
    std::copy(xt.begin(), xt.end(), batch.x_tilde.row(r).begin());
  }
  return batch;
}

Batch generate_batch(const GroundTruthProcess& proc, const GenerativeConfig& cfg,
                     const mixing::MixingMLP& mixing, std::size_t k, RngStream& rng) {
  if (mixing.dim() != proc.n_c() + proc.n_s()) {
    throw DimensionError("generate_batch: mixing input dim " + std::to_string(mixing.dim()) +
                         " does not match latent dim " +
                         std::to_string(proc.n_c() + proc.n_s()));
  }
  return generate_batch(
      proc, cfg, [&mixing](std::span<const double> z) { return mixing.apply(z); }, mixing.dim(),
      k, rng);
}

void write_batch_csv(const Batch& batch, const std::filesystem::path& path) {
  const std::size_t n = batch.z.cols();
  const std::size_t d = batch.x.cols();
  std::ostringstream out;
  bool first = true;
  auto header = [&](const char* prefix, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i) {
      out << (first ? "" : ",") << prefix << i;
      first = false;
    }
  };
  header("z_", n);
  header("ztilde_", n);
  header("x_", d);
  header("xtilde_", d);
  out << '\n';
  for (std::size_t r = 0; r < batch.z.rows(); ++r) {
    first = true;
    for (const Matrix* m : {&batch.z, &batch.z_tilde, &batch.x, &batch.x_tilde}) {
      for (double v : m->row(r)) {
        out << (first ? "" : ",") << io::format_double(v);
        first = false;
      }
    }
    out << '\n';
  }
  io::write_file_atomic(path, out.str());
}

}  // namespace blockid::genproc
