#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blockid/genproc.hpp"
#include "blockid/mixing.hpp"
#include "blockid/numcore/matrix.hpp"
#include "blockid/numcore/rng.hpp"

namespace blockid::eval {

using numcore::Matrix;
using numcore::RngStream;
using numcore::Vector;

inline const std::vector<double> kAlphaGrid{1.0, 0.1, 0.001, 0.0001};
inline const std::vector<double> kGammaGrid{0.01, 0.22, 4.64, 100.0};
inline constexpr std::size_t kMaxJitterEscalations = 3;

/// Per-column centring and scaling. Columns with ~zero spread keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;
  std::vector<std::size_t> constant_columns;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& x) const;
};

/// K[i][j] = exp(-gamma * ||a_i - b_j||^2).
Matrix gaussian_gram(const Matrix& xa, const Matrix& xb, double gamma);

struct KRRModel {
  double alpha = 1.0;        // ridge actually used (after any jitter escalation)
  double gamma = 1.0;
  Matrix train_inputs;       // standardised
  Matrix dual;               // (G + alpha I)^{-1} Y_std
  Standardizer x_scaler;
  Standardizer y_scaler;
  std::size_t jitter_escalations = 0;

  Matrix predict(const Matrix& x) const;
  /// Predictions in standardised target units.
  Matrix predict_standardized(const Matrix& x) const;
};

/// Standardises X and Y, then solves (G + alpha I) W = Y_std by Cholesky.
/// A failed factorisation retries with alpha * 10, at most three times.
KRRModel krr_fit(const Matrix& x, const Matrix& y, double alpha, double gamma);

struct GridSearchResult {
  double alpha = 0.0;
  double gamma = 0.0;
  double score = 0.0;  // mean held-out R^2 of the chosen cell
  Matrix scores;       // [alpha index][gamma index], in the order given
};

/// k-fold CV over the (alpha, gamma) grid; folds are contiguous slices of one
/// seeded shuffle. Ties go to the larger alpha, then the smaller gamma.
GridSearchResult cv_grid_search(const Matrix& x, const Matrix& y, RngStream& rng,
                                std::size_t folds = 3,
                                std::span<const double> alphas = kAlphaGrid,
                                std::span<const double> gammas = kGammaGrid);

/// Same search run for several target blocks at once; each block gets its own
/// choice but all blocks share one factorisation per (fold, alpha, gamma).
std::vector<GridSearchResult> cv_grid_search_blocks(const Matrix& x,
                                                    std::span<const Matrix> blocks,
                                                    RngStream& rng, std::size_t folds = 3,
                                                    std::span<const double> alphas = kAlphaGrid,
                                                    std::span<const double> gammas = kGammaGrid);

struct LinearModel {
  Matrix coef;      // p x t, in original units
  Vector intercept; // t
  bool rank_deficient = false;
  std::vector<std::size_t> constant_columns;

  Matrix predict(const Matrix& x) const;
};

/// Least squares with intercept via normal equations on standardised data,
/// with a 1e-10 ridge.
LinearModel linear_fit(const Matrix& x, const Matrix& y);

/// Per-column R^2. A constant true column scores 1 if matched exactly, else 0.
Vector r2_per_column(const Matrix& y_true, const Matrix& y_pred);
/// Uniform average of r2_per_column.
double r2_score(const Matrix& y_true, const Matrix& y_pred);

struct EvalSizes {
  std::size_t n_fit = 2048;
  std::size_t n_eval = 4096;
};

struct BlockScore {
  double r2 = 0.0;
  Vector per_dim;
};

struct EvalReport {
  BlockScore content_nonlinear, style_nonlinear, content_linear, style_linear;
  GridSearchResult content_choice, style_choice;
  EvalSizes sizes;
  std::uint64_t seed = 0;

  double r2_content_nonlinear() const { return content_nonlinear.r2; }
  double r2_style_nonlinear() const { return style_nonlinear.r2; }
  double r2_content_linear() const { return content_linear.r2; }
  double r2_style_linear() const { return style_linear.r2; }

  std::string to_json() const;
};

/// Batched map from observations to representations.
using Representation = std::function<Matrix(const Matrix&)>;

/// Fresh marginal samples, c^ = g(x); KRR (grid-searched) and linear regression
/// predict the content and the style block from c^ and are scored on held-out data.
EvalReport evaluate_representation(const Representation& encoder,
                                   const genproc::GroundTruthProcess& proc,
                                   const mixing::MixingMLP& mixing, EvalSizes sizes,
                                   RngStream& rng);

}  // namespace blockid::eval
