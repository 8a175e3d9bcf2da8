#include "blockid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "blockid/errors.hpp"
#include "blockid/numcore/linalg.hpp"
#include "json.hpp"

namespace blockid::eval {

namespace {

constexpr double kConstantColumnScale = 1e-12;
constexpr double kLinearRidge = 1e-10;

void require_same_rows(const Matrix& x, const Matrix& y, const char* who) {
  if (x.rows() != y.rows()) {
    throw DimensionError(std::string(who) + ": X has " + std::to_string(x.rows()) +
                         " rows, Y has " + std::to_string(y.rows()));
  }
}

// Solves (G + alpha I) W = Y; escalates alpha tenfold on factorisation failure.
Matrix solve_regularized(const Matrix& gram, const Matrix& y, double& alpha,
                         std::size_t& escalations) {
  for (escalations = 0;; ++escalations) {
    Matrix reg = gram;
    for (std::size_t i = 0; i < reg.rows(); ++i) reg(i, i) += alpha;
    try {
      const Matrix l = numcore::cholesky(reg);
      return numcore::cholesky_solve(l, y);
    } catch (const DecompositionError& e) {
      if (escalations == kMaxJitterEscalations) throw;
      std::cerr << "warning: KRR Cholesky failed at alpha=" << alpha << " (" << e.what()
                << "); retrying with alpha=" << alpha * 10.0 << '\n';
      alpha *= 10.0;
    }
  }
}

Matrix multiply_gram(const Matrix& k, const Matrix& w) { return k * w; }

std::vector<std::size_t> shuffled_indices(std::size_t m, RngStream& rng) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = m; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t m = x.rows();
  const std::size_t p = x.cols();
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  if (m == 0) return s;
  for (std::size_t c = 0; c < p; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += x(r, c);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t r = 0; r < m; ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= static_cast<double>(m);
    s.mean[c] = mean;
    const double sd = std::sqrt(var);
    if (sd <= kConstantColumnScale * std::max(1.0, std::abs(mean))) {
      s.constant_columns.push_back(c);
    } else {
      s.scale[c] = sd;
    }
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DimensionError("Standardizer::apply: column mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / scale[c];
  return out;
}

Matrix Standardizer::invert(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DimensionError("Standardizer::invert: column mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * scale[c] + mean[c];
  return out;
}

Matrix gaussian_gram(const Matrix& xa, const Matrix& xb, double gamma) {
  if (xa.cols() != xb.cols()) throw DimensionError("gaussian_gram: feature count mismatch");
  Matrix k(xa.rows(), xb.rows());
  for (std::size_t i = 0; i < xa.rows(); ++i) {
    auto ai = xa.row(i);
    auto ki = k.row(i);
    for (std::size_t j = 0; j < xb.rows(); ++j) {
      ki[j] = std::exp(-gamma * numcore::squared_distance(ai, xb.row(j)));
    }
  }
  return k;
}

Matrix KRRModel::predict_standardized(const Matrix& x) const {
  const Matrix xs = x_scaler.apply(x);
  return multiply_gram(gaussian_gram(xs, train_inputs, gamma), dual);
}

Matrix KRRModel::predict(const Matrix& x) const { return y_scaler.invert(predict_standardized(x)); }

KRRModel krr_fit(const Matrix& x, const Matrix& y, double alpha, double gamma) {
  require_same_rows(x, y, "krr_fit");
  if (x.rows() < 2) throw std::invalid_argument("krr_fit: need at least 2 samples");
  KRRModel model;
  model.gamma = gamma;
  model.alpha = alpha;
  model.x_scaler = Standardizer::fit(x);
  model.y_scaler = Standardizer::fit(y);
  model.train_inputs = model.x_scaler.apply(x);
  const Matrix gram = gaussian_gram(model.train_inputs, model.train_inputs, gamma);
  model.dual =
      solve_regularized(gram, model.y_scaler.apply(y), model.alpha, model.jitter_escalations);
  return model;
}

std::vector<GridSearchResult> cv_grid_search_blocks(const Matrix& x,
                                                    std::span<const Matrix> blocks,
                                                    RngStream& rng, std::size_t folds,
                                                    std::span<const double> alphas,
                                                    std::span<const double> gammas) {
  const std::size_t m = x.rows();
  if (folds < 2) throw std::invalid_argument("cv_grid_search: folds must be >= 2");
  if (m < folds) throw std::invalid_argument("cv_grid_search: fewer samples than folds");
  if (alphas.empty() || gammas.empty()) throw std::invalid_argument("cv_grid_search: empty grid");
  if (blocks.empty()) throw std::invalid_argument("cv_grid_search: no target blocks");
  for (const auto& b : blocks) require_same_rows(x, b, "cv_grid_search");

  // All blocks side by side; column ranges remember which block is which.
  Matrix y = blocks[0];
  std::vector<std::size_t> offsets{0, blocks[0].cols()};
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    y = numcore::hcat(y, blocks[b]);
    offsets.push_back(y.cols());
  }

  const auto perm = shuffled_indices(m, rng);
  std::vector<Matrix> scores(blocks.size(), Matrix(alphas.size(), gammas.size()));
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * m / folds;
    const std::size_t hi = (f + 1) * m / folds;
    std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                                  perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(lo));
    train.insert(train.end(), perm.begin() + static_cast<std::ptrdiff_t>(hi), perm.end());

    const Matrix x_train = x.select_rows(train);
    const Matrix y_train = y.select_rows(train);
    const Matrix x_test = x.select_rows(test);
    const Matrix y_test = y.select_rows(test);
    const auto xs = Standardizer::fit(x_train);
    const auto ys = Standardizer::fit(y_train);
    const Matrix xtr = xs.apply(x_train);
    const Matrix xte = xs.apply(x_test);
    const Matrix ytr = ys.apply(y_train);

    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      const Matrix gram = gaussian_gram(xtr, xtr, gammas[gi]);
      const Matrix cross = gaussian_gram(xte, xtr, gammas[gi]);
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        double alpha = alphas[ai];
        std::size_t escalations = 0;
        const Matrix dual = solve_regularized(gram, ytr, alpha, escalations);
        const Matrix pred = ys.invert(multiply_gram(cross, dual));
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          const std::size_t width = offsets[b + 1] - offsets[b];
          scores[b](ai, gi) += r2_score(y_test.col_block(offsets[b], width),
                                        pred.col_block(offsets[b], width)) /
                               static_cast<double>(folds);
        }
      }
    }
  }

  // Visit stronger regularisation first so that exact ties keep it.
  std::vector<std::size_t> alpha_order(alphas.size());
  std::iota(alpha_order.begin(), alpha_order.end(), std::size_t{0});
  std::stable_sort(alpha_order.begin(), alpha_order.end(),
                   [&](std::size_t a, std::size_t b) { return alphas[a] > alphas[b]; });
  std::vector<std::size_t> gamma_order(gammas.size());
  std::iota(gamma_order.begin(), gamma_order.end(), std::size_t{0});
  std::stable_sort(gamma_order.begin(), gamma_order.end(),
                   [&](std::size_t a, std::size_t b) { return gammas[a] < gammas[b]; });

  std::vector<GridSearchResult> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    GridSearchResult best;
    best.score = -std::numeric_limits<double>::infinity();
    for (std::size_t ai : alpha_order) {
      for (std::size_t gi : gamma_order) {
        if (scores[b](ai, gi) > best.score) {
          best.score = scores[b](ai, gi);
          best.alpha = alphas[ai];
          best.gamma = gammas[gi];
        }
      }
    }
    best.scores = scores[b];
    out.push_back(std::move(best));
  }
  return out;
}

GridSearchResult cv_grid_search(const Matrix& x, const Matrix& y, RngStream& rng,
                                std::size_t folds, std::span<const double> alphas,
                                std::span<const double> gammas) {
  const Matrix blocks[] = {y};
  return cv_grid_search_blocks(x, blocks, rng, folds, alphas, gammas).front();
}

Matrix LinearModel::predict(const Matrix& x) const {
  if (x.cols() != coef.rows()) throw DimensionError("LinearModel::predict: feature mismatch");
  Matrix out = x * coef;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += intercept[c];
  return out;
}

LinearModel linear_fit(const Matrix& x, const Matrix& y) {
  require_same_rows(x, y, "linear_fit");
  const std::size_t m = x.rows();
  const std::size_t p = x.cols();
  if (m <= p) throw std::invalid_argument("linear_fit: need more samples than features");
  const auto xs = Standardizer::fit(x);
  const auto ys = Standardizer::fit(y);
  const Matrix xz = xs.apply(x);
  const Matrix yz = ys.apply(y);
  const Matrix xt = xz.transposed();
  Matrix normal = xt * xz;
  const Matrix rhs = xt * yz;
  double diag_max = 0.0;
  for (std::size_t i = 0; i < p; ++i) diag_max = std::max(diag_max, normal(i, i));
  for (std::size_t i = 0; i < p; ++i) normal(i, i) += kLinearRidge;
  const Matrix l = numcore::cholesky(normal);

  LinearModel model;
  model.constant_columns = xs.constant_columns;
  for (std::size_t i = 0; i < p; ++i) {
    if (l(i, i) * l(i, i) < 1e-8 * std::max(diag_max, 1.0)) model.rank_deficient = true;
  }
  if (!model.constant_columns.empty()) model.rank_deficient = true;
  const Matrix beta = numcore::cholesky_solve(l, rhs);

  const std::size_t t = y.cols();
  model.coef = Matrix(p, t);
  model.intercept.assign(t, 0.0);
  for (std::size_t c = 0; c < t; ++c) {
    double shift = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      model.coef(j, c) = beta(j, c) * ys.scale[c] / xs.scale[j];
      shift += model.coef(j, c) * xs.mean[j];
    }
    model.intercept[c] = ys.mean[c] - shift;
  }
  return model;
}

Vector r2_per_column(const Matrix& y_true, const Matrix& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols()) {
    throw DimensionError("r2_score: shape mismatch");
  }
  const std::size_t m = y_true.rows();
  if (m < 2) throw std::invalid_argument("r2_score: need at least 2 samples");
  Vector out(y_true.cols());
  for (std::size_t c = 0; c < y_true.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += y_true(r, c);
    mean /= static_cast<double>(m);
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      ss_tot += (y_true(r, c) - mean) * (y_true(r, c) - mean);
      ss_res += (y_true(r, c) - y_pred(r, c)) * (y_true(r, c) - y_pred(r, c));
    }
    if (ss_tot == 0.0) {
      out[c] = ss_res == 0.0 ? 1.0 : 0.0;
    } else {
      out[c] = 1.0 - ss_res / ss_tot;
    }
  }
  return out;
}

double r2_score(const Matrix& y_true, const Matrix& y_pred) {
  const Vector per = r2_per_column(y_true, y_pred);
  if (per.empty()) throw std::invalid_argument("r2_score: no target columns");
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

std::string EvalReport::to_json() const {
  auto block = [](const BlockScore& s) {
    return nlohmann::json{{"r2", s.r2}, {"per_dim", s.per_dim}};
  };
  auto choice = [](const GridSearchResult& g) {
    return nlohmann::json{{"alpha", g.alpha}, {"gamma", g.gamma}, {"cv_r2", g.score}};
  };
  nlohmann::json j{{"seed", seed},
                   {"n_fit", sizes.n_fit},
                   {"n_eval", sizes.n_eval},
                   {"r2_content_nonlinear", content_nonlinear.r2},
                   {"r2_style_nonlinear", style_nonlinear.r2},
                   {"r2_content_linear", content_linear.r2},
                   {"r2_style_linear", style_linear.r2},
                   {"content_nonlinear", block(content_nonlinear)},
                   {"style_nonlinear", block(style_nonlinear)},
                   {"content_linear", block(content_linear)},
                   {"style_linear", block(style_linear)},
                   {"content_choice", choice(content_choice)},
                   {"style_choice", choice(style_choice)}};
  return j.dump(2);
}

EvalReport evaluate_representation(const Representation& encoder,
                                   const genproc::GroundTruthProcess& proc,
                                   const mixing::MixingMLP& mixing, EvalSizes sizes,
                                   RngStream& rng) {
  if (sizes.n_fit < 3 || sizes.n_eval < 2) {
    throw std::invalid_argument("evaluate_representation: sample sizes too small");
  }
  const std::size_t nc = proc.n_c();
  const std::size_t ns = proc.n_s();
  auto fit_rng = rng.split();
  auto eval_rng = rng.split();
  auto cv_rng = rng.split();

  const Matrix z_fit = genproc::sample_marginal(proc, sizes.n_fit, fit_rng);
  const Matrix z_eval = genproc::sample_marginal(proc, sizes.n_eval, eval_rng);
  const Matrix rep_fit = encoder(mixing.apply_rows(z_fit));
  const Matrix rep_eval = encoder(mixing.apply_rows(z_eval));
  if (rep_fit.rows() != sizes.n_fit || rep_eval.rows() != sizes.n_eval) {
    throw DimensionError("evaluate_representation: encoder changed the number of rows");
  }

  const Matrix blocks_fit[] = {z_fit.col_block(0, nc), z_fit.col_block(nc, ns)};
  const Matrix content_eval = z_eval.col_block(0, nc);
  const Matrix style_eval = z_eval.col_block(nc, ns);

  EvalReport report;
  report.sizes = sizes;
  report.seed = rng.seed();
  const auto choices = cv_grid_search_blocks(rep_fit, blocks_fit, cv_rng);
  report.content_choice = choices[0];
  report.style_choice = choices[1];

  auto score = [](const Matrix& truth, const Matrix& pred) {
    BlockScore s;
    s.per_dim = r2_per_column(truth, pred);
    s.r2 = std::accumulate(s.per_dim.begin(), s.per_dim.end(), 0.0) /
           static_cast<double>(s.per_dim.size());
    return s;
  };

  const auto content_krr =
      krr_fit(rep_fit, blocks_fit[0], report.content_choice.alpha, report.content_choice.gamma);
  report.content_nonlinear = score(content_eval, content_krr.predict(rep_eval));
  const auto style_krr =
      krr_fit(rep_fit, blocks_fit[1], report.style_choice.alpha, report.style_choice.gamma);
  report.style_nonlinear = score(style_eval, style_krr.predict(rep_eval));

  if (rep_fit.rows() > rep_fit.cols()) {
    report.content_linear = score(content_eval, linear_fit(rep_fit, blocks_fit[0]).predict(rep_eval));
    report.style_linear = score(style_eval, linear_fit(rep_fit, blocks_fit[1]).predict(rep_eval));
  }
  return report;
}

}  // namespace blockid::eval
