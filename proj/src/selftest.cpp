#include "blockid/selftest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

#include "blockid/darmois.hpp"
#include "blockid/encoder/losses.hpp"
#include "blockid/encoder/mlp.hpp"
#include "blockid/encoder/train.hpp"
#include "blockid/eval.hpp"
#include "blockid/genproc.hpp"
#include "blockid/mixing.hpp"
#include "blockid/numcore/distributions.hpp"

namespace blockid::selftest {

using numcore::Matrix;
using numcore::RngStream;
using numcore::Vector;

namespace {

constexpr double kAlpha = 0.001;

// Reference CDF straight from the standard library, independent of numcore.
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class F>
CheckResult timed(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r{name, false, {}, 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string sci(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

std::size_t pick(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next_below(hi - lo + 1));
}

// ---- gradient check helpers

using DEncoder = encoder::BasicEncoder<double>;
using DMatrix = encoder::EMatrix<double>;

struct GradProblem {
  DMatrix x;  // both views stacked, 2K rows
  std::size_t k = 0;
  encoder::Objective objective = encoder::Objective::infonce_l2;
  double tau = 1.0;
  encoder::Reduction reduction = encoder::Reduction::mean;
  double lambda = 0.0051;
};

encoder::LossValue evaluate(const DEncoder& enc, const GradProblem& p,
                            encoder::ForwardCache<double>* cache) {
  const DMatrix out = encoder::forward(enc, p.x, cache);
  const auto d = static_cast<std::size_t>(out.cols());
  Matrix h(p.k, d), ht(p.k, d);
  for (std::size_t i = 0; i < p.k * d; ++i) {
    h.data()[i] = out.data()[i];
    ht.data()[i] = out.data()[p.k * d + i];
  }
  return p.objective == encoder::Objective::infonce_l2
             ? encoder::infonce_l2_loss(h, ht, p.tau, p.reduction)
             : encoder::barlow_twins_loss(h, ht, p.lambda);
}

std::vector<bool> kink_pattern(const encoder::ForwardCache<double>& cache) {
  std::vector<bool> signs;
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
    const auto& z = cache.pre[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) signs.push_back(z.data()[i] < 0.0);
  }
  return signs;
}

struct GradStats {
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Central differences on the given flat parameter indices.
void compare_gradients(DEncoder& enc, const GradProblem& p, const std::vector<std::size_t>& coords,
                       GradStats& stats) {
  constexpr double kStep = 1e-5;
  encoder::ForwardCache<double> cache;
  const auto base = evaluate(enc, p, &cache);
  const auto pattern = kink_pattern(cache);
  // Round-off in the loss difference is about 1e-11 |L|; gradients below
  // this floor are compared in absolute terms.
  const double floor = 1e-5 * std::max(1.0, std::abs(base.value));
  const auto d = base.grad_h.cols();
  DMatrix grad_out(static_cast<Eigen::Index>(2 * p.k), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < p.k * d; ++i) {
    grad_out.data()[i] = base.grad_h.data()[i];
    grad_out.data()[p.k * d + i] = base.grad_h_tilde.data()[i];
  }
  const auto grads = encoder::backward(enc, cache, grad_out);

  // Flat parameter order: per layer, weights then biases.
  std::vector<double*> params;
  std::vector<double> analytic;
  for (std::size_t l = 0; l < enc.layers().size(); ++l) {
    auto& layer = enc.layers()[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      params.push_back(layer.weight.data() + i);
      analytic.push_back(grads[l].weight.data()[i]);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      params.push_back(layer.bias.data() + i);
      analytic.push_back(grads[l].bias.data()[i]);
    }
  }
  encoder::ForwardCache<double> probe;
  for (std::size_t c : coords) {
    double* w = params.at(c);
    const double saved = *w;
    *w = saved + kStep;
    const double up = evaluate(enc, p, &probe).value;
    const bool up_same = kink_pattern(probe) == pattern;
    *w = saved - kStep;
    const double down = evaluate(enc, p, &probe).value;
    const bool down_same = kink_pattern(probe) == pattern;
    *w = saved;
    if (!up_same || !down_same) {
      ++stats.skipped;
      continue;
    }
    const double fd = (up - down) / (2.0 * kStep);
    const double a = analytic[c];
    const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
    stats.worst = std::max(stats.worst, rel);
    ++stats.checked;
  }
}

GradProblem random_problem(std::size_t input_dim, std::size_t k, encoder::Objective obj,
                           RngStream& rng) {
  GradProblem p;
  p.k = k;
  p.objective = obj;
  const double taus[] = {0.5, 1.0, 2.0};
  p.tau = taus[rng.next_below(3)];
  p.reduction = rng.next_below(2) ? encoder::Reduction::mean : encoder::Reduction::sum;
  p.x.resize(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(input_dim));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < input_dim; ++j) {
      const double v = numcore::standard_normal(rng);
      p.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      p.x(static_cast<Eigen::Index>(k + i), static_cast<Eigen::Index>(j)) =
          v + 0.3 * numcore::standard_normal(rng);
    }
  }
  return p;
}

// ---- KRR oracle: explicit Gram, independent standardisation, Eigen full-pivot LU.

Eigen::MatrixXd standardise(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) var += (m(r, c) - mean) * (m(r, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(m.rows()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (m(r, c) - mean) / sd;
    }
  }
  return out;
}

}  // namespace

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

CheckResult check_gradients(std::size_t configs, std::uint64_t seed) {
  return timed("gradient finite differences", [&](CheckResult& r) {
    RngStream rng(seed);
    GradStats stats;
    for (std::size_t c = 0; c < configs; ++c) {
      encoder::Architecture arch;
      arch.input_dim = pick(rng, 2, 6);
      arch.output_dim = pick(rng, 1, 4);
      arch.hidden_multipliers.assign(pick(rng, 1, 3), 0);
      for (auto& m : arch.hidden_multipliers) m = pick(rng, 1, 3);
      const auto obj = c % 2 == 0 ? encoder::Objective::infonce_l2 : encoder::Objective::barlow_twins;
      if (obj == encoder::Objective::barlow_twins) arch.output_dim = std::max<std::size_t>(arch.output_dim, 2);
      auto enc = DEncoder::initialized(arch, rng);
      const auto p = random_problem(arch.input_dim, pick(rng, 4, 8), obj, rng);
      std::vector<std::size_t> all(enc.parameter_count());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      compare_gradients(enc, p, all, stats);
    }
    // One full-size encoder on a random subset of its parameters.
    auto big = DEncoder::initialized(encoder::Architecture{}, rng);
    const auto p = random_problem(10, 6, encoder::Objective::infonce_l2, rng);
    std::vector<std::size_t> subset;
    for (int i = 0; i < 200; ++i) subset.push_back(rng.next_below(big.parameter_count()));
    compare_gradients(big, p, subset, stats);

    r.passed = stats.worst < 1e-4 && stats.checked > 0;
    r.detail = "max relative error " + sci(stats.worst) + " over " + std::to_string(stats.checked) +
               " coordinates (" + std::to_string(stats.skipped) + " kink-crossing skipped), " +
               std::to_string(configs) + " configurations";
  });
}

CheckResult check_mixing_round_trip(std::size_t networks, std::size_t points, std::uint64_t seed) {
  return timed("mixing round trip", [&](CheckResult& r) {
    RngStream rng(seed);
    double worst = 0.0;
    for (std::size_t n = 0; n < networks; ++n) {
      const std::size_t dim = n == 0 ? 10 : pick(rng, 2, 12);
      const double threshold = mixing::precompute_cond_threshold(dim, 100, rng);
      const auto mix = mixing::sample_mixing(dim, threshold, rng);
      for (std::size_t i = 0; i < points; ++i) {
        const Vector z = numcore::sample_standard_normal(rng, dim);
        const Vector back = mix.invert(mix.apply(z));
        const Vector fwd = mix.apply(mix.invert(z));
        for (std::size_t j = 0; j < dim; ++j) {
          worst = std::max({worst, std::abs(back[j] - z[j]), std::abs(fwd[j] - z[j])});
        }
      }
    }
    r.passed = worst < 1e-8;
    r.detail = "max abs error " + sci(worst) + " over " + std::to_string(networks) + " networks x " +
               std::to_string(points) + " points, both directions";
  });
}

CheckResult check_darmois_uniformity(std::size_t n, std::uint64_t seed) {
  return timed("darmois uniformity", [&](CheckResult& r) {
    RngStream rng(seed);
    genproc::GenerativeConfig cfg;
    cfg.stat_dep = true;
    const auto proc = genproc::build_process(cfg, rng);
    const auto chain = darmois::build_chain(Vector(proc.n_c(), 0.0), proc.sigma_c());
    const std::size_t d = proc.n_c();
    std::vector<std::vector<double>> cols(d, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Vector u = darmois::darmois_map(chain, genproc::sample_content(proc, rng));
      for (std::size_t j = 0; j < d; ++j) cols[j][i] = u[j];
    }
    double worst_ks = 0.0;
    for (const auto& c : cols) {
      worst_ks = std::max(worst_ks, ks_statistic(c, [](double x) { return std::clamp(x, 0.0, 1.0); }));
    }
    double worst_corr = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a + 1; b < d; ++b) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t i = 0; i < n; ++i) {
          sa += cols[a][i];
          sb += cols[b][i];
          saa += cols[a][i] * cols[a][i];
          sbb += cols[b][i] * cols[b][i];
          sab += cols[a][i] * cols[b][i];
        }
        const double nn = static_cast<double>(n);
        const double cov = sab / nn - sa * sb / (nn * nn);
        const double corr = cov / std::sqrt((saa / nn - sa * sa / (nn * nn)) * (sbb / nn - sb * sb / (nn * nn)));
        worst_corr = std::max(worst_corr, std::abs(corr));
      }
    }
    const double crit = ks_critical(n, kAlpha);
    r.passed = worst_ks < crit && worst_corr < 0.02;
    r.detail = "max KS " + sci(worst_ks) + " (critical " + sci(crit) + "), max |corr| " +
               sci(worst_corr) + " (bound 2e-2), n=" + std::to_string(n);
  });
}

CheckResult check_krr_dual(std::size_t instances, std::uint64_t seed) {
  return timed("KRR dual vs dense solve", [&](CheckResult& r) {
    RngStream rng(seed);
    double worst = 0.0;
    for (std::size_t t = 0; t < instances; ++t) {
      const std::size_t m = pick(rng, 5, 50);
      const std::size_t p = pick(rng, 1, 4);
      const std::size_t q = pick(rng, 1, 3);
      const double alpha = eval::kAlphaGrid[rng.next_below(eval::kAlphaGrid.size())];
      const double gamma = eval::kGammaGrid[rng.next_below(eval::kGammaGrid.size())];
      const Matrix x(m, p, numcore::sample_standard_normal(rng, m * p));
      Matrix y(m, q, numcore::sample_uniform(rng, -2.0, 2.0, m * q));
      for (std::size_t i = 0; i < m; ++i) y(i, 0) += std::sin(x(i, 0));

      const auto model = eval::krr_fit(x, y, alpha, gamma);
      const Eigen::MatrixXd xs = standardise(x);
      const Eigen::MatrixXd ys = standardise(y);
      Eigen::MatrixXd a(m, m);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          a(i, j) = std::exp(-gamma * (xs.row(i) - xs.row(j)).squaredNorm());
        }
        a(i, i) += alpha;
      }
      const Eigen::MatrixXd dual = a.fullPivLu().solve(ys);
      const double scale = std::max(1.0, dual.cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
          worst = std::max(worst, std::abs(model.dual(i, j) -
                                           dual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) /
                                      scale);
        }
      }
    }
    r.passed = worst < 1e-8;
    r.detail = "max scaled dual difference " + sci(worst) + " over " + std::to_string(instances) +
               " instances with m <= 50";
  });
}

CheckResult check_content_invariance(std::size_t pairs, std::uint64_t seed) {
  return timed("content invariance", [&](CheckResult& r) {
    RngStream rng(seed);
    std::size_t content_bad = 0, style_bad = 0;
    for (int setting = 0; setting < 4; ++setting) {
      genproc::GenerativeConfig cfg;
      cfg.p_change = setting == 0 ? 1.0 : 0.75;
      cfg.stat_dep = setting >= 2;
      cfg.causal_dep = setting == 3;
      const auto proc = genproc::build_process(cfg, rng);
      const std::size_t count = pairs / 4 + (static_cast<std::size_t>(setting) < pairs % 4 ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) {
        const auto pr = genproc::sample_pair(proc, cfg, rng);
        if (std::memcmp(pr.z.data(), pr.z_tilde.data(), cfg.n_c * sizeof(double)) != 0) ++content_bad;
        for (std::size_t j = 0; j < cfg.n_s; ++j) {
          const bool changed =
              std::find(pr.change_set.begin(), pr.change_set.end(), j) != pr.change_set.end();
          if (!changed && std::memcmp(&pr.z[cfg.n_c + j], &pr.z_tilde[cfg.n_c + j], sizeof(double)) != 0) {
            ++style_bad;
          }
        }
      }
    }
    r.passed = content_bad == 0 && style_bad == 0;
    r.detail = std::to_string(pairs) + " pairs over the four settings: " + std::to_string(content_bad) +
               " content mismatches, " + std::to_string(style_bad) + " unchanged-style mismatches";
  });
}

CheckResult check_samplers(std::size_t n, std::uint64_t seed) {
  return timed("sampler distributions", [&](CheckResult& r) {
    RngStream rng(seed);
    const double crit = ks_critical(n, kAlpha);
    std::ostringstream detail;
    bool ok = true;
    auto ks = [&](const std::string& name, const std::vector<double>& xs,
                  const std::function<double(double)>& cdf) {
      const double d = ks_statistic(xs, cdf);
      ok = ok && d < crit;
      detail << name << " KS " << sci(d) << "; ";
    };

    ks("normal", numcore::sample_standard_normal(rng, n), phi);
    ks("uniform(-1,1)", numcore::sample_uniform(rng, -1.0, 1.0, n),
       [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); });
    struct Trunc {
      double mu, sigma, lo, hi;
    };
    for (const Trunc& t : {Trunc{0.0, 1.0, -1.0, 1.0}, Trunc{-0.35, 0.5, -1.0, 1.0},
                           Trunc{0.8, 0.5, -1.0, 1.0}, Trunc{3.0, 1.0, -1.0, 1.0},
                           Trunc{-4.0, 0.5, -1.0, 1.0}}) {
      std::vector<double> xs(n);
      for (auto& x : xs) x = numcore::sample_truncated_normal(rng, t.mu, t.sigma, t.lo, t.hi);
      const double a = phi((t.lo - t.mu) / t.sigma), b = phi((t.hi - t.mu) / t.sigma);
      std::ostringstream name;
      name << "truncnorm(" << t.mu << "," << t.sigma << ")";
      ks(name.str(), xs, [&](double x) {
        return std::clamp((phi((x - t.mu) / t.sigma) - a) / (b - a), 0.0, 1.0);
      });
    }

    // Wishart_dim(I, df): E[W] = df I, Var(W_ij) = df (1 + [i == j]).
    const std::size_t dim = 5, df = 5, draws = 20'000;
    Matrix mean(dim, dim);
    for (std::size_t t = 0; t < draws; ++t) {
      const Matrix w = numcore::sample_wishart(rng, dim, df);
      for (std::size_t i = 0; i < dim * dim; ++i) mean.data()[i] += w.data()[i];
    }
    const std::size_t entries = dim * (dim + 1) / 2;
    const double z_crit = -numcore::normal_quantile(kAlpha / (2.0 * static_cast<double>(entries)));
    double worst_z = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) {
        const double m = mean(i, j) / static_cast<double>(draws);
        const double expect = i == j ? static_cast<double>(df) : 0.0;
        const double se = std::sqrt(static_cast<double>(df) * (i == j ? 2.0 : 1.0) / static_cast<double>(draws));
        worst_z = std::max(worst_z, std::abs(m - expect) / se);
      }
    }
    ok = ok && worst_z < z_crit;
    detail << "wishart mean max |z| " << sci(worst_z) << " (critical " << sci(z_crit) << "); ";
    detail << "KS critical " << sci(crit) << ", n=" << n;
    r.passed = ok;
    r.detail = detail.str();
  });
}

std::vector<CheckResult> run_all(std::uint64_t seed, const Reporter& report) {
  std::vector<CheckResult> out;
  auto add = [&](CheckResult r) {
    if (report) report(r);
    out.push_back(std::move(r));
  };
  add(check_gradients(100, seed));
  add(check_mixing_round_trip(5, 10'000, seed));
  add(check_darmois_uniformity(100'000, seed));
  add(check_krr_dual(20, seed));
  add(check_content_invariance(100'000, seed));
  add(check_samplers(100'000, seed));
  return out;
}

}  // namespace blockid::selftest
