#include "blockid/encoder/train.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "blockid/errors.hpp"
#include "blockid/io.hpp"
#include "json.hpp"

namespace blockid::encoder {

std::string to_string(Objective o) {
  return o == Objective::infonce_l2 ? "infonce" : "barlow";
}

Objective objective_from_string(const std::string& s) {
  if (s == "infonce" || s == "infonce_l2") return Objective::infonce_l2;
  if (s == "barlow" || s == "barlow_twins") return Objective::barlow_twins;
  throw std::invalid_argument("unknown objective '" + s + "' (expected infonce or barlow)");
}

void TrainConfig::validate() const {
  if (batch_pairs < 2) throw std::invalid_argument("TrainConfig: batch_pairs must be >= 2");
  if (n_enc < 1) throw std::invalid_argument("TrainConfig: n_enc must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("TrainConfig: tau must be > 0");
  if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
  if (trace_every < 1) throw std::invalid_argument("TrainConfig: trace_every must be >= 1");
}

LossValue objective_loss(const TrainConfig& cfg, const Matrix& h, const Matrix& h_tilde) {
  if (cfg.objective == Objective::barlow_twins) {
    return barlow_twins_loss(h, h_tilde, cfg.barlow_lambda);
  }
  return infonce_l2_loss(h, h_tilde, cfg.tau, cfg.reduction);
}

namespace {

Architecture architecture_for(const genproc::GenerativeConfig& gcfg, const TrainConfig& cfg) {
  return Architecture{gcfg.latent_dim(), cfg.n_enc, cfg.hidden_multipliers, kEncoderSlope};
}

// Rows [0, k) hold x, rows [k, 2k) hold x~.
EMatrix<float> stack_views(const genproc::Batch& batch) {
  const auto k = static_cast<Eigen::Index>(batch.x.rows());
  const auto d = static_cast<Eigen::Index>(batch.x.cols());
  EMatrix<float> out(2 * k, d);
  for (Eigen::Index i = 0; i < k * d; ++i) {
    out.data()[i] = static_cast<float>(batch.x.data()[static_cast<std::size_t>(i)]);
    out.data()[k * d + i] = static_cast<float>(batch.x_tilde.data()[static_cast<std::size_t>(i)]);
  }
  return out;
}

void split_views(const EMatrix<float>& h, Matrix& first, Matrix& second) {
  const std::size_t k = static_cast<std::size_t>(h.rows()) / 2;
  const std::size_t d = static_cast<std::size_t>(h.cols());
  first = Matrix(k, d);
  second = Matrix(k, d);
  for (std::size_t i = 0; i < k * d; ++i) {
    first.data()[i] = static_cast<double>(h.data()[i]);
    second.data()[i] = static_cast<double>(h.data()[k * d + i]);
  }
}

EMatrix<float> stack_grads(const LossValue& loss) {
  const std::size_t k = loss.grad_h.rows();
  const std::size_t d = loss.grad_h.cols();
  EMatrix<float> out(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < k * d; ++i) {
    out.data()[i] = static_cast<float>(loss.grad_h.data()[i]);
    out.data()[k * d + i] = static_cast<float>(loss.grad_h_tilde.data()[i]);
  }
  return out;
}

}  // namespace

TrainResult train(const genproc::GroundTruthProcess& proc, const genproc::GenerativeConfig& gcfg,
                  const TrainConfig& cfg, const mixing::MixingMLP& mixing,
                  numcore::RngStream& rng, const ProgressFn& progress) {
  cfg.validate();
  if (mixing.dim() != gcfg.latent_dim()) {
    throw DimensionError("train: mixing dimension does not match the latent dimension");
  }
  auto init_rng = rng.split();
  auto data_rng = rng.split();
  TrainResult result{EncoderMLP::initialized(architecture_for(gcfg, cfg), init_rng), {}};
  AdamState<float> adam(result.encoder, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});

  ForwardCache<float> cache;
  Matrix h, h_tilde;
  double window_sum = 0.0;
  std::size_t window_len = 0;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    const auto batch = genproc::generate_batch(proc, gcfg, mixing, cfg.batch_pairs, data_rng);
    const EMatrix<float> out = forward(result.encoder, stack_views(batch), &cache);
    split_views(out, h, h_tilde);
    const LossValue loss = objective_loss(cfg, h, h_tilde);
    if (!std::isfinite(loss.value)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at iteration " << it << " (max |h| = " << h.max_abs()
          << ", max |h~| = " << h_tilde.max_abs() << ")";
      throw NonFiniteLossError(msg.str(), it);
    }
    const auto grads = backward(result.encoder, cache, stack_grads(loss));
    adam.step(result.encoder, grads);

    window_sum += loss.value;
    ++window_len;
    if (it % cfg.trace_every == 0 || it == cfg.iterations) {
      result.trace.push_back({it, window_sum / static_cast<double>(window_len)});
      window_sum = 0.0;
      window_len = 0;
      if (!result.encoder.all_finite()) {
        throw NonFiniteLossError("train: non-finite parameters after iteration " +
                                     std::to_string(it),
                                 it);
      }
      if (progress) progress(it, result.trace.back().loss);
    }
  }
  return result;
}

double mean_objective(const EncoderMLP& encoder, const genproc::GroundTruthProcess& proc,
                      const genproc::GenerativeConfig& gcfg, const TrainConfig& cfg,
                      const mixing::MixingMLP& mixing, std::size_t batches,
                      numcore::RngStream& rng) {
  if (batches == 0) throw std::invalid_argument("mean_objective: batches must be >= 1");
  double total = 0.0;
  Matrix h, h_tilde;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto batch = genproc::generate_batch(proc, gcfg, mixing, cfg.batch_pairs, rng);
    split_views(forward(encoder, stack_views(batch)), h, h_tilde);
    total += objective_loss(cfg, h, h_tilde).value;
  }
  return total / static_cast<double>(batches);
}

void save_checkpoint(const EncoderMLP& enc, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  const auto& arch = enc.architecture();
  j["architecture"] = {{"input_dim", arch.input_dim},
                       {"output_dim", arch.output_dim},
                       {"hidden_multipliers", arch.hidden_multipliers},
                       {"slope", arch.slope},
                       {"widths", arch.widths()},
                       {"init", "uniform(+-1/sqrt(fan_in))"}};
  j["seed"] = meta.seed;
  j["iteration"] = meta.iteration;
  j["config_hash"] = meta.config_hash;
  j["objective"] = meta.objective;
  j["precision"] = "float32";
  auto layers = nlohmann::json::array();
  for (const auto& l : enc.layers()) {
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weight", std::vector<float>(l.weight.data(), l.weight.data() + l.weight.size())},
                      {"bias", std::vector<float>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  j["layers"] = layers;
  io::write_file_atomic(path, j.dump());
}

EncoderMLP load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta) {
  const auto j = nlohmann::json::parse(io::read_file(path));
  const auto& a = j.at("architecture");
  Architecture arch{a.at("input_dim").get<std::size_t>(), a.at("output_dim").get<std::size_t>(),
                    a.at("hidden_multipliers").get<std::vector<std::size_t>>(),
                    a.at("slope").get<double>()};
  EncoderMLP enc(arch);
  const auto& layers = j.at("layers");
  if (layers.size() != enc.layers().size()) {
    throw std::runtime_error("checkpoint " + path.string() + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& dst = enc.layers()[l];
    const auto w = layers[l].at("weight").get<std::vector<float>>();
    const auto b = layers[l].at("bias").get<std::vector<float>>();
    if (w.size() != static_cast<std::size_t>(dst.weight.size()) ||
        b.size() != static_cast<std::size_t>(dst.bias.size())) {
      throw std::runtime_error("checkpoint " + path.string() + ": parameter shape mismatch");
    }
    std::copy(w.begin(), w.end(), dst.weight.data());
    std::copy(b.begin(), b.end(), dst.bias.data());
  }
  if (meta) {
    meta->seed = j.at("seed").get<std::uint64_t>();
    meta->iteration = j.at("iteration").get<std::size_t>();
    meta->config_hash = j.value("config_hash", "");
    meta->objective = j.value("objective", "");
  }
  return enc;
}

void write_loss_trace(const std::vector<LossPoint>& trace, const std::filesystem::path& path,
                      const std::string& config_hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << " seed=" << seed << '\n';
  out << "iteration,loss\n";
  for (const auto& p : trace) out << p.iteration << ',' << io::format_double(p.loss) << '\n';
  io::write_file_atomic(path, out.str());
}

}  // namespace blockid::encoder
