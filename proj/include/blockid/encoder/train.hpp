#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "blockid/encoder/adam.hpp"
#include "blockid/encoder/losses.hpp"
#include "blockid/encoder/mlp.hpp"
#include "blockid/genproc.hpp"
#include "blockid/mixing.hpp"

namespace blockid::encoder {

/// Trained encoders run in single precision; double is used for gradient checks.
using EncoderMLP = BasicEncoder<float>;

enum class Objective { infonce_l2, barlow_twins };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

struct TrainConfig {
  std::size_t iterations = 20'000;
  std::size_t batch_pairs = 512;  // K
  double tau = 1.0;
  Objective objective = Objective::infonce_l2;
  double barlow_lambda = 0.0051;
  std::size_t n_enc = 5;
  double lr = 1e-4;
  Reduction reduction = Reduction::mean;
  std::vector<std::size_t> hidden_multipliers{10, 50, 50, 50, 50, 10};
  std::size_t trace_every = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossPoint {
  std::size_t iteration;  // last iteration of the window
  double loss;            // mean training loss over the window
};

struct TrainResult {
  EncoderMLP encoder;
  std::vector<LossPoint> trace;
};

using ProgressFn = std::function<void(std::size_t iteration, double loss)>;

/// Objective value and gradients for one batch of view pairs.
LossValue objective_loss(const TrainConfig& cfg, const Matrix& h, const Matrix& h_tilde);

/// Fresh pairs every iteration, both views through one stacked forward pass,
/// then an Adam step. Throws NonFiniteLossError on a non-finite loss.
TrainResult train(const genproc::GroundTruthProcess& proc, const genproc::GenerativeConfig& gcfg,
                  const TrainConfig& cfg, const mixing::MixingMLP& mixing,
                  numcore::RngStream& rng, const ProgressFn& progress = {});

/// Mean objective of `encoder` over `batches` fresh batches.
double mean_objective(const EncoderMLP& encoder, const genproc::GroundTruthProcess& proc,
                      const genproc::GenerativeConfig& gcfg, const TrainConfig& cfg,
                      const mixing::MixingMLP& mixing, std::size_t batches,
                      numcore::RngStream& rng);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  std::string config_hash;
  std::string objective;
};

/// JSON document: architecture, seed, iteration and every parameter.
void save_checkpoint(const EncoderMLP& enc, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
EncoderMLP load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

/// CSV: iteration,loss.
void write_loss_trace(const std::vector<LossPoint>& trace, const std::filesystem::path& path,
                      const std::string& config_hash = {}, std::uint64_t seed = 0);

}  // namespace blockid::encoder
