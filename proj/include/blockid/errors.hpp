#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blockid {

/// A sampler was asked for zero draws.
class EmptyRequestError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky hit a non-positive pivot.
class DecompositionError : public std::runtime_error {
 public:
  DecompositionError(const std::string& what, std::size_t pivot)
      : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class ThresholdInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Failure inside an experiment stage; carries the stage name and seed.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, unsigned long long seed, const std::string& cause)
      : std::runtime_error("[" + stage + "] seed " + std::to_string(seed) + ": " + cause),
        stage_(std::move(stage)),
        seed_(seed) {}
  const std::string& stage() const noexcept { return stage_; }
  unsigned long long seed() const noexcept { return seed_; }

 private:
  std::string stage_;
  unsigned long long seed_;
};

}  // namespace blockid
