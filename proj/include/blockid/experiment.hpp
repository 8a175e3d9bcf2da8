#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blockid/c3di.hpp"
#include "blockid/encoder/train.hpp"
#include "blockid/eval.hpp"
#include "blockid/genproc.hpp"

namespace blockid::experiment {

struct ExperimentConfig {
  genproc::GenerativeConfig generative;
  encoder::TrainConfig train;
  eval::EvalSizes sizes;
  std::size_t threshold_trials = 1000;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::filesystem::path out_dir = "runs";
  /// Reuse per-seed results already on disk when their config hash matches.
  bool resume = false;

  void validate() const;

  /// "desk" or "paper".
  static ExperimentConfig preset(std::string_view name);

  /// Sets one key from its textual value; throws std::invalid_argument on an
  /// unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);

  /// key=value pairs that determine the results (seeds and paths excluded).
  std::vector<std::pair<std::string, std::string>> canonical() const;
  /// Full flat config text, readable by apply_config_text.
  std::string to_text() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
};

/// Flat "key = value" lines; '#' starts a comment. Later keys win.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
/// "key=value".
void apply_override(ExperimentConfig& cfg, std::string_view assignment);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

struct SeedResult {
  std::uint64_t seed = 0;
  double r2_content = 0.0;
  double r2_style = 0.0;
  double r2_content_linear = 0.0;
  double r2_style_linear = 0.0;
  double cond_threshold = 0.0;
  double final_loss = 0.0;
  bool reused = false;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population (ddof = 0)
};

Aggregate aggregate(std::span<const double> values);

struct RunSummary {
  std::string label;
  std::string config_hash;
  genproc::GenerativeConfig generative;
  std::size_t n_enc = 0;
  std::vector<SeedResult> per_seed;
  Aggregate content, style, content_linear, style_linear;
};

using Logger = std::function<void(const std::string&)>;

/// Per seed: build process, sample mixing, train, evaluate. Artifacts go to
/// out_dir/label/seed_<s>/. Stage failures surface as StageError.
RunSummary run_single(const ExperimentConfig& cfg, const std::string& label,
                      const Logger& log = {});

/// Settings of the four table rows: (p_change, stat_dep, causal_dep).
struct TableRow {
  double p_change;
  bool stat_dep;
  bool causal_dep;
  std::string label;
};
std::vector<TableRow> table_rows();

/// Runs every row; writes table.csv and table.txt into cfg.out_dir.
std::vector<RunSummary> run_table(const ExperimentConfig& base, const Logger& log = {});

/// One run_single per n_enc; writes dim_sweep.csv and dim_sweep.svg.
std::vector<RunSummary> run_dim_sweep(const ExperimentConfig& cfg,
                                      const std::vector<std::size_t>& dims,
                                      const Logger& log = {});

std::string format_table(const std::vector<RunSummary>& rows);
std::string table_csv(const std::vector<RunSummary>& rows);
std::string sweep_svg(const std::vector<RunSummary>& rows);

/// Scenes (and LT views when spec is given) to `path`, plus `path`.meta.json
/// recording seed, count and change set.
void run_c3di(std::size_t count, const std::optional<c3di::LTSpec>& spec, std::uint64_t seed,
              const std::filesystem::path& path);

}  // namespace blockid::experiment
