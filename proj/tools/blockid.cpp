// blockid: experiment driver (table, run, sweep-dim, c3di, selftest).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blockid/errors.hpp"
#include "blockid/experiment.hpp"
#include "blockid/selftest.hpp"

namespace {

using blockid::experiment::ExperimentConfig;

struct CommonOptions {
  std::string preset = "desk";
  std::string seed_list;
  std::string out = "runs";
  std::string objective;
  std::optional<double> barlow_lambda;
  std::string config;
  std::vector<std::string> overrides;
  bool resume = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--preset", o.preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed-list", o.seed_list, "comma-separated seeds, e.g. 0,1,2");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--objective", o.objective, "infonce or barlow")
      ->check(CLI::IsMember({"infonce", "barlow"}));
  cmd->add_option("--barlow-lambda", o.barlow_lambda, "off-diagonal weight (default 0.0051)");
  cmd->add_option("--config", o.config, "flat key = value config file");
  cmd->add_option("--set", o.overrides, "key=value override (repeatable)");
  cmd->add_flag("--resume", o.resume, "reuse stored per-seed results with a matching config hash");
}

ExperimentConfig build_config(const CommonOptions& o) {
  auto cfg = ExperimentConfig::preset(o.preset);
  cfg.out_dir = o.out;
  if (!o.config.empty()) blockid::experiment::apply_config_file(cfg, o.config);
  if (!o.seed_list.empty()) cfg.seeds = blockid::experiment::parse_seed_list(o.seed_list);
  if (!o.objective.empty()) cfg.set("objective", o.objective);
  if (o.barlow_lambda) cfg.train.barlow_lambda = *o.barlow_lambda;
  if (o.resume) cfg.resume = true;
  for (const auto& s : o.overrides) blockid::experiment::apply_override(cfg, s);
  cfg.validate();
  return cfg;
}

void log_line(const std::string& msg) {
  std::cerr << msg << '\n';
}

void print_summary(const blockid::experiment::RunSummary& s) {
  std::printf("%s  config_hash=%s  content R2 %.4f +- %.4f  style R2 %.4f +- %.4f  "
              "(linear %.4f / %.4f)\n",
              s.label.c_str(), s.config_hash.c_str(), s.content.mean, s.content.std, s.style.mean,
              s.style.std, s.content_linear.mean, s.style_linear.mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Content/style block-identifiability experiments"};
  app.require_subcommand(1);

  CommonOptions table_opts, run_opts, sweep_opts;
  auto* table = app.add_subcommand("table", "the four-row R2 table (content / style)");
  add_common(table, table_opts);

  auto* run = app.add_subcommand("run", "a single generative setting");
  add_common(run, run_opts);
  std::string label = "run";
  run->add_option("--label", label, "subdirectory name under --out");

  auto* sweep = app.add_subcommand("sweep-dim", "encoder output dimension sweep");
  add_common(sweep, sweep_opts);
  std::vector<std::size_t> dims{1, 3, 5, 8};
  sweep->add_option("--dims", dims, "encoder output dimensions")->delimiter(',');

  auto* c3di_cmd = app.add_subcommand("c3di", "sample Causal3DIdent latents");
  std::size_t count = 1000;
  std::string lt;
  double lt_sigma = 1.0;
  std::uint64_t c3di_seed = 0;
  std::string c3di_out = "c3di_latents.csv";
  c3di_cmd->add_option("--count", count, "number of scenes");
  c3di_cmd->add_option("--lt", lt, "latent groups to transform: positions,rotations,hues");
  c3di_cmd->add_option("--lt-sigma", lt_sigma, "truncated-normal width of LT redraws");
  c3di_cmd->add_option("--seed", c3di_seed, "random seed");
  c3di_cmd->add_option("--out", c3di_out, "CSV path");

  auto* selftest = app.add_subcommand("selftest", "property and oracle suites");
  std::uint64_t selftest_seed = 0;
  selftest->add_option("--seed", selftest_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*table) {
      const auto rows = blockid::experiment::run_table(build_config(table_opts), log_line);
      for (const auto& r : rows) print_summary(r);
      std::printf("\n%s", blockid::experiment::format_table(rows).c_str());
    } else if (*run) {
      print_summary(blockid::experiment::run_single(build_config(run_opts), label, log_line));
    } else if (*sweep) {
      for (const auto& r : blockid::experiment::run_dim_sweep(build_config(sweep_opts), dims, log_line)) {
        print_summary(r);
      }
    } else if (*c3di_cmd) {
      std::optional<blockid::c3di::LTSpec> spec;
      if (!lt.empty()) {
        spec = blockid::c3di::LTSpec::parse(lt);
        spec->sigma = lt_sigma;
        spec->validate();
      }
      blockid::experiment::run_c3di(count, spec, c3di_seed, c3di_out);
      std::printf("wrote %zu scenes to %s\n", count, c3di_out.c_str());
    } else if (*selftest) {
      bool ok = true;
      blockid::selftest::run_all(selftest_seed, [&](const blockid::selftest::CheckResult& r) {
        ok = ok && r.passed;
        std::printf("%s  %-30s %6.1fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
      });
      return ok ? 0 : 1;
    }
  } catch (const blockid::StageError& e) {
    std::cerr << "error " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [setup]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
