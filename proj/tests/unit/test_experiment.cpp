#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "blockid/c3di.hpp"
#include "blockid/errors.hpp"
#include "blockid/experiment.hpp"

namespace ex = blockid::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("blockid_test_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ex::ExperimentConfig tiny(const fs::path& out) {
  auto cfg = ex::ExperimentConfig::preset("desk");
  cfg.train.iterations = 20;
  cfg.train.batch_pairs = 16;
  cfg.train.hidden_multipliers = {2, 2};
  cfg.train.trace_every = 5;
  cfg.threshold_trials = 3;
  cfg.sizes = {40, 40};
  cfg.seeds = {0, 1};
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("presets") {
  const auto desk = ex::ExperimentConfig::preset("desk");
  CHECK(desk.train.batch_pairs == 512);
  CHECK(desk.train.iterations == 20'000);
  CHECK(desk.sizes.n_fit == 2048);
  CHECK(desk.sizes.n_eval == 4096);
  CHECK(desk.threshold_trials == 1000);
  CHECK(desk.seeds == std::vector<std::uint64_t>{0, 1, 2});
  const auto paper = ex::ExperimentConfig::preset("paper");
  CHECK(paper.train.batch_pairs == 6144);
  CHECK(paper.train.iterations == 300'000);
  CHECK(paper.sizes.n_fit == 20'480);
  CHECK(paper.sizes.n_eval == 40'960);
  CHECK(paper.threshold_trials == 24'975);
  CHECK_THROWS(ex::ExperimentConfig::preset("laptop"));
}

TEST_CASE("config text, overrides and errors") {
  auto cfg = ex::ExperimentConfig::preset("desk");
  ex::apply_config_text(cfg, "# comment\n p_change = 1.0\nstat_dep=true  # inline\n\nn_enc = 3\n"
                             "objective = barlow\nhidden_multipliers = 4,4\nseeds = 5,6\n");
  CHECK(cfg.generative.p_change == 1.0);
  CHECK(cfg.generative.stat_dep);
  CHECK(cfg.train.n_enc == 3);
  CHECK(cfg.train.objective == blockid::encoder::Objective::barlow_twins);
  CHECK(cfg.train.hidden_multipliers == std::vector<std::size_t>{4, 4});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6});
  ex::apply_override(cfg, "batch_pairs=64");
  CHECK(cfg.train.batch_pairs == 64);
  CHECK_THROWS(ex::apply_override(cfg, "batch_pairs"));
  CHECK_THROWS(ex::apply_override(cfg, "colour=blue"));
  CHECK_THROWS(ex::apply_override(cfg, "iterations=-3"));
  CHECK_THROWS(ex::apply_override(cfg, "p_change=abc"));
  CHECK_THROWS(ex::apply_config_text(cfg, "no equals sign here\n"));
  CHECK(ex::parse_seed_list("0, 1,2") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK_THROWS(ex::parse_seed_list(""));
}

TEST_CASE("config text round-trips and hashes ignore seeds and paths") {
  auto a = ex::ExperimentConfig::preset("desk");
  a.generative.causal_dep = true;
  a.train.n_enc = 8;
  auto b = ex::ExperimentConfig::preset("paper");
  ex::apply_config_text(b, a.to_text());
  CHECK(b.hash() == a.hash());
  CHECK(b.canonical() == a.canonical());
  CHECK(a.to_text().rfind("# config_hash = " + a.hash(), 0) == 0);
  CHECK(a.hash().size() == 16);

  auto c = a;
  c.seeds = {9};
  c.out_dir = "elsewhere";
  c.resume = true;
  CHECK(c.hash() == a.hash());
  c.train.lr = 2e-4;
  CHECK(c.hash() != a.hash());
}

TEST_CASE("validation") {
  auto cfg = ex::ExperimentConfig::preset("desk");
  cfg.seeds.clear();
  CHECK_THROWS(cfg.validate());
  cfg = ex::ExperimentConfig::preset("desk");
  cfg.train.batch_pairs = 1;
  CHECK_THROWS(cfg.validate());
  cfg = ex::ExperimentConfig::preset("desk");
  cfg.threshold_trials = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("aggregate uses the population deviation") {
  const std::vector<double> one{0.7};
  CHECK(ex::aggregate(one).std == 0.0);
  CHECK(ex::aggregate(one).mean == 0.7);
  const std::vector<double> three{1.0, 2.0, 4.0};
  const auto a = ex::aggregate(three);
  CHECK(a.mean == doctest::Approx(7.0 / 3.0));
  CHECK(a.std == doctest::Approx(std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                            (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 3.0)));
  CHECK_THROWS(ex::aggregate(std::vector<double>{}));
}

TEST_CASE("single seed has zero spread") {
  const auto dir = fresh_dir("single");
  auto cfg = tiny(dir);
  cfg.seeds = {3};
  const auto s = ex::run_single(cfg, "one");
  REQUIRE(s.per_seed.size() == 1);
  CHECK(s.content.std == 0.0);
  CHECK(s.style.std == 0.0);
  CHECK(s.content.mean == s.per_seed[0].r2_content);
  for (const char* f : {"checkpoint.json", "loss_trace.csv", "mixing.json", "report.json"})
    CHECK(fs::exists(dir / "one" / "seed_3" / f));
  CHECK(slurp(dir / "one" / "seed_3" / "report.json").find(cfg.hash()) != std::string::npos);
  CHECK(slurp(dir / "one" / "seed_3" / "loss_trace.csv").find(cfg.hash()) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("runs are deterministic and aggregates match the seeds") {
  const auto d1 = fresh_dir("det1");
  const auto d2 = fresh_dir("det2");
  const auto a = ex::run_single(tiny(d1), "run");
  const auto b = ex::run_single(tiny(d2), "run");
  CHECK(slurp(d1 / "run" / "results.csv") == slurp(d2 / "run" / "results.csv"));
  CHECK(slurp(d1 / "run" / "seed_1" / "checkpoint.json") == slurp(d2 / "run" / "seed_1" / "checkpoint.json"));
  CHECK(a.content.mean == b.content.mean);

  std::vector<double> content, style;
  for (const auto& s : a.per_seed) {
    content.push_back(s.r2_content);
    style.push_back(s.r2_style);
  }
  CHECK(a.content.mean == ex::aggregate(content).mean);
  CHECK(a.content.std == ex::aggregate(content).std);
  CHECK(a.style.mean == ex::aggregate(style).mean);

  const auto csv = slurp(d1 / "run" / "results.csv");
  CHECK(csv.rfind("config_hash,p_change,stat_dep,causal_dep,n_enc,seed,r2_content", 0) == 0);
  CHECK(csv.find(",mean,") != std::string::npos);
  CHECK(csv.find(",std,") != std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("resume reuses matching results only") {
  const auto dir = fresh_dir("resume");
  auto cfg = tiny(dir);
  cfg.seeds = {0};
  const auto first = ex::run_single(cfg, "a");
  CHECK_FALSE(first.per_seed[0].reused);
  cfg.resume = true;
  const auto again = ex::run_single(cfg, "b");
  CHECK(again.per_seed[0].reused);
  CHECK(again.per_seed[0].r2_content == first.per_seed[0].r2_content);
  CHECK(fs::exists(dir / "b" / "seed_0" / "checkpoint.json"));
  cfg.train.iterations = 21;
  const auto changed = ex::run_single(cfg, "c");
  CHECK_FALSE(changed.per_seed[0].reused);
  fs::remove_all(dir);
}

TEST_CASE("tiny table and sweep write their artefacts") {
  const auto dir = fresh_dir("table");
  auto cfg = tiny(dir);
  cfg.seeds = {0};
  const auto rows = ex::run_table(cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].generative.p_change == 1.0);
  CHECK(rows[3].generative.stat_dep);
  CHECK(rows[3].generative.causal_dep);
  const auto csv = slurp(dir / "table.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const auto txt = slurp(dir / "table.txt");
  CHECK(txt.find("p(chg.)") != std::string::npos);
  CHECK(txt.find("✓") != std::string::npos);

  const auto sweep = ex::run_dim_sweep(cfg, {1, 3});
  REQUIRE(sweep.size() == 2);
  CHECK(sweep[1].n_enc == 3);
  CHECK(slurp(dir / "dim_sweep.csv").rfind("n_enc,", 0) == 0);
  CHECK(slurp(dir / "dim_sweep.svg").find("<svg") != std::string::npos);
  CHECK_THROWS(ex::run_dim_sweep(cfg, {}));
  fs::remove_all(dir);
}

TEST_CASE("single-dimension sweep equals run_single") {
  const auto dir = fresh_dir("sweep1");
  auto cfg = tiny(dir);
  cfg.seeds = {0};
  const auto sweep = ex::run_dim_sweep(cfg, {5});
  const auto single = ex::run_single(cfg, "direct");
  CHECK(sweep[0].content.mean == single.content.mean);
  CHECK(sweep[0].style.mean == single.style.mean);
  fs::remove_all(dir);
}

TEST_CASE("c3di export") {
  const auto dir = fresh_dir("c3di");
  ex::run_c3di(0, std::nullopt, 0, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") ==
        "class,pos_x,pos_y,pos_z,rot_phi,rot_theta,rot_psi,pos_spl,hue_obj,hue_spl,hue_bg\n");
  CHECK(fs::exists(dir / "empty.csv.meta.json"));

  auto spec = blockid::c3di::LTSpec::parse("hues");
  ex::run_c3di(500, spec, 7, dir / "pairs.csv");
  ex::run_c3di(500, spec, 7, dir / "pairs2.csv");
  CHECK(slurp(dir / "pairs.csv") == slurp(dir / "pairs2.csv"));
  std::ifstream in(dir / "pairs.csv");
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 22);
    // class, positions, rotations and pos_spl (columns 0..7) are shared.
    for (std::size_t i = 0; i < 8; ++i) CHECK(cells[i] == cells[11 + i]);
    ++rows;
  }
  CHECK(rows == 500);
  CHECK(slurp(dir / "pairs.csv.meta.json").find("\"hues\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("stage failures carry the stage and seed") {
  const auto dir = fresh_dir("fail");
  auto cfg = tiny(dir);
  cfg.seeds = {4};
  cfg.train.lr = 1e9;
  cfg.train.iterations = 200;
  try {
    ex::run_single(cfg, "boom");
    FAIL("expected a stage error");
  } catch (const blockid::StageError& e) {
    const std::string what = e.what();
    CHECK(what.find("train") != std::string::npos);
    CHECK(what.find('4') != std::string::npos);
  }
  fs::remove_all(dir);
}
