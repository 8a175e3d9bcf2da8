#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "blockid/c3di.hpp"
#include "oracles.hpp"

namespace c3 = blockid::c3di;
using blockid::numcore::RngStream;
using c3::ObjectClass;

namespace {

std::vector<c3::C3DILatentScene> draw(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<c3::C3DILatentScene> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(c3::sample_scene(rng));
  return out;
}

const std::vector<c3::C3DILatentScene>& big_sample() {
  static const auto scenes = draw(100'000, 42);
  return scenes;
}

double tmean(double mu) { return oracle::truncated_mean(mu, c3::kObjectSigma, -1.0, 1.0); }

bool in_unit_box(const c3::C3DILatentScene& s) {
  const auto row = c3::to_row(s);
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] < -1.0 || row[i] > 1.0) return false;
  return true;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "blockid_test_c3di";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("rotation centre table") {
  CHECK(c3::rotation_means(ObjectClass::teapot) == std::array<double, 3>{-0.35, 0.35, 0.35});
  CHECK(c3::rotation_means(ObjectClass::hare) == std::array<double, 3>{0.35, -0.35, 0.35});
  CHECK(c3::rotation_means(ObjectClass::dragon) == std::array<double, 3>{0.35, 0.35, -0.35});
  CHECK(c3::rotation_means(ObjectClass::cow) == std::array<double, 3>{0.35, -0.35, -0.35});
  CHECK(c3::rotation_means(ObjectClass::armadillo) == std::array<double, 3>{-0.35, 0.35, -0.35});
  CHECK(c3::rotation_means(ObjectClass::horse) == std::array<double, 3>{-0.35, -0.35, 0.35});
  CHECK(c3::rotation_means(ObjectClass::head) == std::array<double, 3>{-0.35, -0.35, -0.35});
}

TEST_CASE("position centre table") {
  const auto hare = c3::position_means(ObjectClass::hare, 0.0);
  CHECK(hare[0] == doctest::Approx(0.0));
  CHECK(hare[1] == doctest::Approx(-1.0));
  CHECK(hare[2] == 0.0);
  // pos_spl = 1 maps to pi/2.
  const auto cow = c3::position_means(ObjectClass::cow, 1.0);
  CHECK(cow[0] == doctest::Approx(1.0));
  CHECK(cow[1] == doctest::Approx(0.0).epsilon(1e-15));
  const auto teapot = c3::position_means(ObjectClass::teapot, 0.6);
  CHECK(teapot == std::array<double, 3>{0.0, 0.0, 0.0});
  for (auto c : {ObjectClass::hare, ObjectClass::dragon, ObjectClass::horse})
    CHECK(c3::position_means(c, -0.5)[0] == doctest::Approx(-std::sin(-0.25 * M_PI)));
  for (auto c : {ObjectClass::cow, ObjectClass::armadillo, ObjectClass::head})
    CHECK(c3::position_means(c, -0.5)[1] == doctest::Approx(std::cos(-0.25 * M_PI)));
}

TEST_CASE("hue centre table") {
  CHECK(c3::hue_mean(ObjectClass::hare, 0.4, 0.2) == doctest::Approx(0.3));
  CHECK(c3::hue_mean(ObjectClass::dragon, 0.4, 0.2) == doctest::Approx(-0.3));
  CHECK(c3::hue_mean(ObjectClass::armadillo, 0.4, 0.2) == 0.7);
  CHECK(c3::hue_mean(ObjectClass::armadillo, -0.9, 0.1) == 0.7);
  CHECK(c3::hue_mean(ObjectClass::teapot, 0.4, 0.2) == 0.0);
  CHECK(c3::hue_mean(ObjectClass::cow, 0.4, 0.2) == -0.35);
  CHECK(c3::hue_mean(ObjectClass::horse, 0.4, 0.2) == -0.7);
  CHECK(c3::hue_mean(ObjectClass::head, 0.4, 0.2) == 0.35);
}

TEST_CASE("scenes stay in the unit box") {
  for (const auto& s : draw(5000, 1)) CHECK(in_unit_box(s));
}

TEST_CASE("class frequencies are uniform") {
  std::array<double, c3::kClassCount> freq{};
  for (const auto& s : big_sample()) freq[static_cast<std::size_t>(s.object_class)] += 1.0;
  for (double f : freq) CHECK(std::abs(f / 1e5 - 1.0 / 7.0) < 0.01);
}

TEST_CASE("environment latents are uniform and independent of class") {
  std::vector<double> cls, spl, hspl, hbg;
  for (const auto& s : big_sample()) {
    cls.push_back(static_cast<double>(s.object_class));
    spl.push_back(s.pos_spl);
    hspl.push_back(s.hue_spl);
    hbg.push_back(s.hue_bg);
  }
  const double crit = 1.95 / std::sqrt(1e5);
  auto cdf = [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); };
  for (const auto* v : {&spl, &hspl, &hbg}) {
    CHECK(oracle::ks(*v, cdf) < crit);
    CHECK(std::abs(oracle::correlation(cls, *v)) < 0.02);
  }
}

TEST_CASE("per-class conditional means match the truncated-normal centres") {
  // Residual of each latent against its own analytic conditional mean, so the
  // environment-dependent centres are covered too.
  struct Acc {
    std::vector<double> resid[7];
  };
  std::array<Acc, c3::kClassCount> acc;
  for (const auto& s : big_sample()) {
    auto& a = acc[static_cast<std::size_t>(s.object_class)];
    const auto rot = c3::rotation_means(s.object_class);
    const auto pos = c3::position_means(s.object_class, s.pos_spl);
    for (std::size_t i = 0; i < 3; ++i) {
      a.resid[i].push_back(s.rot_obj[i] - tmean(rot[i]));
      a.resid[3 + i].push_back(s.pos_obj[i] - tmean(pos[i]));
    }
    a.resid[6].push_back(s.hue_obj - tmean(c3::hue_mean(s.object_class, s.hue_bg, s.hue_spl)));
  }
  for (const auto& a : acc) {
    for (const auto& r : a.resid) {
      const double se = std::sqrt(oracle::variance(r) / static_cast<double>(r.size()));
      CHECK(std::abs(oracle::mean(r)) < 5.0 * se);
    }
  }
}

TEST_CASE("Hare hue tracks its environment") {
  std::vector<double> hue, env;
  for (const auto& s : big_sample()) {
    if (s.object_class != ObjectClass::hare) continue;
    hue.push_back(s.hue_obj);
    env.push_back((s.hue_bg + s.hue_spl) / 2.0);
  }
  CHECK(oracle::correlation(hue, env) > 0.3);
}

TEST_CASE("LT views redraw only the chosen groups") {
  RngStream rng(2);
  const auto scenes = draw(200, 3);
  const auto spec = c3::LTSpec::parse("hues");
  for (const auto& s : scenes) {
    const auto v = c3::sample_lt_view(s, spec, rng);
    CHECK(v.object_class == s.object_class);
    CHECK(v.pos_obj == s.pos_obj);
    CHECK(v.rot_obj == s.rot_obj);
    CHECK(v.pos_spl == s.pos_spl);
    CHECK(v.hue_obj != s.hue_obj);
    CHECK(in_unit_box(v));
  }
  const auto all = c3::LTSpec::parse("positions,rotations,hues");
  for (const auto& s : scenes) {
    const auto v = c3::sample_lt_view(s, all, rng);
    CHECK(v.object_class == s.object_class);
    CHECK(in_unit_box(v));
  }
}

TEST_CASE("hue redraws from zero match the truncated mean") {
  c3::C3DILatentScene s;
  const auto spec = c3::LTSpec::parse("hues");
  RngStream rng(4);
  std::vector<double> hue;
  for (int i = 0; i < 100'000; ++i) hue.push_back(c3::sample_lt_view(s, spec, rng).hue_obj);
  CHECK(std::abs(oracle::mean(hue) - oracle::truncated_mean(0.0, 1.0, -1.0, 1.0)) < 0.01);
  CHECK(oracle::variance(hue) ==
        doctest::Approx(oracle::truncated_variance(0.0, 1.0, -1.0, 1.0)).epsilon(0.02));
}

TEST_CASE("LT spec parsing and validation") {
  const auto spec = c3::LTSpec::parse("rotations,positions");
  CHECK(spec.positions);
  CHECK(spec.rotations);
  CHECK_FALSE(spec.hues);
  CHECK(c3::LTSpec::parse(spec.to_string()).positions);
  CHECK_THROWS(c3::LTSpec::parse("colours"));
  CHECK_THROWS(c3::LTSpec::parse(""));
  c3::LTSpec empty;
  CHECK_THROWS(empty.validate());
  c3::LTSpec bad = spec;
  bad.sigma = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("CSV export") {
  const auto path = temp_file("scenes.csv");
  c3::export_scenes({}, path);
  {
    std::ifstream in(path);
    std::string header, extra;
    std::getline(in, header);
    CHECK(header == "class,pos_x,pos_y,pos_z,rot_phi,rot_theta,rot_psi,pos_spl,hue_obj,hue_spl,hue_bg");
    CHECK_FALSE(std::getline(in, extra));
  }
  const auto scenes = draw(300, 5);
  c3::export_scenes(scenes, path);
  CHECK(c3::read_scenes(path) == scenes);

  RngStream rng(6);
  std::vector<c3::C3DILatentScene> views;
  for (const auto& s : scenes) views.push_back(c3::sample_lt_view(s, c3::LTSpec::parse("positions"), rng));
  const auto pairs = temp_file("pairs.csv");
  c3::export_scene_pairs(scenes, views, pairs);
  std::ifstream in(pairs);
  std::string header;
  std::getline(in, header);
  CHECK(header.find(",view_class,view_pos_x,") != std::string::npos);
  CHECK(c3::read_scenes(pairs) == scenes);
  CHECK_THROWS(c3::export_scene_pairs(scenes, std::span(views).first(10), pairs));
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("row conversion validates the class") {
  std::array<double, 11> row{};
  row[0] = 3.0;
  CHECK(c3::from_row(row).object_class == ObjectClass::cow);
  row[0] = 7.0;
  CHECK_THROWS(c3::from_row(row));
  row[0] = 1.5;
  CHECK_THROWS(c3::from_row(row));
}
