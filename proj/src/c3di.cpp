#include "blockid/c3di.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "blockid/io.hpp"
#include "blockid/numcore/distributions.hpp"

namespace blockid::c3di {

namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames{
    "Teapot", "Hare", "Dragon", "Cow", "Armadillo", "Horse", "Head"};

constexpr double r = 0.35;
constexpr std::array<std::array<double, 3>, kClassCount> kRotationMeans{{
    {-r, r, r},    // Teapot
    {r, -r, r},    // Hare
    {r, r, -r},    // Dragon
    {r, -r, -r},   // Cow
    {-r, r, -r},   // Armadillo
    {-r, -r, r},   // Horse
    {-r, -r, -r},  // Head
}};

// +1: (sin, cos); -1: (-sin, -cos); 0: centred at the origin.
constexpr std::array<int, kClassCount> kPositionSign{0, -1, -1, 1, 1, -1, 1};

double trunc(RngStream& rng, double mu, double sigma) {
  return numcore::sample_truncated_normal(rng, mu, sigma, -1.0, 1.0);
}

double uniform(RngStream& rng) { return numcore::sample_uniform(rng, -1.0, 1.0, 1).front(); }

}  // namespace

std::string_view class_name(ObjectClass c) { return kClassNames.at(static_cast<std::size_t>(c)); }

void LTSpec::validate() const {
  if (!positions && !rotations && !hues) {
    throw std::invalid_argument("LTSpec: change set must not be empty");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("LTSpec: sigma must be > 0");
}

LTSpec LTSpec::parse(std::string_view groups) {
  LTSpec spec;
  std::string token;
  std::istringstream in{std::string(groups)};
  while (std::getline(in, token, ',')) {
    if (token == "positions") spec.positions = true;
    else if (token == "rotations") spec.rotations = true;
    else if (token == "hues") spec.hues = true;
    else if (!token.empty())
      throw std::invalid_argument("LTSpec: unknown latent group '" + token + "'");
  }
  spec.validate();
  return spec;
}

std::string LTSpec::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(positions, "positions");
  add(rotations, "rotations");
  add(hues, "hues");
  return out;
}

std::array<double, 3> rotation_means(ObjectClass c) {
  return kRotationMeans.at(static_cast<std::size_t>(c));
}

std::array<double, 3> position_means(ObjectClass c, double pos_spl) {
  const int sign = kPositionSign.at(static_cast<std::size_t>(c));
  if (sign == 0) return {0.0, 0.0, 0.0};
  const double angle = pos_spl * std::numbers::pi / 2.0;
  return {sign * std::sin(angle), sign * std::cos(angle), 0.0};
}

double hue_mean(ObjectClass c, double hue_bg, double hue_spl) {
  switch (c) {
    case ObjectClass::teapot: return 0.0;
    case ObjectClass::hare: return (hue_bg + hue_spl) / 2.0;
    case ObjectClass::dragon: return -(hue_bg + hue_spl) / 2.0;
    case ObjectClass::cow: return -0.35;
    case ObjectClass::armadillo: return 0.7;
    case ObjectClass::horse: return -0.7;
    case ObjectClass::head: return 0.35;
  }
  throw std::invalid_argument("hue_mean: unknown class");
}

C3DILatentScene sample_scene(RngStream& rng) {
  C3DILatentScene s;
  s.object_class = static_cast<ObjectClass>(rng.next_below(kClassCount));
  s.pos_spl = uniform(rng);
  s.hue_spl = uniform(rng);
  s.hue_bg = uniform(rng);
  const auto rot = rotation_means(s.object_class);
  for (std::size_t i = 0; i < 3; ++i) s.rot_obj[i] = trunc(rng, rot[i], kObjectSigma);
  const auto pos = position_means(s.object_class, s.pos_spl);
  for (std::size_t i = 0; i < 3; ++i) s.pos_obj[i] = trunc(rng, pos[i], kObjectSigma);
  s.hue_obj = trunc(rng, hue_mean(s.object_class, s.hue_bg, s.hue_spl), kObjectSigma);
  return s;
}

C3DILatentScene sample_lt_view(const C3DILatentScene& z, const LTSpec& spec, RngStream& rng) {
  spec.validate();
  C3DILatentScene v = z;
  if (spec.positions) {
    for (double& p : v.pos_obj) p = trunc(rng, p, spec.sigma);
    v.pos_spl = trunc(rng, v.pos_spl, spec.sigma);
  }
  if (spec.rotations) {
    for (double& a : v.rot_obj) a = trunc(rng, a, spec.sigma);
  }
  if (spec.hues) {
    v.hue_obj = trunc(rng, v.hue_obj, spec.sigma);
    v.hue_spl = trunc(rng, v.hue_spl, spec.sigma);
    v.hue_bg = trunc(rng, v.hue_bg, spec.sigma);
  }
  return v;
}

std::array<double, 11> to_row(const C3DILatentScene& s) {
  return {static_cast<double>(static_cast<int>(s.object_class)),
          s.pos_obj[0], s.pos_obj[1], s.pos_obj[2],
          s.rot_obj[0], s.rot_obj[1], s.rot_obj[2],
          s.pos_spl, s.hue_obj, s.hue_spl, s.hue_bg};
}

C3DILatentScene from_row(std::span<const double> row) {
  if (row.size() != kSceneColumns.size()) throw std::invalid_argument("from_row: need 11 values");
  const auto cls = static_cast<int>(row[0]);
  if (cls < 0 || cls >= static_cast<int>(kClassCount) || static_cast<double>(cls) != row[0]) {
    throw std::invalid_argument("from_row: invalid class id");
  }
  C3DILatentScene s;
  s.object_class = static_cast<ObjectClass>(cls);
  s.pos_obj = {row[1], row[2], row[3]};
  s.rot_obj = {row[4], row[5], row[6]};
  s.pos_spl = row[7];
  s.hue_obj = row[8];
  s.hue_spl = row[9];
  s.hue_bg = row[10];
  return s;
}

namespace {

void write_row(std::ostringstream& out, const C3DILatentScene& s) {
  const auto row = to_row(s);
  out << static_cast<int>(s.object_class);
  for (std::size_t i = 1; i < row.size(); ++i) out << ',' << io::format_double(row[i]);
}

}  // namespace

void export_scenes(std::span<const C3DILatentScene> scenes, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kSceneColumns.size(); ++i) out << (i ? "," : "") << kSceneColumns[i];
  out << '\n';
  for (const auto& s : scenes) {
    write_row(out, s);
    out << '\n';
  }
  io::write_file_atomic(path, out.str());
}

void export_scene_pairs(std::span<const C3DILatentScene> scenes,
                        std::span<const C3DILatentScene> views,
                        const std::filesystem::path& path) {
  if (scenes.size() != views.size()) {
    throw std::invalid_argument("export_scene_pairs: scene and view counts differ");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < kSceneColumns.size(); ++i) out << (i ? "," : "") << kSceneColumns[i];
  for (const auto& col : kSceneColumns) out << ",view_" << col;
  out << '\n';
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    write_row(out, scenes[i]);
    out << ',';
    write_row(out, views[i]);
    out << '\n';
  }
  io::write_file_atomic(path, out.str());
}

std::vector<C3DILatentScene> read_scenes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_scenes: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_scenes: missing header in " + path.string());
  std::vector<C3DILatentScene> out;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    row.clear();
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < kSceneColumns.size()) {
      throw std::runtime_error("read_scenes: short row in " + path.string());
    }
    out.push_back(from_row(std::span<const double>(row).first(kSceneColumns.size())));
  }
  return out;
}

}  // namespace blockid::c3di
