#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockid/numcore/rng.hpp"

namespace blockid::c3di {

using numcore::RngStream;

enum class ObjectClass : int { teapot = 0, hare, dragon, cow, armadillo, horse, head };
inline constexpr std::size_t kClassCount = 7;
inline constexpr double kObjectSigma = 0.5;

std::string_view class_name(ObjectClass c);

/// One latent configuration of a Causal3DIdent scene. Continuous latents lie in [-1, 1].
struct C3DILatentScene {
  ObjectClass object_class = ObjectClass::teapot;
  std::array<double, 3> pos_obj{};  // x, y, z
  std::array<double, 3> rot_obj{};  // phi, theta, psi
  double pos_spl = 0.0;
  double hue_obj = 0.0;
  double hue_spl = 0.0;
  double hue_bg = 0.0;

  friend bool operator==(const C3DILatentScene&, const C3DILatentScene&) = default;
};

/// Latent groups redrawn by a latent transformation. "positions" covers the
/// object position and the spotlight position, "hues" covers object, spotlight
/// and background hue. The class never changes.
struct LTSpec {
  bool positions = false;
  bool rotations = false;
  bool hues = false;
  double sigma = 1.0;

  void validate() const;
  /// Comma-separated subset of {positions, rotations, hues}.
  static LTSpec parse(std::string_view groups);
  std::string to_string() const;
};

std::array<double, 3> rotation_means(ObjectClass c);
/// pos_spl is rescaled from [-1, 1] to [-pi/2, pi/2] before sin/cos.
std::array<double, 3> position_means(ObjectClass c, double pos_spl);
double hue_mean(ObjectClass c, double hue_bg, double hue_spl);

/// Class and environment uniform; object latents truncated-normal (sigma 0.5)
/// around class- and environment-dependent centres.
C3DILatentScene sample_scene(RngStream& rng);
C3DILatentScene sample_lt_view(const C3DILatentScene& z, const LTSpec& spec, RngStream& rng);

inline constexpr std::array<std::string_view, 11> kSceneColumns{
    "class", "pos_x", "pos_y", "pos_z", "rot_phi", "rot_theta",
    "rot_psi", "pos_spl", "hue_obj", "hue_spl", "hue_bg"};

std::array<double, 11> to_row(const C3DILatentScene& s);
C3DILatentScene from_row(std::span<const double> row);

void export_scenes(std::span<const C3DILatentScene> scenes, const std::filesystem::path& path);
/// Scene columns followed by the same columns prefixed "view_".
void export_scene_pairs(std::span<const C3DILatentScene> scenes,
                        std::span<const C3DILatentScene> views,
                        const std::filesystem::path& path);
std::vector<C3DILatentScene> read_scenes(const std::filesystem::path& path);

}  // namespace blockid::c3di
