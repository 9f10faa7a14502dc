#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quic/grid.hpp"

namespace quic::scene {

/// Hollowed symbol cut out of a plate. Pixels inside the glyph reflect nothing.
enum class Glyph { None, Cross, Ring, Square, Bar };

std::string_view glyph_name(Glyph glyph);
std::optional<Glyph> glyph_from_name(std::string_view name);

/// True if pixel (x, y) of a width x height camera lies inside the glyph.
/// `scale` is the glyph extent as a fraction of the shorter frame side.
bool glyph_covers(Glyph glyph, double scale, int x, int y, int width, int height);

/// Declarative description of one reflecting surface.
struct SurfaceSpec {
  double depth_mm = 1.0;
  double reflectivity = 1.0;  // uniform |r_p| outside the glyph
  double phase_rad = 0.0;     // uniform reflection phase
  Glyph glyph = Glyph::None;
  double glyph_scale = 0.5;
  std::optional<Grid<double>> reflectivity_map;  // overrides reflectivity + glyph
  std::optional<Grid<double>> phase_map;         // overrides phase_rad

  bool operator==(const SurfaceSpec&) const = default;
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  std::vector<SurfaceSpec> surfaces;
  std::optional<double> lateral_coherence_fwhm_px;  // nullopt = infinite

  bool operator==(const SceneSpec&) const = default;
};

struct Surface {
  double depth_mm = 0.0;
  Grid<double> reflectivity;  // |r_p| per pixel
  Grid<double> phase;         // reflection phase per pixel (rad)
};

/// Validated scene: surfaces ordered front to back with strictly increasing depth.
class Scene {
 public:
  Scene(int width, int height, std::vector<Surface> surfaces,
        std::optional<double> lateral_coherence_fwhm_px);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  const std::vector<Surface>& surfaces() const noexcept { return surfaces_; }
  std::optional<double> lateral_coherence_fwhm_px() const noexcept { return lateral_fwhm_px_; }

  /// Visibility multiplier from finite lateral coherence: Gaussian falloff
  /// from the frame center, 1 everywhere when coherence is infinite.
  double lateral_factor(int x, int y) const;

 private:
  int width_;
  int height_;
  std::vector<Surface> surfaces_;
  std::optional<double> lateral_fwhm_px_;
};

/// Throws SchemaError on empty surface lists, non-increasing depths,
/// reflectivity outside [0, 1] or map dimensions not matching the camera.
Scene build_scene(const SceneSpec& spec);

/// Two silica plates with hollowed symbols: a cross cut into the front
/// surface and a ring cut into the back surface.
SceneSpec two_plate_scene(int width, int height, double front_depth_mm, double separation_mm);

/// One flat surface of uniform reflectivity.
SceneSpec uniform_scene(int width, int height, double depth_mm, double reflectivity);

}  // namespace quic::scene
