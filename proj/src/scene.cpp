#include "quic/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quic/error.hpp"

namespace quic::scene {

std::string_view glyph_name(Glyph glyph) {
  switch (glyph) {
    case Glyph::None: return "none";
    case Glyph::Cross: return "cross";
    case Glyph::Ring: return "ring";
    case Glyph::Square: return "square";
    case Glyph::Bar: return "bar";
  }
  return "none";
}

std::optional<Glyph> glyph_from_name(std::string_view name) {
  for (Glyph g : {Glyph::None, Glyph::Cross, Glyph::Ring, Glyph::Square, Glyph::Bar}) {
    if (glyph_name(g) == name) return g;
  }
  return std::nullopt;
}

bool glyph_covers(Glyph glyph, double scale, int x, int y, int width, int height) {
  const double side = std::min(width, height);
  const double u = (x + 0.5 - 0.5 * width) / side;
  const double v = (y + 0.5 - 0.5 * height) / side;
  const double half = 0.5 * scale;
  const double arm = 0.1 * scale;
  switch (glyph) {
    case Glyph::None: return false;
    case Glyph::Cross:
      return (std::abs(u) <= half && std::abs(v) <= arm) || (std::abs(v) <= half && std::abs(u) <= arm);
    case Glyph::Ring: {
      const double r = std::hypot(u, v);
      return r <= half && r >= 0.6 * half;
    }
    case Glyph::Square: return std::abs(u) <= half && std::abs(v) <= half;
    case Glyph::Bar: return std::abs(u) <= arm && std::abs(v) <= half;
  }
  return false;
}

Scene::Scene(int width, int height, std::vector<Surface> surfaces,
             std::optional<double> lateral_coherence_fwhm_px)
    : width_(width),
      height_(height),
      surfaces_(std::move(surfaces)),
      lateral_fwhm_px_(lateral_coherence_fwhm_px) {}

double Scene::lateral_factor(int x, int y) const {
  if (!lateral_fwhm_px_) return 1.0;
  const double dx = x - 0.5 * (width_ - 1);
  const double dy = y - 0.5 * (height_ - 1);
  const double fwhm = *lateral_fwhm_px_;
  return std::exp(-4.0 * std::log(2.0) * (dx * dx + dy * dy) / (fwhm * fwhm));
}

Scene build_scene(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) {
    throw SchemaError("scene.width", "camera dimensions must be positive");
  }
  if (spec.surfaces.empty()) throw SchemaError("scene.surfaces", "at least one surface is required");
  if (spec.lateral_coherence_fwhm_px && !(*spec.lateral_coherence_fwhm_px > 0.0)) {
    throw SchemaError("scene.lateral_coherence_fwhm_px", "must be positive or null");
  }

  std::vector<Surface> surfaces;
  surfaces.reserve(spec.surfaces.size());
  for (std::size_t s = 0; s < spec.surfaces.size(); ++s) {
    const SurfaceSpec& in = spec.surfaces[s];
    const std::string path = "scene.surfaces[" + std::to_string(s) + "]";
    if (!std::isfinite(in.depth_mm)) throw SchemaError(path + ".depth_mm", "must be finite");
    if (s > 0 && !(in.depth_mm > spec.surfaces[s - 1].depth_mm)) {
      throw SchemaError(path + ".depth_mm", "surface depths must be strictly increasing");
    }

    Surface out;
    out.depth_mm = in.depth_mm;
    if (in.reflectivity_map) {
      const auto& map = *in.reflectivity_map;
      if (map.width() != spec.width || map.height() != spec.height) {
        throw SchemaError(path + ".reflectivity_map", "dimensions do not match the camera");
      }
      out.reflectivity = map;
    } else {
      if (!(in.reflectivity >= 0.0 && in.reflectivity <= 1.0)) {
        throw SchemaError(path + ".reflectivity", "must lie in [0, 1]");
      }
      out.reflectivity = Grid<double>(spec.width, spec.height, in.reflectivity);
      if (in.glyph != Glyph::None) {
        for (int y = 0; y < spec.height; ++y) {
          for (int x = 0; x < spec.width; ++x) {
            if (glyph_covers(in.glyph, in.glyph_scale, x, y, spec.width, spec.height)) {
              out.reflectivity(x, y) = 0.0;
            }
          }
        }
      }
    }
    for (double r : out.reflectivity.values()) {
      if (!(r >= 0.0 && r <= 1.0)) throw SchemaError(path + ".reflectivity_map", "entries must lie in [0, 1]");
    }

    if (in.phase_map) {
      if (in.phase_map->width() != spec.width || in.phase_map->height() != spec.height) {
        throw SchemaError(path + ".phase_map", "dimensions do not match the camera");
      }
      out.phase = *in.phase_map;
    } else {
      out.phase = Grid<double>(spec.width, spec.height, in.phase_rad);
    }
    for (double p : out.phase.values()) {
      if (!std::isfinite(p)) throw SchemaError(path + ".phase_map", "entries must be finite");
    }
    surfaces.push_back(std::move(out));
  }
  return Scene(spec.width, spec.height, std::move(surfaces), spec.lateral_coherence_fwhm_px);
}

SceneSpec two_plate_scene(int width, int height, double front_depth_mm, double separation_mm) {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  SurfaceSpec front;
  front.depth_mm = front_depth_mm;
  front.glyph = Glyph::Cross;
  front.glyph_scale = 0.6;
  SurfaceSpec back;
  back.depth_mm = front_depth_mm + separation_mm;
  back.glyph = Glyph::Ring;
  back.glyph_scale = 0.6;
  spec.surfaces = {front, back};
  return spec;
}

SceneSpec uniform_scene(int width, int height, double depth_mm, double reflectivity) {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  SurfaceSpec surface;
  surface.depth_mm = depth_mm;
  surface.reflectivity = reflectivity;
  spec.surfaces = {surface};
  return spec;
}

}  // namespace quic::scene
