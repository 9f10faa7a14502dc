#include <gtest/gtest.h>

#include <cmath>

#include "quic/error.hpp"
#include "quic/scene.hpp"

using namespace quic;
using namespace quic::scene;

namespace {

std::string schema_field(const SceneSpec& spec) {
  try {
    build_scene(spec);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(BuildScene, SingleUniformSurface) {
  const auto scene = build_scene(uniform_scene(4, 3, 1.0, 1.0));
  ASSERT_EQ(scene.surfaces().size(), 1u);
  EXPECT_EQ(scene.width(), 4);
  EXPECT_EQ(scene.height(), 3);
  EXPECT_EQ(scene.pixel_count(), 12u);
  EXPECT_EQ(scene.surfaces()[0].depth_mm, 1.0);
  for (double r : scene.surfaces()[0].reflectivity.values()) EXPECT_EQ(r, 1.0);
  for (double p : scene.surfaces()[0].phase.values()) EXPECT_EQ(p, 0.0);
}

TEST(BuildScene, TwoPlatesMatchGlyphMasks) {
  const auto spec = two_plate_scene(32, 32, 1.0, 2.0);
  const auto scene = build_scene(spec);
  ASSERT_EQ(scene.surfaces().size(), 2u);
  EXPECT_EQ(scene.surfaces()[0].depth_mm, 1.0);
  EXPECT_EQ(scene.surfaces()[1].depth_mm, 3.0);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& in = spec.surfaces[s];
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const double expected = glyph_covers(in.glyph, in.glyph_scale, x, y, 32, 32) ? 0.0 : 1.0;
        ASSERT_EQ(scene.surfaces()[s].reflectivity(x, y), expected);
      }
    }
  }
}

TEST(BuildScene, DefaultPlatesHaveDarkGlyphPixels) {
  const auto scene = build_scene(two_plate_scene(64, 64, 1.0, 2.0));
  // Frame center lies on the cross; a ring pixel sits at radius ~0.25 of the side.
  EXPECT_EQ(scene.surfaces()[0].reflectivity(32, 32), 0.0);
  EXPECT_EQ(scene.surfaces()[1].reflectivity(32, 32), 1.0);
  EXPECT_EQ(scene.surfaces()[1].reflectivity(32 + 15, 32), 0.0);
  EXPECT_EQ(scene.surfaces()[0].reflectivity(2, 2), 1.0);
  EXPECT_EQ(scene.surfaces()[1].reflectivity(2, 2), 1.0);
}

TEST(BuildScene, MapsOverrideUniformValues) {
  SceneSpec spec = uniform_scene(2, 2, 0.5, 1.0);
  Grid<double> refl(2, 2, 0.25);
  refl(1, 0) = 0.75;
  Grid<double> phase(2, 2, 0.5);
  spec.surfaces[0].reflectivity_map = refl;
  spec.surfaces[0].phase_map = phase;
  spec.surfaces[0].glyph = Glyph::Square;
  const auto scene = build_scene(spec);
  EXPECT_EQ(scene.surfaces()[0].reflectivity, refl);
  EXPECT_EQ(scene.surfaces()[0].phase, phase);
}

TEST(BuildScene, ErrorsNameTheField) {
  SceneSpec empty;
  EXPECT_EQ(schema_field(empty), "scene.surfaces");

  auto spec = two_plate_scene(8, 8, 2.0, 1.0);
  spec.surfaces[1].depth_mm = 2.0;
  EXPECT_EQ(schema_field(spec), "scene.surfaces[1].depth_mm");

  spec = uniform_scene(8, 8, 1.0, 1.5);
  EXPECT_EQ(schema_field(spec), "scene.surfaces[0].reflectivity");

  spec = uniform_scene(8, 8, 1.0, 1.0);
  spec.surfaces[0].reflectivity_map = Grid<double>(4, 8, 1.0);
  EXPECT_EQ(schema_field(spec), "scene.surfaces[0].reflectivity_map");

  spec = uniform_scene(8, 8, 1.0, 1.0);
  spec.surfaces[0].phase_map = Grid<double>(8, 8, std::nan(""));
  EXPECT_EQ(schema_field(spec), "scene.surfaces[0].phase_map");

  spec = uniform_scene(8, 8, 1.0, 1.0);
  spec.lateral_coherence_fwhm_px = 0.0;
  EXPECT_EQ(schema_field(spec), "scene.lateral_coherence_fwhm_px");

  spec = uniform_scene(8, 8, 1.0, 1.0);
  spec.width = 0;
  EXPECT_EQ(schema_field(spec), "scene.width");
}

TEST(Glyph, NamesRoundTrip) {
  for (Glyph g : {Glyph::None, Glyph::Cross, Glyph::Ring, Glyph::Square, Glyph::Bar}) {
    EXPECT_EQ(glyph_from_name(glyph_name(g)), g);
  }
  EXPECT_FALSE(glyph_from_name("star").has_value());
}

TEST(Glyph, CoverageGeometry) {
  // 20 x 20 frame, scale 1: half extent 10 px, arm 2 px.
  EXPECT_TRUE(glyph_covers(Glyph::Cross, 1.0, 10, 10, 20, 20));
  EXPECT_TRUE(glyph_covers(Glyph::Cross, 1.0, 0, 10, 20, 20));
  EXPECT_FALSE(glyph_covers(Glyph::Cross, 1.0, 0, 0, 20, 20));
  EXPECT_TRUE(glyph_covers(Glyph::Square, 0.5, 7, 7, 20, 20));
  EXPECT_FALSE(glyph_covers(Glyph::Square, 0.5, 2, 7, 20, 20));
  EXPECT_FALSE(glyph_covers(Glyph::Ring, 1.0, 10, 10, 20, 20));
  EXPECT_TRUE(glyph_covers(Glyph::Ring, 1.0, 18, 10, 20, 20));
  EXPECT_TRUE(glyph_covers(Glyph::Bar, 1.0, 10, 1, 20, 20));
  EXPECT_FALSE(glyph_covers(Glyph::Bar, 1.0, 15, 10, 20, 20));
  EXPECT_FALSE(glyph_covers(Glyph::None, 1.0, 10, 10, 20, 20));
}

TEST(LateralFactor, InfiniteCoherenceIsUnity) {
  const auto scene = build_scene(uniform_scene(9, 9, 1.0, 1.0));
  EXPECT_EQ(scene.lateral_factor(0, 0), 1.0);
  EXPECT_EQ(scene.lateral_factor(4, 4), 1.0);
}

TEST(LateralFactor, GaussianFromCenter) {
  auto spec = uniform_scene(9, 9, 1.0, 1.0);
  spec.lateral_coherence_fwhm_px = 4.0;
  const auto scene = build_scene(spec);
  EXPECT_EQ(scene.lateral_factor(4, 4), 1.0);
  EXPECT_NEAR(scene.lateral_factor(6, 4), 0.5, 1e-15);
  EXPECT_NEAR(scene.lateral_factor(4, 2), 0.5, 1e-15);
  EXPECT_EQ(scene.lateral_factor(0, 3), scene.lateral_factor(8, 5));
}

TEST(Grid, RejectsNonPositiveDimensions) {
  EXPECT_THROW(Grid<int>(0, 3), DomainError);
  EXPECT_THROW(Grid<int>(3, -1), DomainError);
  Grid<int> g(3, 2, 7);
  EXPECT_EQ(g.size(), 6u);
  EXPECT_EQ(g.index(2, 1), 5u);
  EXPECT_TRUE(g.contains(2, 1));
  EXPECT_FALSE(g.contains(3, 0));
}
