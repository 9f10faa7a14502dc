#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "quic/error.hpp"
#include "quic/scenario.hpp"

using namespace quic;
using namespace quic::scenario;
namespace ex = quic::experiments;

namespace {

const char* kMinimal = R"({"scene": {"surfaces": [{"depth_mm": 1.0}]}})";

std::string schema_field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<no schema error>";
}

ex::ScenarioConfig random_config(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ex::ScenarioConfig cfg;
  cfg.source.eta = 0.01 + 0.5 * u(gen);
  cfg.source.envelope_fwhm_mm = 0.1 + u(gen);
  cfg.scene.width = 1 + static_cast<int>(6 * u(gen));
  cfg.scene.height = 1 + static_cast<int>(6 * u(gen));
  const int surfaces = 1 + static_cast<int>(3 * u(gen));
  double depth = 0.1;
  for (int s = 0; s < surfaces; ++s) {
    scene::SurfaceSpec surface;
    depth += 0.05 + u(gen);
    surface.depth_mm = depth;
    surface.reflectivity = u(gen);
    surface.phase_rad = 6.0 * u(gen) - 3.0;
    surface.glyph = static_cast<scene::Glyph>(static_cast<int>(5 * u(gen)));
    surface.glyph_scale = 0.1 + 0.8 * u(gen);
    if (u(gen) < 0.3) {
      Grid<double> map(cfg.scene.width, cfg.scene.height);
      for (double& v : map.values()) v = u(gen);
      surface.reflectivity_map = map;
    }
    if (u(gen) < 0.3) {
      Grid<double> map(cfg.scene.width, cfg.scene.height);
      for (double& v : map.values()) v = 10.0 * u(gen) - 5.0;
      surface.phase_map = map;
    }
    cfg.scene.surfaces.push_back(surface);
  }
  if (u(gen) < 0.5) cfg.scene.lateral_coherence_fwhm_px = 1.0 + 20.0 * u(gen);
  cfg.scan.start_mm = u(gen) - 0.5;
  cfg.scan.step_nm = 20.0 + 150.0 * u(gen);
  cfg.scan.num_steps = 10000 + static_cast<std::int64_t>(30000 * u(gen));
  cfg.scan.exposure_ms = 1.0 + 100.0 * u(gen);
  cfg.scan.counts_per_intensity = 1e3 + 1e5 * u(gen);
  cfg.scan.shot_noise = u(gen) < 0.5;
  cfg.noise.led_power_density = 100.0 * u(gen);
  cfg.noise.jam_power_uw = 10.0 * u(gen);
  if (u(gen) < 0.5) cfg.noise.jam_pixel = std::array<double, 2>{10.0 * u(gen), 10.0 * u(gen)};
  cfg.noise.jam_detuning_rad = 1e-3 * u(gen);
  cfg.noise.jam_angle_per_pixel_rad = 1e-3 * u(gen);
  cfg.noise.jam_probe = u(gen) < 0.5;
  cfg.noise.jam_reference = u(gen) < 0.5;
  cfg.noise.dark_counts_per_ms = u(gen);
  cfg.noise.full_well = 1000 + static_cast<std::int64_t>(60000 * u(gen));
  cfg.noise.probe_power_nw = 1.0 + 100.0 * u(gen);
  cfg.noise.led_nw_per_density = 0.1 + 10.0 * u(gen);
  cfg.crystal.crystal_length_mm = 1.0 + 30.0 * u(gen);
  cfg.crystal.dk_per_radian = 0.1 + 3.0 * u(gen);
  cfg.crystal.gain_at_match = 1e-4 * u(gen);
  cfg.ref_dsp.window_um = 60.0 + 80.0 * u(gen);
  cfg.ref_dsp.hop_um = 0.5 + 2.0 * u(gen);
  cfg.ref_dsp.band_lo = 2.0 + 0.2 * u(gen);
  cfg.ref_dsp.band_hi = 2.25 + 0.2 * u(gen);
  cfg.ref_dsp.taper = u(gen) < 0.5 ? dsp::Taper::Hann : dsp::Taper::Rectangular;
  cfg.ref_dsp.zero_pad = 1 + static_cast<int>(4 * u(gen));
  cfg.probe_dsp.window_um = 60.0 + 80.0 * u(gen);
  cfg.probe_dsp.band_lo = 1.3 + 0.2 * u(gen);
  cfg.probe_dsp.band_hi = 1.53 + 0.2 * u(gen);
  cfg.peaks.max_surfaces = 1 + static_cast<int>(3 * u(gen));
  cfg.peaks.min_separation_mm = 0.01 + u(gen);
  cfg.peaks.threshold = 0.5 * u(gen);
  if (u(gen) < 0.7) {
    ex::SweepSpec sweep;
    sweep.kind = u(gen) < 0.5 ? ex::SweepKind::Led : ex::SweepKind::Jam;
    const int levels = static_cast<int>(6 * u(gen));
    for (int i = 0; i < levels; ++i) sweep.levels_db.push_back(60.0 * u(gen) - 10.0);
    cfg.sweep = sweep;
  }
  cfg.seeds.clear();
  const int seeds = 1 + static_cast<int>(4 * u(gen));
  for (int i = 0; i < seeds; ++i) cfg.seeds.push_back(gen());
  cfg.jamming.jam_db = 60.0 * u(gen);
  cfg.jamming.led_db = 60.0 * u(gen);
  cfg.jamming.mismatch_half_phase_rad = 0.1 + 10.0 * u(gen);
  cfg.snr_surface = static_cast<int>((surfaces - 1) * u(gen));
  return cfg;
}

}  // namespace

TEST(ParseScenario, MinimalFileUsesDefaults) {
  const auto cfg = parse_scenario(kMinimal);
  EXPECT_EQ(cfg.source.lambda_pump_nm, 532.0);
  EXPECT_EQ(cfg.source.lambda_ref_nm, 893.0);
  EXPECT_EQ(cfg.source.lambda_probe_nm, 1316.0);
  EXPECT_EQ(cfg.source.envelope_fwhm_mm, 0.4);
  EXPECT_EQ(cfg.scan.step_nm, 60.0);
  EXPECT_EQ(cfg.scan.num_steps, 58334);
  EXPECT_EQ(cfg.ref_dsp.window_um, 100.0);
  EXPECT_EQ(cfg.ref_dsp.band_lo, 2.0);
  EXPECT_EQ(cfg.ref_dsp.band_hi, 2.4);
  EXPECT_EQ(cfg.probe_dsp.band_lo, 1.4);
  EXPECT_EQ(cfg.probe_dsp.band_hi, 1.7);
  EXPECT_EQ(cfg.scene.width, 64);
  ASSERT_EQ(cfg.scene.surfaces.size(), 1u);
  EXPECT_EQ(cfg.scene.surfaces[0].depth_mm, 1.0);
  EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{1});
  EXPECT_FALSE(cfg.sweep.has_value());
}

TEST(ParseScenario, BandOrderNamesTheField) {
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "dsp": {"ref_band": [2.4, 2.0]}})"), "dsp.ref_band");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "dsp": {"probe": {"band": [1.7, 1.4]}}})"),
            "dsp.probe.band");
}

TEST(ParseScenario, EnergyViolationIsPhysicsError) {
  EXPECT_THROW(parse_scenario(R"({"scene": {"preset": "uniform"}, "source": {"lambda_ref_nm": 800}})"), PhysicsError);
}

TEST(ParseScenario, BandMissingFringeIsPhysicsError) {
  EXPECT_THROW(parse_scenario(R"({"scene": {"preset": "uniform"}, "dsp": {"ref_band": [2.3, 2.5]}})"), PhysicsError);
  EXPECT_THROW(parse_scenario(R"({"scene": {"preset": "uniform"}, "scan": {"step_nm": 250}})"), PhysicsError);
  EXPECT_THROW(parse_scenario(R"({"scene": {"preset": "uniform"}, "scan": {"num_steps": 1000}})"), PhysicsError);
}

TEST(ParseScenario, MalformedJsonReportsLineAndColumn) {
  try {
    parse_scenario("{\n  \"scene\": ,\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 12u);
    EXPECT_EQ(e.code(), "E_PARSE");
  }
}

TEST(ParseScenario, SchemaErrorsCarryDottedPaths) {
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "scan": {"lenght_mm": 1}})"), "scan.lenght_mm");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "bogus": 1})"), "bogus");
  EXPECT_EQ(schema_field_of(R"({"source": {"eta": 0.1}})"), "scene");
  EXPECT_EQ(schema_field_of(R"({"scene": {"surfaces": [{"depth_mm": 1}, {"reflectivity": 1}]}})"),
            "scene.surfaces[1].depth_mm");
  EXPECT_EQ(schema_field_of(R"({"scene": {"surfaces": [{"depth_mm": "far"}]}})"), "scene.surfaces[0].depth_mm");
  EXPECT_EQ(schema_field_of(R"({"scene": {"surfaces": [{"depth_mm": 1, "glyph": "star"}]}})"),
            "scene.surfaces[0].glyph");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "seeds": [-1]})"), "seeds[0]");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "seeds": []})"), "seeds");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "scan": {"length_mm": 1, "num_steps": 9000}})"),
            "scan.num_steps");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "sweep": {"kind": "led"}})"), "sweep.levels_db");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "noise": {"jam_channels": ["camera"]}})"),
            "noise.jam_channels[0]");
  EXPECT_EQ(schema_field_of(R"({"preset": "nope"})"), "preset");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "snr_surface": 1})"), "snr_surface");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform", "reflectivity": 2}})"), "scene.surfaces[0].reflectivity");
  EXPECT_EQ(schema_field_of(R"({"scene": {"preset": "uniform"}, "source": {"eta": 2}})"), "source");
}

TEST(ParseScenario, ScenePresetsAndShorthands) {
  const auto cfg = parse_scenario(R"({
    "scene": {"preset": "two_plates", "width": 8, "height": 4, "front_depth_mm": 0.5, "separation_mm": 1.5},
    "scan": {"length_mm": 2.5},
    "noise": {"led_db": 10, "jam_db": 45, "jam_channels": ["reference"]},
    "sweep": {"kind": "jam", "levels_db": [0, 20]},
    "seeds": [3, 4]
  })");
  EXPECT_EQ(cfg.scene, scene::two_plate_scene(8, 4, 0.5, 1.5));
  EXPECT_EQ(cfg.scan.num_steps, scan::ScanConfig::steps_for_length(2.5, 60.0));
  EXPECT_NEAR(cfg.noise.led_power_density, 720.0 / (44.0 / 7.0), 1e-9);
  EXPECT_NEAR(cfg.noise.jam_power_uw, 72.0 * std::pow(10.0, 4.5) * 1e-3, 1e-9);
  EXPECT_FALSE(cfg.noise.jam_probe);
  EXPECT_TRUE(cfg.noise.jam_reference);
  ASSERT_TRUE(cfg.sweep.has_value());
  EXPECT_EQ(cfg.sweep->kind, ex::SweepKind::Jam);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 4}));
}

TEST(ParseScenario, TopLevelPresetIsOverridable) {
  const auto cfg = parse_scenario(R"({"preset": "led_sweep", "seeds": [9]})");
  auto expected = ex::led_sweep_scenario();
  expected.seeds = {9};
  EXPECT_EQ(cfg, expected);
}

TEST(Presets, AllValidAndRoundTrip) {
  for (const char* name : {"paper_ranging", "led_sweep", "jam_sweep", "jamming"}) {
    const auto cfg = preset(name);
    ASSERT_TRUE(cfg.has_value()) << name;
    EXPECT_NO_THROW(cfg->validate()) << name;
    EXPECT_EQ(parse_scenario(serialize_scenario(*cfg)), *cfg) << name;
  }
  EXPECT_FALSE(preset("other").has_value());
  const auto ranging = *preset("paper_ranging");
  EXPECT_EQ(ranging.scan.num_steps, 58334);
  EXPECT_EQ(ranging.scene.width, 64);
  EXPECT_EQ(ranging.scene.surfaces.size(), 2u);
}

TEST(Serialize, RoundTripRandomConfigs) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = random_config(gen);
    ASSERT_NO_THROW(cfg.validate()) << trial;
    const auto text = serialize_scenario(cfg);
    ASSERT_EQ(parse_scenario(text), cfg) << text;
    ASSERT_EQ(serialize_scenario(parse_scenario(text)), text);
  }
}

TEST(Overrides, SeedAndPixels) {
  auto cfg = ex::led_sweep_scenario();
  const auto seeds = cfg.seeds.size();
  apply_overrides(cfg, {100, std::pair{8, 4}});
  ASSERT_EQ(cfg.seeds.size(), seeds);
  EXPECT_EQ(cfg.seeds.front(), 100u);
  EXPECT_EQ(cfg.seeds.back(), 100u + seeds - 1);
  EXPECT_EQ(cfg.scene.width, 8);
  EXPECT_EQ(cfg.scene.height, 4);
}

TEST(Overrides, ParsePixels) {
  EXPECT_EQ(parse_pixels("64x32"), (std::pair{64, 32}));
  for (const char* bad : {"64", "x4", "4x", "0x3", "3x-1", "4x4x4", "ax4"}) {
    try {
      parse_pixels(bad);
      FAIL() << bad;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.field(), "pixels");
    }
  }
}

TEST(LoadScenario, MissingFileIsIoError) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}
