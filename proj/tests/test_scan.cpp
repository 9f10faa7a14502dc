#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "quic/error.hpp"
#include "quic/scan.hpp"

using namespace quic;
using namespace quic::scan;

namespace {

ScanConfig short_scan(double start_mm, std::int64_t steps) {
  ScanConfig cfg;
  cfg.start_mm = start_mm;
  cfg.num_steps = steps;
  return cfg;
}

NoiseSpec quiet() {
  NoiseSpec noise;
  noise.dark_counts_per_ms = 0.0;
  return noise;
}

scene::Scene plate(int w, int h, double depth = 0.3, double r = 1.0) {
  return scene::build_scene(scene::uniform_scene(w, h, depth, r));
}

}  // namespace

TEST(ExpectedReference, FlatFarFromSurfaces) {
  const auto scene = plate(2, 2, 1.0);
  optics::SourceSpec s;
  EXPECT_NEAR(expected_reference_frame(scene, s, 6.0, {0, 0}), s.eta * s.eta, 1e-18);
}

TEST(ExpectedReference, ZeroDelaySum) {
  optics::SourceSpec s;
  const double eta2 = s.eta * s.eta;
  const auto one = plate(1, 1, 1.0);
  EXPECT_NEAR(expected_reference_frame(one, s, 1.0, {0, 0}), 2.0 * eta2, 1e-17);

  // Two surfaces weighted 1/2 each, only the first coherent.
  auto spec = scene::uniform_scene(1, 1, 1.0, 1.0);
  spec.surfaces.push_back(spec.surfaces[0]);
  spec.surfaces[1].depth_mm = 5.0;
  const auto pair = scene::build_scene(spec);
  EXPECT_NEAR(expected_reference_frame(pair, s, 1.0, {0, 0}), 2.0 * eta2 * 0.5 + eta2 * 0.5, 1e-17);
}

TEST(ExpectedReference, GlyphPixelIsFlat) {
  const auto scene = scene::build_scene(scene::two_plate_scene(16, 16, 0.5, 1.0));
  optics::SourceSpec s;
  const Pixel center{8, 8};  // on the front cross, off the back ring
  ASSERT_EQ(scene.surfaces()[0].reflectivity(8, 8), 0.0);
  for (double z : {0.5, 0.5001, 0.50023}) {
    // Back plate sits 1 mm behind the scan point, gamma ~ 3e-8.
    EXPECT_NEAR(expected_reference_frame(scene, s, z, center), s.eta * s.eta, 1e-9);
  }
  EXPECT_THROW(expected_reference_frame(scene, s, 0.5, {16, 0}), DomainError);
}

TEST(ExpectedProbe, LedAddsUniformBaseline) {
  const auto scene = plate(3, 3, 0.2);
  optics::SourceSpec s;
  NoiseSpec off;
  NoiseSpec on;
  on.led_power_density = 7.0;
  const double led = led_intensity(s, on);
  EXPECT_NEAR(led, s.eta * s.eta * 44.0 / 72.0, 1e-15);
  for (double z : {0.0, 0.2, 0.20011, 0.9}) {
    EXPECT_NEAR(expected_probe_frame(scene, s, z, {1, 2}, on) - expected_probe_frame(scene, s, z, {1, 2}, off),
                led, 1e-15);
  }
}

TEST(JamReference, SincFootprint) {
  NoiseSpec noise;
  noise.jam_power_uw = 2.0;
  noise.jam_pixel = std::array<double, 2>{4.0, 4.0};
  optics::PhaseMatchSpec crystal;
  EXPECT_DOUBLE_EQ(jam_reference_noise(noise, {4, 4}, crystal), crystal.gain_at_match * 2.0);
  // Defaults put the half mismatch at one radian per pixel of distance.
  noise.jam_pixel = std::array<double, 2>{optics::kPi, 0.0};
  EXPECT_NEAR(jam_reference_noise(noise, {0, 0}, crystal), 0.0, 1e-20);
  noise.jam_power_uw = 0.0;
  EXPECT_EQ(jam_reference_noise(noise, {3, 1}, crystal), 0.0);
}

TEST(JamReference, DetuningAddsInQuadrature) {
  NoiseSpec noise;
  noise.jam_pixel = std::array<double, 2>{0.0, 0.0};
  noise.jam_detuning_rad = 4e-4;
  EXPECT_NEAR(jam_angle(noise, {3, 0}), 5e-4, 1e-18);
}

TEST(ShotNoise, ZeroMeanAndSaturation) {
  ScanConfig cfg;
  NoiseSpec noise = quiet();
  rng::CellStream s(1);
  EXPECT_EQ(apply_shot_noise_and_saturation(0.0, cfg, noise, s), 0);
  noise.full_well = 10000;
  cfg.exposure_ms = 1.0;
  cfg.counts_per_intensity = 1e6;
  EXPECT_EQ(apply_shot_noise_and_saturation(1.0, cfg, noise, s), 10000);
  cfg.shot_noise = false;
  EXPECT_EQ(apply_shot_noise_and_saturation(1.0, cfg, noise, s), 10000);
  EXPECT_EQ(apply_shot_noise_and_saturation(2.4e-6, cfg, noise, s), 2);
}

TEST(ScanConfig, StepsAndNyquist) {
  EXPECT_EQ(ScanConfig::steps_for_length(3.5, 60.0), 58334);
  EXPECT_EQ(ScanConfig::steps_for_length(0.8, 60.0), 13334);
  ScanConfig cfg;
  optics::SourceSpec s;
  EXPECT_NO_THROW(cfg.validate(s));
  cfg.step_nm = 893.0 / 4.0;
  EXPECT_THROW(cfg.validate(s), PhysicsError);
  cfg.step_nm = 60.0;
  cfg.num_steps = 1;
  EXPECT_THROW(cfg.validate(s), DomainError);
}

TEST(Simulator, ExpectedTraceMatchesClosedForm) {
  auto spec = scene::two_plate_scene(8, 8, 0.1, 0.05);
  spec.surfaces[0].phase_rad = 0.7;
  spec.lateral_coherence_fwhm_px = 6.0;
  const auto scene = scene::build_scene(spec);
  optics::SourceSpec s;
  const ScanSimulator sim(scene, s, short_scan(0.0, 4000), quiet(), {}, 1);
  std::vector<double> trace(4000);
  for (Pixel p : {Pixel{0, 0}, Pixel{1, 6}, Pixel{4, 4}}) {
    sim.expected_trace(Channel::Reference, p, trace);
    for (std::size_t i = 0; i < trace.size(); i += 37) {
      ASSERT_NEAR(trace[i], expected_reference_frame(scene, s, sim.config().position_mm(i), p), 1e-14);
    }
  }
}

TEST(Simulator, CountsConvergeToExpectedFrame) {
  const auto scene = plate(1, 1, 0.05);
  optics::SourceSpec s;
  auto cfg = short_scan(0.0, 2000);
  cfg.counts_per_intensity = 3e6;  // peak stays below the full well
  cfg.exposure_ms = 1.0;
  NoiseSpec noise = quiet();
  const auto stack = simulate_scan(scene, s, cfg, noise, 9);
  const double scale = cfg.counts_per_intensity * cfg.exposure_ms;
  double err2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < stack.num_steps(); ++i) {
    const double expected = expected_reference_frame(scene, s, stack.positions_mm[i], {0, 0});
    const double measured = stack.ref_counts[i] / scale;
    err2 += (measured - expected) * (measured - expected);
    ref2 += expected * expected;
  }
  EXPECT_LT(std::sqrt(err2 / ref2), 0.01);
}

TEST(Simulator, ProbeFringesFollowProbeWavelength) {
  const auto scene = plate(1, 1, 0.0);
  optics::SourceSpec s;
  const ScanSimulator sim(scene, s, short_scan(-0.01, 334), quiet(), {}, 1);
  std::vector<double> ref(334);
  std::vector<double> probe(334);
  sim.expected_trace(Channel::Reference, {0, 0}, ref);
  sim.expected_trace(Channel::Probe, {0, 0}, probe);
  auto crossings = [](const std::vector<double>& v) {
    const double mid = 0.01;  // eta^2, the fringe midline
    int n = 0;
    for (std::size_t i = 1; i < v.size(); ++i) n += (v[i - 1] - mid) * (v[i] - mid) < 0.0;
    return n;
  };
  // 20 um of scan: 2 * 20 / lambda fringe periods, two crossings each.
  EXPECT_NEAR(crossings(ref), 4.0 * 20.0 / 0.893, 2.0);
  EXPECT_NEAR(crossings(probe), 4.0 * 20.0 / 1.316, 2.0);
}

TEST(Simulator, ChannelIsolationUnderLed) {
  const auto scene = scene::build_scene(scene::two_plate_scene(6, 6, 0.05, 0.1));
  optics::SourceSpec s;
  NoiseSpec led;
  led.led_power_density = 500.0;
  const auto cfg = short_scan(0.0, 3000);
  const auto clean = simulate_scan(scene, s, cfg, NoiseSpec{}, 21);
  const auto noisy = simulate_scan(scene, s, cfg, led, 21);
  EXPECT_EQ(clean.ref_counts, noisy.ref_counts);
  EXPECT_NE(clean.probe_counts, noisy.probe_counts);
}

TEST(Simulator, DeterministicAcrossThreadCounts) {
  const auto scene = scene::build_scene(scene::two_plate_scene(7, 5, 0.02, 0.05));
  optics::SourceSpec s;
  NoiseSpec noise;
  noise.led_power_density = 3.0;
  noise.jam_power_uw = 1.0;
  const auto cfg = short_scan(0.0, 1500);
  ::setenv("QUIC_SIM_THREADS", "1", 1);
  const auto a = simulate_scan(scene, s, cfg, noise, 77);
  ::setenv("QUIC_SIM_THREADS", "4", 1);
  const auto b = simulate_scan(scene, s, cfg, noise, 77);
  ::unsetenv("QUIC_SIM_THREADS");
  EXPECT_EQ(a.ref_counts, b.ref_counts);
  EXPECT_EQ(a.probe_counts, b.probe_counts);

  const auto c = simulate_scan(scene, s, cfg, noise, 78);
  EXPECT_NE(a.ref_counts, c.ref_counts);
}

TEST(Simulator, SubRangesAndReverseOrderMatchFullStack) {
  const auto scene = scene::build_scene(scene::two_plate_scene(4, 4, 0.02, 0.05));
  optics::SourceSpec s;
  const ScanSimulator sim(scene, s, short_scan(0.0, 1200), NoiseSpec{}, {}, 5);
  const auto stack = sim.simulate();
  for (int p = 15; p >= 0; --p) {
    const Pixel px{p % 4, p / 4};
    std::vector<std::uint16_t> part(300);
    sim.counts_trace(Channel::Probe, px, part, 700);
    const auto full = stack.trace(Channel::Probe, px);
    for (std::size_t i = 0; i < part.size(); ++i) ASSERT_EQ(part[i], full[700 + i]);
  }
  std::vector<std::uint16_t> over(600);
  EXPECT_THROW(sim.counts_trace(Channel::Reference, {0, 0}, over, 700), DomainError);
}

TEST(Simulator, CountsStayWithinFullWell) {
  const auto scene = plate(3, 3, 0.02);
  optics::SourceSpec s;
  NoiseSpec noise;
  noise.full_well = 12000;
  noise.led_power_density = 5.0;
  const auto stack = simulate_scan(scene, s, short_scan(0.0, 1000), noise, 3);
  for (auto c : stack.ref_counts) ASSERT_LE(c, 12000);
  for (auto c : stack.probe_counts) ASSERT_LE(c, 12000);
}

TEST(Simulator, StrongJamSaturatesProbe) {
  const auto scene = plate(2, 2, 0.02);
  optics::SourceSpec s;
  NoiseSpec noise;
  noise.jam_power_uw = 100.0;  // far above full_well / counts_per_intensity
  const auto stack = simulate_scan(scene, s, short_scan(0.0, 500), noise, 3);
  for (auto c : stack.probe_counts) ASSERT_EQ(c, noise.full_well);
}

TEST(Simulator, JamPowerNeverLowersProbeExpectation) {
  const auto scene = plate(3, 3, 0.02);
  optics::SourceSpec s;
  std::vector<double> prev(800);
  std::vector<double> next(800);
  NoiseSpec noise;
  ScanSimulator(scene, s, short_scan(0.0, 800), noise, {}, 1).expected_trace(Channel::Probe, {1, 1}, prev);
  for (double p : {1e-3, 0.1, 1.0, 10.0}) {
    noise.jam_power_uw = p;
    ScanSimulator(scene, s, short_scan(0.0, 800), noise, {}, 1).expected_trace(Channel::Probe, {1, 1}, next);
    for (std::size_t i = 0; i < next.size(); ++i) ASSERT_GE(next[i], prev[i]);
    prev = next;
  }
}

TEST(FrameStack, FramesAndTracesAgree) {
  const auto scene = plate(3, 2, 0.01);
  optics::SourceSpec s;
  const auto stack = simulate_scan(scene, s, short_scan(0.0, 50), NoiseSpec{}, 2);
  ASSERT_EQ(stack.num_steps(), 50u);
  for (std::size_t i : {0u, 17u, 49u}) {
    const auto frame = stack.frame(Channel::Probe, i);
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 3; ++x) ASSERT_EQ(frame(x, y), stack.trace(Channel::Probe, {x, y})[i]);
    }
  }
  EXPECT_THROW(stack.frame(Channel::Reference, 50), DomainError);
  EXPECT_THROW(stack.trace(Channel::Reference, {3, 0}), DomainError);
}

TEST(FrameStack, SinglePixelTraceIsWholeStack) {
  const auto scene = plate(1, 1, 0.01);
  optics::SourceSpec s;
  const auto stack = simulate_scan(scene, s, short_scan(0.0, 64), NoiseSpec{}, 2);
  const auto t = stack.trace(Channel::Reference, {0, 0});
  EXPECT_TRUE(std::equal(t.begin(), t.end(), stack.ref_counts.begin(), stack.ref_counts.end()));
}

TEST(FrameStack, MemoryBudgetIsEnforced) {
  const auto scene = plate(4, 4, 0.01);
  optics::SourceSpec s;
  EXPECT_THROW(simulate_scan(scene, s, short_scan(0.0, 1000), NoiseSpec{}, 1, {}, 1000), ResourceError);
}

TEST(CellKey, DistinctAcrossCoordinates) {
  EXPECT_NE(cell_key(1, Channel::Reference, 0, 0), cell_key(1, Channel::Probe, 0, 0));
  EXPECT_NE(cell_key(1, Channel::Reference, 1, 0), cell_key(1, Channel::Reference, 0, 1));
  EXPECT_EQ(cell_key(4, Channel::Probe, 9, 2), cell_key(4, Channel::Probe, 9, 2));
}
