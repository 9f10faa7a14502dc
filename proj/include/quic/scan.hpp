#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "quic/grid.hpp"
#include "quic/optics.hpp"
#include "quic/rng.hpp"
#include "quic/scene.hpp"

namespace quic::scan {

enum class Channel { Reference, Probe };

std::string_view channel_name(Channel channel);  // "ref" / "probe"

/// Reference-mirror sweep and detector calibration.
struct ScanConfig {
  double start_mm = 0.0;
  double step_nm = 60.0;
  std::int64_t num_steps = 58334;  // 3.5 mm at 60 nm
  double exposure_ms = 50.0;
  double counts_per_intensity = 20000.0;  // photoelectrons per intensity unit per ms
  bool shot_noise = true;                 // false: counts are the rounded mean

  double position_mm(std::int64_t index) const noexcept {
    return start_mm + static_cast<double>(index) * step_nm * 1e-6;
  }
  double end_mm() const noexcept { return position_mm(num_steps - 1); }

  /// Frame count for a scan of `length_mm`: ceil(length / step).
  static std::int64_t steps_for_length(double length_mm, double step_nm);

  /// Throws DomainError on non-positive values, PhysicsError if the step
  /// undersamples the reference fringe (step >= lambda_ref / 4).
  void validate(const optics::SourceSpec& source) const;

  bool operator==(const ScanConfig&) const = default;
};

/// Background light, jamming laser and detector limits.
struct NoiseSpec {
  double led_power_density = 0.0;  // mW/m^2/nm, reaches the probe camera only
  double jam_power_uw = 0.0;
  std::optional<std::array<double, 2>> jam_pixel;  // phase-matched direction; nullopt = (w/2, h/2)
  double jam_detuning_rad = 0.0;                   // extra mismatch from crystal tilt/temperature
  double jam_angle_per_pixel_rad = 1e-4;
  bool jam_probe = true;      // direct laser light on the probe camera
  bool jam_reference = true;  // stimulated-PDC light on the reference camera
  double dark_counts_per_ms = 0.2;
  std::int64_t full_well = 65535;
  // Power calibration at the probe camera. Defaults: 72 nW reflected probe,
  // 44 nW for an LED of 7 mW/m^2/nm.
  double probe_power_nw = 72.0;
  double led_nw_per_density = 44.0 / 7.0;

  double led_power_nw() const noexcept { return led_power_density * led_nw_per_density; }
  double jam_power_nw() const noexcept { return jam_power_uw * 1e3; }

  void validate() const;

  bool operator==(const NoiseSpec&) const = default;
};

/// Per-position camera frames for both channels. Counts are stored
/// pixel-major (one contiguous trace per pixel); `frame()` gathers one
/// scan position.
struct FrameStack {
  int width = 0;
  int height = 0;
  std::vector<double> positions_mm;
  std::vector<std::uint16_t> ref_counts;
  std::vector<std::uint16_t> probe_counts;
  optics::SourceSpec source;
  ScanConfig scan;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  std::size_t num_steps() const noexcept { return positions_mm.size(); }
  std::span<const std::uint16_t> trace(Channel channel, Pixel pixel) const;
  Grid<std::uint16_t> frame(Channel channel, std::size_t scan_index) const;
};

/// Interference sum over surfaces for the reference camera, without jam light.
double expected_reference_frame(const scene::Scene& scene, const optics::SourceSpec& source,
                                double scan_z_mm, Pixel pixel);

/// Classical interference at the probe wavelength plus LED background and
/// direct jam light.
double expected_probe_frame(const scene::Scene& scene, const optics::SourceSpec& source,
                            double scan_z_mm, Pixel pixel, const NoiseSpec& noise);

double led_intensity(const optics::SourceSpec& source, const NoiseSpec& noise);
double direct_jam_intensity(const optics::SourceSpec& source, const NoiseSpec& noise);

/// Angular offset of a pixel from the phase-matched jam direction.
double jam_angle(const NoiseSpec& noise, Pixel pixel);

/// Stimulated-PDC light reaching the reference camera at `pixel`. Requires
/// `noise.jam_pixel` to be set.
double jam_reference_noise(const NoiseSpec& noise, Pixel pixel, const optics::PhaseMatchSpec& crystal);

/// Poisson draw around the calibrated mean, clipped to the full well.
std::int64_t apply_shot_noise_and_saturation(double expected, const ScanConfig& cfg,
                                             const NoiseSpec& noise, rng::CellStream& stream);

/// Stream key of one detector cell.
std::uint64_t cell_key(std::uint64_t seed, Channel channel, std::int64_t scan_index,
                       std::size_t pixel_index);

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{3} << 30;

/// Precomputed forward model. Any subset of pixels can be simulated in any
/// order; results match `simulate()` bit for bit.
class ScanSimulator {
 public:
  ScanSimulator(const scene::Scene& scene, const optics::SourceSpec& source, const ScanConfig& cfg,
                const NoiseSpec& noise, const optics::PhaseMatchSpec& crystal, std::uint64_t seed);

  const scene::Scene& scene() const noexcept { return scene_; }
  const ScanConfig& config() const noexcept { return cfg_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  std::vector<double> positions_mm() const;

  /// Mean intensity (arbitrary units) for one pixel at scan indices
  /// [first, first + out.size()).
  void expected_trace(Channel channel, Pixel pixel, std::span<double> out, std::int64_t first = 0) const;
  /// Photoelectron counts for one pixel at scan indices [first, first + out.size()).
  void counts_trace(Channel channel, Pixel pixel, std::span<std::uint16_t> out,
                    std::int64_t first = 0) const;

  static std::size_t stack_bytes(const scene::Scene& scene, const ScanConfig& cfg);

  FrameStack simulate(std::size_t memory_budget = kDefaultMemoryBudget) const;

 private:
  struct FringeTable {
    std::vector<double> gamma_cos;  // gamma * cos(theta) per scan index
    std::vector<double> gamma_sin;
  };

  const std::vector<FringeTable>& tables(Channel channel) const {
    return channel == Channel::Reference ? ref_tables_ : probe_tables_;
  }

  scene::Scene scene_;
  optics::SourceSpec source_;
  ScanConfig cfg_;
  NoiseSpec noise_;
  optics::PhaseMatchSpec crystal_;
  std::uint64_t seed_;
  std::vector<FringeTable> ref_tables_;
  std::vector<FringeTable> probe_tables_;
};

/// Throws ResourceError when the stack would exceed `memory_budget` bytes.
FrameStack simulate_scan(const scene::Scene& scene, const optics::SourceSpec& source,
                         const ScanConfig& cfg, const NoiseSpec& noise, std::uint64_t seed,
                         const optics::PhaseMatchSpec& crystal = {},
                         std::size_t memory_budget = kDefaultMemoryBudget);

}  // namespace quic::scan
