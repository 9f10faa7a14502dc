#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quic/dsp.hpp"
#include "quic/optics.hpp"
#include "quic/scan.hpp"
#include "quic/scene.hpp"
#include "quic/writers.hpp"

namespace quic::experiments {

using scan::Channel;

enum class SweepKind { Led, Jam };

std::string_view sweep_kind_name(SweepKind kind);  // "led" / "jam"

struct SweepSpec {
  SweepKind kind = SweepKind::Led;
  std::vector<double> levels_db;  // noise power relative to the reflected probe

  bool operator==(const SweepSpec&) const = default;
};

/// Noise conditions of the jamming experiment.
struct JammingSpec {
  double jam_db = 45.0;
  double led_db = 30.0;
  // Half phase mismatch Delta k L / 2 added by detuning for the mismatched case.
  double mismatch_half_phase_rad = 1.5 * optics::kPi;

  bool operator==(const JammingSpec&) const = default;
};

struct ScenarioConfig {
  optics::SourceSpec source;
  scene::SceneSpec scene;
  scan::ScanConfig scan;
  scan::NoiseSpec noise;
  optics::PhaseMatchSpec crystal;
  dsp::StftConfig ref_dsp = dsp::StftConfig::reference_default();
  dsp::StftConfig probe_dsp = dsp::StftConfig::probe_default();
  dsp::PeakConfig peaks;
  std::optional<SweepSpec> sweep;
  std::vector<std::uint64_t> seeds{1};
  JammingSpec jamming;
  int snr_surface = 0;  // surface whose fringe burst is used for SNR

  const dsp::StftConfig& dsp_for(Channel channel) const {
    return channel == Channel::Reference ? ref_dsp : probe_dsp;
  }

  /// Full consistency check. Throws SchemaError for structural problems and
  /// PhysicsError when a band misses its channel's fringe frequency, the scan
  /// undersamples the fringe, the scan is shorter than one window or energy
  /// is not conserved.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// LED spectral density giving `db` of noise power over the reflected probe.
double led_density_for_db(const scan::NoiseSpec& noise, double db);
/// Jam laser power (uW) giving `db` of noise power over the reflected probe.
double jam_power_for_db(const scan::NoiseSpec& noise, double db);

/// `base` with the LED or jam power set to `db`. kNoNoiseDb switches that
/// noise source off.
scan::NoiseSpec noise_at_level(const scan::NoiseSpec& base, SweepKind kind, double db);

/// Half phase mismatch Delta k L / 2 of the stimulated-PDC light at `pixel`.
double jam_half_phase(const scan::NoiseSpec& noise, const optics::PhaseMatchSpec& crystal, Pixel pixel);

/// Detuning that puts the jam direction at half phase mismatch `half_phase`.
double detuning_for_half_phase(const optics::PhaseMatchSpec& crystal, double half_phase);

// ---------------------------------------------------------------- presets

/// 64 x 64 two-plate scene, 3.5 mm scan at 60 nm.
ScenarioConfig paper_ranging_scenario();
/// 16 x 16 flat surface, 0.8 mm scan, LED levels 0..45 dB, 50 seeds.
ScenarioConfig led_sweep_scenario();
/// Same geometry as the LED sweep with a phase-matched jam laser.
ScenarioConfig jam_sweep_scenario();
/// 32 x 32 glyph plate, 0.8 mm scan around its front surface.
ScenarioConfig jamming_scenario();

struct RunOptions {
  std::filesystem::path out_dir;  // empty: no artifacts are written
  bool probe = true;              // also analyze the probe channel
};

// ---------------------------------------------------------------- ranging

struct SurfaceSummary {
  std::size_t index = 0;
  double expected_position_mm = 0.0;  // cluster center
  double mean_position_mm = 0.0;
  double std_position_mm = 0.0;       // spread across pixels
  std::size_t pixels = 0;
};

struct ChannelRanging {
  Channel channel = Channel::Reference;
  dsp::DepthMaps maps;
  std::vector<SurfaceSummary> surfaces;
  Pixel inspected;                  // pixel with the highest summed visibility
  dsp::VisibilityCurve inspected_curve;
  std::vector<dsp::SurfaceEstimate> inspected_peaks;
  double envelope_fwhm_mm = 0.0;    // FWHM of the inspected curve's main peak
  std::size_t failed_pixels = 0;
};

struct RangingReport {
  ChannelRanging ref;
  std::optional<ChannelRanging> probe;
  std::vector<io::Artifact> artifacts;
  std::string manifest;
};

/// Simulates and analyzes every pixel of the first seed, streaming one pixel
/// trace at a time.
RangingReport run_ranging_experiment(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Same analysis on an existing frame stack.
RangingReport analyze_frame_stack(const ScenarioConfig& cfg, const scan::FrameStack& stack,
                                  const RunOptions& options = {});

/// One `frame_<ref|probe>_<index>.pgm` per channel and scan position (index
/// zero-padded to six digits) plus `positions.csv`.
void write_frame_stack(io::ArtifactWriter& writer, const scan::FrameStack& stack);

/// Reads the frames written by write_frame_stack for the scenario's camera and scan.
scan::FrameStack read_frame_stack(const std::filesystem::path& dir, const ScenarioConfig& cfg);

// ---------------------------------------------------------------- sweeps

struct RegionMask {
  std::string name;
  Grid<std::uint8_t> member;
  std::size_t pixels = 0;
};

/// "all" for LED sweeps; "all", "matched" (sinc^2 >= 1/2) and "mismatched"
/// (Delta k L / 2 >= pi) for jam sweeps.
std::vector<RegionMask> sweep_regions(const ScenarioConfig& cfg, SweepKind kind);

struct SweepSample {
  double noise_db = dsp::kNoNoiseDb;
  Channel channel = Channel::Reference;
  std::string region;
  std::uint64_t seed = 0;
  double snr = 0.0;  // mean over the region's pixels
};

struct SweepRow {
  double noise_db = dsp::kNoNoiseDb;
  Channel channel = Channel::Reference;
  std::string region;
  double mean_snr = 0.0;
  double std_snr = 0.0;  // sample standard deviation over seeds
  std::size_t seeds = 0;
};

struct SweepKnee {
  Channel channel = Channel::Reference;
  std::string region;
  double baseline_snr = 0.0;
  std::optional<double> knee_db;   // first level more than 3 dB below baseline
  std::optional<double> floor_db;  // first level with mean SNR <= 1
};

struct SweepResult {
  SweepKind kind = SweepKind::Led;
  std::vector<double> levels_db;   // sorted, starting with the no-noise baseline
  std::vector<SweepRow> rows;      // sorted by (noise_db, channel, region)
  std::vector<SweepKnee> knees;
  std::vector<SweepSample> samples;
  std::vector<io::Artifact> artifacts;
  std::string manifest;

  const SweepRow& row(double noise_db, Channel channel, const std::string& region) const;
  const SweepKnee& knee(Channel channel, const std::string& region) const;
};

/// Spectral SNR of every pixel of one simulated run, using only the window
/// around the configured SNR surface.
struct SnrMap {
  Grid<double> snr;
  Grid<double> visibility;
};

SnrMap measure_snr_map(const ScenarioConfig& cfg, const scan::NoiseSpec& noise, std::uint64_t seed,
                       Channel channel);

/// Throws SchemaError when the scenario has no sweep or an empty level list.
SweepResult run_noise_sweep(const ScenarioConfig& cfg, const RunOptions& options = {});

// ---------------------------------------------------------------- jamming

struct JammingCondition {
  std::string name;  // clean, led, jam_matched, jam_mismatched
  scan::NoiseSpec noise;
  double noise_db = dsp::kNoNoiseDb;
  SnrMap ref;
  SnrMap probe;
};

struct JammingReport {
  std::vector<JammingCondition> conditions;
  // Reference pixels whose SNR drops by more than 3 dB relative to the clean
  // run, among pixels detectable in the clean run (SNR above kDetectableSnr).
  Grid<std::uint8_t> affected_matched;
  Grid<std::uint8_t> affected_mismatched;
  std::vector<io::Artifact> artifacts;
  std::string manifest;

  const JammingCondition& condition(const std::string& name) const;
};

inline constexpr double kDetectableSnr = 3.0;

/// 10 log10 of an SNR ratio; +inf when the second SNR is zero.
double snr_drop_db(double before, double after);

JammingReport run_jamming_experiment(const ScenarioConfig& cfg, const RunOptions& options = {});

}  // namespace quic::experiments
