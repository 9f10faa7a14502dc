#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "quic/grid.hpp"
#include "quic/scan.hpp"

namespace quic::dsp {

using scan::Channel;

enum class Taper { Hann, Rectangular };

/// Sliding-window spectral analysis of an interferogram along scan distance.
struct StftConfig {
  double window_um = 100.0;
  double hop_um = 1.0;
  double band_lo = 2.0;  // um^-1
  double band_hi = 2.4;  // um^-1
  Taper taper = Taper::Hann;
  int zero_pad = 4;      // frequency grid spacing is 1 / (zero_pad * window)

  static StftConfig reference_default() { return {}; }
  static StftConfig probe_default() {
    StftConfig cfg;
    cfg.band_lo = 1.4;
    cfg.band_hi = 1.7;
    return cfg;
  }

  /// Throws DomainError unless 0 < band_lo < band_hi, the window spans at
  /// least 8 fringe periods at band_lo, and hop, window and zero_pad are positive.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

/// One pixel's counts along the scan.
struct Interferogram {
  std::vector<double> positions_mm;
  std::vector<double> counts;
  Channel channel = Channel::Reference;

  double step_mm() const;
  /// Positions strictly increasing with uniform step, counts of equal length.
  void validate() const;
};

struct VisibilityCurve {
  std::vector<double> positions_mm;  // window centers, uniform with hop spacing
  std::vector<double> visibility;    // in [0, 1]
};

struct SurfaceEstimate {
  double position_mm = 0.0;      // visibility-weighted centroid above half max
  double visibility_peak = 0.0;
  double window_lo_mm = 0.0;     // extent of the half-max region
  double window_hi_mm = 0.0;
};

struct PeakConfig {
  int max_surfaces = 2;
  double min_separation_mm = 0.5;
  double threshold = 0.05;

  bool operator==(const PeakConfig&) const = default;
};

/// Distinguished "no noise" level returned by noise_level_db.
inline constexpr double kNoNoiseDb = -std::numeric_limits<double>::infinity();

struct SnrReport {
  double snr = 0.0;                // F_s / F_n
  double noise_db = kNoNoiseDb;
  Pixel pixel;
  Channel channel = Channel::Reference;
  double signal = 0.0;             // F_s
  double baseline = 0.0;           // F_n
  double peak_frequency = 0.0;     // um^-1
  double visibility = 0.0;         // 2 F_s / (window mean * window sum)
};

/// Window-layout details shared by the STFT and the single-window spectrum.
struct WindowGeometry {
  std::size_t window_samples = 0;  // N
  std::size_t fft_size = 0;        // zero_pad * N
  double step_um = 0.0;
  double bin_spacing = 0.0;        // um^-1

  static WindowGeometry make(const StftConfig& cfg, double step_mm);
  double frequency(std::int64_t bin) const noexcept { return static_cast<double>(bin) * bin_spacing; }
};

/// Taper weights; periodic Hann so its spectrum lands on the zero-padded grid.
std::vector<double> taper_weights(Taper taper, std::size_t n);

/// Reusable STFT evaluator for traces with a fixed step and length.
class StftEngine {
 public:
  StftEngine(const StftConfig& cfg, double step_mm, std::size_t trace_length);

  const WindowGeometry& geometry() const noexcept { return geometry_; }
  std::size_t window_count() const noexcept { return starts_.size(); }
  /// First sample of each analysis window.
  const std::vector<std::size_t>& window_starts() const noexcept { return starts_; }
  /// Nominal window centers relative to the trace start.
  std::vector<double> center_offsets_mm() const;

  /// Visibility for every window of `counts` (size must be trace_length).
  /// Throws DomainError when a window has zero mean.
  std::vector<double> visibility(std::span<const double> counts) const;

 private:
  StftConfig cfg_;
  WindowGeometry geometry_;
  std::size_t trace_length_;
  std::vector<std::size_t> starts_;
  std::int64_t bin_lo_ = 0;     // in-band bins [bin_lo_, bin_hi_]
  std::int64_t bin_hi_ = 0;
  std::int64_t side_ = 0;       // Hann side-component offset in bins
  std::vector<double> table_re_;   // cos(2 pi k / M)
  std::vector<double> table_im_;   // -sin(2 pi k / M)
  std::vector<double> taper_re_;   // spectrum of the taper at in-band bins
  std::vector<double> taper_im_;
  double taper_sum_ = 0.0;
  std::size_t ring_capacity_ = 0;
};

Interferogram pixel_trace(const scan::FrameStack& stack, Channel channel, Pixel pixel);

VisibilityCurve stft_visibility(const Interferogram& trace, const StftConfig& cfg);

/// Magnitude spectrum of one detrended, tapered, zero-padded window computed
/// with an FFT. Returned bins cover [0, fft_size/2].
std::vector<double> window_spectrum(std::span<const double> counts, std::size_t start,
                                    const StftConfig& cfg, const WindowGeometry& geometry,
                                    double* window_mean = nullptr);

std::vector<SurfaceEstimate> find_surface_peaks(const VisibilityCurve& curve, const PeakConfig& cfg);

/// FWHM of the highest peak of the curve, with linear interpolation at the
/// half-max crossings. NaN if a crossing is missing.
double curve_fwhm(const VisibilityCurve& curve);

SnrReport spectral_snr(const Interferogram& trace, const StftConfig& cfg, double signal_window_center_mm);

/// 10 log10(p_noise / p_probe); kNoNoiseDb when p_noise == 0.
double noise_level_db(double p_noise, double p_probe);

struct PixelPeaks {
  std::vector<SurfaceEstimate> peaks;
  bool failed = false;
};

PixelPeaks analyze_pixel(const StftEngine& engine, std::span<const double> counts, double start_mm,
                         const PeakConfig& peaks);

struct SurfaceMap {
  double expected_position_mm = 0.0;
  Grid<double> visibility;   // 0 where the surface was not found
  Grid<double> position_mm;  // NaN where the surface was not found
};

struct DepthMaps {
  std::vector<SurfaceMap> surfaces;  // sorted by expected position
  Grid<std::uint8_t> failed;         // 1 where the per-pixel pipeline failed
};

/// Clusters per-pixel peaks into surfaces and fills one map per surface.
DepthMaps assemble_depth_maps(int width, int height, std::span<const PixelPeaks> pixels,
                              const PeakConfig& peaks);

DepthMaps reconstruct_depth_maps(const scan::FrameStack& stack, Channel channel, const StftConfig& cfg,
                                 const PeakConfig& peaks);

}  // namespace quic::dsp
