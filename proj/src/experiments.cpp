#include "quic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "quic/error.hpp"
#include "quic/parallel.hpp"

namespace quic::experiments {
namespace {

constexpr Channel kChannels[] = {Channel::Reference, Channel::Probe};

template <typename Fn>
void as_schema_error(const char* field, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw SchemaError(field, e.what());
  }
}

scan::NoiseSpec resolved_noise(const scan::NoiseSpec& noise, const scene::SceneSpec& scene) {
  scan::NoiseSpec out = noise;
  if (!out.jam_pixel) {
    out.jam_pixel = std::array<double, 2>{static_cast<double>(scene.width / 2),
                                          static_cast<double>(scene.height / 2)};
  }
  return out;
}

Pixel pixel_at(std::size_t p, int width) {
  return {static_cast<int>(p % static_cast<std::size_t>(width)), static_cast<int>(p / static_cast<std::size_t>(width))};
}

std::string channel_str(Channel channel) { return std::string(scan::channel_name(channel)); }

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Grid<std::uint16_t> mask_to_frame(const Grid<std::uint8_t>& mask) {
  Grid<std::uint16_t> out(mask.width(), mask.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = mask.values()[i] ? 65535 : 0;
  return out;
}

/// Locates the analysis window around the SNR surface.
struct SnrWindow {
  std::int64_t first = 0;
  std::size_t samples = 0;
  double center_mm = 0.0;
};

SnrWindow snr_window(const ScenarioConfig& cfg, const scene::Scene& scene, Channel channel) {
  const auto& surfaces = scene.surfaces();
  const double step_mm = cfg.scan.step_nm * 1e-6;
  const auto geometry = dsp::WindowGeometry::make(cfg.dsp_for(channel), step_mm);
  const double depth = surfaces.at(static_cast<std::size_t>(cfg.snr_surface)).depth_mm;
  SnrWindow w;
  w.samples = geometry.window_samples;
  w.first = std::llround((depth - cfg.scan.start_mm) / step_mm - 0.5 * static_cast<double>(w.samples - 1));
  if (w.first < 0 || w.first + static_cast<std::int64_t>(w.samples) > cfg.scan.num_steps) {
    throw DomainError("SNR window around surface " + std::to_string(cfg.snr_surface) + " lies outside the scan");
  }
  w.center_mm = cfg.scan.position_mm(w.first) + 0.5 * static_cast<double>(w.samples - 1) * step_mm;
  return w;
}

SnrMap snr_map(const ScenarioConfig& cfg, const scan::ScanSimulator& sim, Channel channel) {
  const auto& scene = sim.scene();
  const SnrWindow window = snr_window(cfg, scene, channel);
  const auto& dsp_cfg = cfg.dsp_for(channel);
  SnrMap out{Grid<double>(scene.width(), scene.height()), Grid<double>(scene.width(), scene.height())};

  std::vector<double> positions(window.samples);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = cfg.scan.position_mm(window.first + static_cast<std::int64_t>(i));
  }
  parallel_for(scene.pixel_count(), [&](std::size_t p) {
    const Pixel pixel = pixel_at(p, scene.width());
    std::vector<std::uint16_t> counts(window.samples);
    sim.counts_trace(channel, pixel, counts, window.first);
    dsp::Interferogram trace;
    trace.positions_mm = positions;
    trace.counts.assign(counts.begin(), counts.end());
    trace.channel = channel;
    const auto report = dsp::spectral_snr(trace, dsp_cfg, window.center_mm);
    out.snr.values()[p] = report.snr;
    out.visibility.values()[p] = report.visibility;
  });
  return out;
}

using TraceSource = std::function<void(Channel, Pixel, std::span<std::uint16_t>)>;

ChannelRanging range_channel(const ScenarioConfig& cfg, int width, int height, const TraceSource& source,
                             Channel channel) {
  const std::size_t pixel_count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const auto n = static_cast<std::size_t>(cfg.scan.num_steps);
  const dsp::StftEngine engine(cfg.dsp_for(channel), cfg.scan.step_nm * 1e-6, n);

  std::vector<dsp::PixelPeaks> pixels(pixel_count);
  parallel_for(pixel_count, [&](std::size_t p) {
    std::vector<std::uint16_t> counts(n);
    source(channel, pixel_at(p, width), counts);
    std::vector<double> trace(counts.begin(), counts.end());
    pixels[p] = dsp::analyze_pixel(engine, trace, cfg.scan.start_mm, cfg.peaks);
  });

  ChannelRanging out;
  out.channel = channel;
  out.maps = dsp::assemble_depth_maps(width, height, pixels, cfg.peaks);
  for (const auto& px : pixels) out.failed_pixels += px.failed ? 1 : 0;

  for (std::size_t s = 0; s < out.maps.surfaces.size(); ++s) {
    const auto& map = out.maps.surfaces[s];
    std::vector<double> found;
    for (double z : map.position_mm.values()) {
      if (std::isfinite(z)) found.push_back(z);
    }
    out.surfaces.push_back({s, map.expected_position_mm, mean_of(found), sample_std(found), found.size()});
  }

  std::size_t best = 0;
  double best_sum = -1.0;
  for (std::size_t p = 0; p < pixels.size(); ++p) {
    double sum = 0.0;
    for (const auto& e : pixels[p].peaks) sum += e.visibility_peak;
    if (sum > best_sum) {
      best_sum = sum;
      best = p;
    }
  }
  out.inspected = pixel_at(best, width);
  std::vector<std::uint16_t> counts(n);
  source(channel, out.inspected, counts);
  const std::vector<double> trace(counts.begin(), counts.end());
  try {
    out.inspected_curve.visibility = engine.visibility(trace);
    out.inspected_curve.positions_mm = engine.center_offsets_mm();
    for (double& z : out.inspected_curve.positions_mm) z += cfg.scan.start_mm;
    out.inspected_peaks = dsp::find_surface_peaks(out.inspected_curve, cfg.peaks);
    out.envelope_fwhm_mm = dsp::curve_fwhm(out.inspected_curve);
  } catch (const DomainError&) {
    out.envelope_fwhm_mm = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void write_ranging(io::ArtifactWriter& writer, const ChannelRanging& r) {
  const std::string dir = channel_str(r.channel) + "/";
  {
    std::vector<io::CsvRow> rows;
    for (std::size_t i = 0; i < r.inspected_curve.positions_mm.size(); ++i) {
      rows.push_back({r.inspected_curve.positions_mm[i], r.inspected_curve.visibility[i]});
    }
    const std::vector<std::string> header{"position_mm", "visibility"};
    writer.write_csv(dir + "curve.csv", header, rows);
  }
  {
    std::vector<io::CsvRow> rows;
    for (const auto& s : r.surfaces) {
      rows.push_back({static_cast<std::int64_t>(s.index), s.expected_position_mm, s.mean_position_mm,
                      s.std_position_mm, static_cast<std::int64_t>(s.pixels)});
    }
    const std::vector<std::string> header{"surface", "expected_mm", "mean_mm", "std_mm", "pixels"};
    writer.write_csv(dir + "surfaces.csv", header, rows);
  }
  for (std::size_t s = 0; s < r.maps.surfaces.size(); ++s) {
    const auto& map = r.maps.surfaces[s];
    const std::string stem = dir + "surface_" + std::to_string(s);
    writer.write_pgm(stem + "_visibility.pgm", io::visibility_to_frame(map.visibility));
    std::vector<io::CsvRow> rows;
    for (int y = 0; y < map.position_mm.height(); ++y) {
      for (int x = 0; x < map.position_mm.width(); ++x) {
        rows.push_back({std::int64_t{x}, std::int64_t{y}, map.position_mm(x, y), map.visibility(x, y)});
      }
    }
    const std::vector<std::string> header{"pixel_x", "pixel_y", "position_mm", "visibility"};
    writer.write_csv(stem + "_position.csv", header, rows);
  }
}

std::vector<std::string> snr_header() { return {"channel", "pixel_x", "pixel_y", "noise_db", "snr"}; }

void append_snr_rows(std::vector<io::CsvRow>& rows, Channel channel, double noise_db, const Grid<double>& snr) {
  for (int y = 0; y < snr.height(); ++y) {
    for (int x = 0; x < snr.width(); ++x) {
      rows.push_back({channel_str(channel), std::int64_t{x}, std::int64_t{y}, noise_db, snr(x, y)});
    }
  }
}

std::string optional_db(const std::optional<double>& v) {
  return v ? io::format_number(*v) : std::string("none");
}

}  // namespace

std::string_view sweep_kind_name(SweepKind kind) { return kind == SweepKind::Led ? "led" : "jam"; }

void ScenarioConfig::validate() const {
  as_schema_error("source", [&] { source.validate(); });
  const auto built = scene::build_scene(scene);
  as_schema_error("scan", [&] { scan.validate(source); });
  as_schema_error("noise", [&] { noise.validate(); });
  as_schema_error("crystal", [&] { crystal.validate(); });

  const auto check_dsp = [&](const dsp::StftConfig& d, Channel channel, const char* band_field) {
    if (!(d.band_lo < d.band_hi)) throw SchemaError(band_field, "band_lo must be below band_hi");
    as_schema_error("dsp", [&] { d.validate(); });
    const double lambda = channel == Channel::Reference ? source.lambda_ref_nm : source.lambda_probe_nm;
    const double f = optics::fringe_spatial_frequency(lambda);
    if (!(f >= d.band_lo && f <= d.band_hi)) {
      throw PhysicsError(std::string(band_field) + " [" + io::format_number(d.band_lo) + ", " +
                         io::format_number(d.band_hi) + "] um^-1 does not contain the " +
                         channel_str(channel) + " fringe frequency " + io::format_number(f) + " um^-1");
    }
    const double step_um = scan.step_nm * 1e-3;
    if (!(d.band_hi < 0.5 / step_um)) {
      throw PhysicsError(std::string(band_field) + " exceeds the Nyquist frequency of the " +
                         io::format_number(scan.step_nm) + " nm scan step");
    }
    const auto geometry = dsp::WindowGeometry::make(d, scan.step_nm * 1e-6);
    if (static_cast<std::int64_t>(geometry.window_samples) > scan.num_steps) {
      throw PhysicsError("scan of " + std::to_string(scan.num_steps) + " steps is shorter than one " +
                         std::to_string(geometry.window_samples) + "-sample STFT window");
    }
  };
  check_dsp(ref_dsp, Channel::Reference, "dsp.ref_band");
  check_dsp(probe_dsp, Channel::Probe, "dsp.probe_band");

  if (peaks.max_surfaces < 1) throw SchemaError("peaks.max_surfaces", "must be at least 1");
  if (!(peaks.min_separation_mm > 0.0)) throw SchemaError("peaks.min_separation_mm", "must be positive");
  if (!(peaks.threshold >= 0.0 && peaks.threshold < 1.0)) throw SchemaError("peaks.threshold", "must lie in [0, 1)");
  if (seeds.empty()) throw SchemaError("seeds", "at least one seed is required");
  if (sweep) {
    for (double db : sweep->levels_db) {
      if (!std::isfinite(db)) throw SchemaError("sweep.levels_db", "levels must be finite");
    }
  }
  if (snr_surface < 0 || static_cast<std::size_t>(snr_surface) >= built.surfaces().size()) {
    throw SchemaError("snr_surface", "no surface with index " + std::to_string(snr_surface));
  }
  if (!std::isfinite(jamming.jam_db) || !std::isfinite(jamming.led_db)) {
    throw SchemaError("jamming", "noise levels must be finite");
  }
  if (!(jamming.mismatch_half_phase_rad > 0.0)) {
    throw SchemaError("jamming.mismatch_half_phase_rad", "must be positive");
  }
}

double led_density_for_db(const scan::NoiseSpec& noise, double db) {
  if (!(noise.led_nw_per_density > 0.0)) throw DomainError("led_nw_per_density must be positive");
  return noise.probe_power_nw * std::pow(10.0, db / 10.0) / noise.led_nw_per_density;
}

double jam_power_for_db(const scan::NoiseSpec& noise, double db) {
  return noise.probe_power_nw * std::pow(10.0, db / 10.0) * 1e-3;
}

scan::NoiseSpec noise_at_level(const scan::NoiseSpec& base, SweepKind kind, double db) {
  scan::NoiseSpec out = base;
  const bool off = db == dsp::kNoNoiseDb;
  if (kind == SweepKind::Led) {
    out.led_power_density = off ? 0.0 : led_density_for_db(base, db);
  } else {
    out.jam_power_uw = off ? 0.0 : jam_power_for_db(base, db);
  }
  return out;
}

double jam_half_phase(const scan::NoiseSpec& noise, const optics::PhaseMatchSpec& crystal, Pixel pixel) {
  const double dk = optics::phase_mismatch(scan::jam_angle(noise, pixel), crystal);
  return 0.5 * std::abs(dk) * crystal.crystal_length_mm * 1e3;
}

double detuning_for_half_phase(const optics::PhaseMatchSpec& crystal, double half_phase) {
  if (!(crystal.dk_per_radian != 0.0)) throw DomainError("dk_per_radian must be non-zero");
  return 2.0 * half_phase / (std::abs(crystal.dk_per_radian) * crystal.crystal_length_mm * 1e3);
}

ScenarioConfig paper_ranging_scenario() {
  ScenarioConfig cfg;
  cfg.scene = scene::two_plate_scene(64, 64, 1.0, 2.0);
  cfg.scan.num_steps = scan::ScanConfig::steps_for_length(3.5, cfg.scan.step_nm);
  return cfg;
}

namespace {
ScenarioConfig sweep_base(SweepKind kind) {
  ScenarioConfig cfg;
  cfg.scene = scene::uniform_scene(16, 16, 0.4, 1.0);
  cfg.scan.num_steps = scan::ScanConfig::steps_for_length(0.8, cfg.scan.step_nm);
  cfg.peaks.max_surfaces = 1;
  SweepSpec sweep;
  sweep.kind = kind;
  for (int db = 0; db <= 45; db += 5) sweep.levels_db.push_back(db);
  cfg.sweep = sweep;
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 50; ++s) cfg.seeds.push_back(s);
  return cfg;
}
}  // namespace

ScenarioConfig led_sweep_scenario() { return sweep_base(SweepKind::Led); }

ScenarioConfig jam_sweep_scenario() { return sweep_base(SweepKind::Jam); }

ScenarioConfig jamming_scenario() {
  ScenarioConfig cfg;
  cfg.scene = scene::two_plate_scene(32, 32, 0.4, 2.0);
  cfg.scan.num_steps = scan::ScanConfig::steps_for_length(0.8, cfg.scan.step_nm);
  cfg.peaks.max_surfaces = 1;
  // Phase-matched direction on the plate, clear of the cross.
  cfg.noise.jam_pixel = std::array<double, 2>{8.0, 8.0};
  return cfg;
}

namespace {

RangingReport ranging_report(const ScenarioConfig& cfg, int width, int height, const TraceSource& source,
                             const RunOptions& options) {
  RangingReport report;
  report.ref = range_channel(cfg, width, height, source, Channel::Reference);
  if (options.probe) report.probe = range_channel(cfg, width, height, source, Channel::Probe);

  if (!options.out_dir.empty()) {
    io::ArtifactWriter writer(options.out_dir);
    write_ranging(writer, report.ref);
    if (report.probe) write_ranging(writer, *report.probe);
    std::vector<io::CsvRow> rows;
    for (const ChannelRanging* r : {&report.ref, report.probe ? &*report.probe : nullptr}) {
      if (!r) continue;
      rows.push_back({channel_str(r->channel), static_cast<std::int64_t>(r->surfaces.size()),
                      std::int64_t{r->inspected.x}, std::int64_t{r->inspected.y}, r->envelope_fwhm_mm,
                      static_cast<std::int64_t>(r->failed_pixels)});
    }
    const std::vector<std::string> header{"channel",   "surfaces_found",   "inspected_x",
                                          "inspected_y", "envelope_fwhm_mm", "failed_pixels"};
    writer.write_csv("summary.csv", header, rows);
    report.manifest = writer.write_manifest(cfg.seeds);
    report.artifacts = writer.artifacts();
  }
  return report;
}

std::string frame_name(Channel channel, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "frame_" + channel_str(channel) + "_" + digits + ".pgm";
}

}  // namespace

RangingReport run_ranging_experiment(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto scene = scene::build_scene(cfg.scene);
  const scan::ScanSimulator sim(scene, cfg.source, cfg.scan, resolved_noise(cfg.noise, cfg.scene), cfg.crystal,
                                cfg.seeds.front());
  const TraceSource source = [&](Channel channel, Pixel pixel, std::span<std::uint16_t> out) {
    sim.counts_trace(channel, pixel, out);
  };
  return ranging_report(cfg, scene.width(), scene.height(), source, options);
}

RangingReport analyze_frame_stack(const ScenarioConfig& cfg, const scan::FrameStack& stack,
                                  const RunOptions& options) {
  cfg.validate();
  if (static_cast<std::int64_t>(stack.num_steps()) != cfg.scan.num_steps) {
    throw DomainError("frame stack has " + std::to_string(stack.num_steps()) + " positions, scenario expects " +
                      std::to_string(cfg.scan.num_steps));
  }
  const TraceSource source = [&](Channel channel, Pixel pixel, std::span<std::uint16_t> out) {
    const auto trace = stack.trace(channel, pixel);
    std::copy(trace.begin(), trace.end(), out.begin());
  };
  return ranging_report(cfg, stack.width, stack.height, source, options);
}

void write_frame_stack(io::ArtifactWriter& writer, const scan::FrameStack& stack) {
  for (std::size_t i = 0; i < stack.num_steps(); ++i) {
    for (Channel channel : kChannels) writer.write_pgm(frame_name(channel, i), stack.frame(channel, i));
  }
  std::vector<io::CsvRow> rows;
  for (std::size_t i = 0; i < stack.num_steps(); ++i) {
    rows.push_back({static_cast<std::int64_t>(i), stack.positions_mm[i]});
  }
  const std::vector<std::string> header{"index", "position_mm"};
  writer.write_csv("positions.csv", header, rows);
}

scan::FrameStack read_frame_stack(const std::filesystem::path& dir, const ScenarioConfig& cfg) {
  cfg.validate();
  scan::FrameStack stack;
  stack.width = cfg.scene.width;
  stack.height = cfg.scene.height;
  stack.source = cfg.source;
  stack.scan = cfg.scan;
  stack.noise = resolved_noise(cfg.noise, cfg.scene);
  stack.seed = cfg.seeds.front();
  const auto n = static_cast<std::size_t>(cfg.scan.num_steps);
  for (std::size_t i = 0; i < n; ++i) stack.positions_mm.push_back(cfg.scan.position_mm(static_cast<std::int64_t>(i)));
  const std::size_t pixels = static_cast<std::size_t>(stack.width) * static_cast<std::size_t>(stack.height);
  stack.ref_counts.resize(pixels * n);
  stack.probe_counts.resize(pixels * n);
  for (Channel channel : kChannels) {
    auto& counts = channel == Channel::Reference ? stack.ref_counts : stack.probe_counts;
    for (std::size_t i = 0; i < n; ++i) {
      const auto path = dir / frame_name(channel, i);
      Grid<std::uint16_t> frame;
      try {
        frame = io::decode_pgm(io::read_file(path));
      } catch (const DomainError& e) {
        throw IoError(path.string(), e.what());
      }
      if (frame.width() != stack.width || frame.height() != stack.height) {
        throw IoError(path.string(), "frame size does not match the scenario camera");
      }
      for (std::size_t p = 0; p < pixels; ++p) counts[p * n + i] = frame.values()[p];
    }
  }
  return stack;
}

std::vector<RegionMask> sweep_regions(const ScenarioConfig& cfg, SweepKind kind) {
  const int w = cfg.scene.width;
  const int h = cfg.scene.height;
  std::vector<RegionMask> regions;
  regions.push_back({"all", Grid<std::uint8_t>(w, h, 1), static_cast<std::size_t>(w) * static_cast<std::size_t>(h)});
  if (kind == SweepKind::Jam) {
    const auto noise = resolved_noise(cfg.noise, cfg.scene);
    RegionMask matched{"matched", Grid<std::uint8_t>(w, h, 0), 0};
    RegionMask mismatched{"mismatched", Grid<std::uint8_t>(w, h, 0), 0};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double half = jam_half_phase(noise, cfg.crystal, {x, y});
        const double s = optics::sinc(half);
        if (s * s >= 0.5) {
          matched.member(x, y) = 1;
          ++matched.pixels;
        }
        if (half >= optics::kPi) {
          mismatched.member(x, y) = 1;
          ++mismatched.pixels;
        }
      }
    }
    regions.push_back(std::move(matched));
    regions.push_back(std::move(mismatched));
  }
  return regions;
}

SnrMap measure_snr_map(const ScenarioConfig& cfg, const scan::NoiseSpec& noise, std::uint64_t seed,
                       Channel channel) {
  const auto scene = scene::build_scene(cfg.scene);
  const scan::ScanSimulator sim(scene, cfg.source, cfg.scan, resolved_noise(noise, cfg.scene), cfg.crystal, seed);
  return snr_map(cfg, sim, channel);
}

const SweepRow& SweepResult::row(double noise_db, Channel channel, const std::string& region) const {
  for (const auto& r : rows) {
    if (r.noise_db == noise_db && r.channel == channel && r.region == region) return r;
  }
  throw DomainError("no sweep row for level " + io::format_number(noise_db) + ", " + channel_str(channel) +
                    ", " + region);
}

const SweepKnee& SweepResult::knee(Channel channel, const std::string& region) const {
  for (const auto& k : knees) {
    if (k.channel == channel && k.region == region) return k;
  }
  throw DomainError("no sweep knee for " + channel_str(channel) + ", " + region);
}

SweepResult run_noise_sweep(const ScenarioConfig& cfg, const RunOptions& options) {
  if (!cfg.sweep) throw SchemaError("sweep", "scenario has no sweep");
  if (cfg.sweep->levels_db.empty()) throw SchemaError("sweep.levels_db", "sweep list is empty");
  cfg.validate();

  SweepResult result;
  result.kind = cfg.sweep->kind;
  result.levels_db = cfg.sweep->levels_db;
  std::sort(result.levels_db.begin(), result.levels_db.end());
  result.levels_db.erase(std::unique(result.levels_db.begin(), result.levels_db.end()), result.levels_db.end());
  result.levels_db.insert(result.levels_db.begin(), dsp::kNoNoiseDb);

  const auto scene = scene::build_scene(cfg.scene);
  const auto regions = sweep_regions(cfg, result.kind);
  const auto base_noise = resolved_noise(cfg.noise, cfg.scene);
  const std::size_t levels = result.levels_db.size();
  const std::size_t seeds = cfg.seeds.size();

  // maps[(level * seeds + seed) * 2 + channel]
  std::vector<Grid<double>> maps(levels * seeds * 2);
  for (std::size_t l = 0; l < levels; ++l) {
    const auto noise = noise_at_level(base_noise, result.kind, result.levels_db[l]);
    for (std::size_t s = 0; s < seeds; ++s) {
      const scan::ScanSimulator sim(scene, cfg.source, cfg.scan, noise, cfg.crystal, cfg.seeds[s]);
      for (std::size_t c = 0; c < 2; ++c) {
        maps[(l * seeds + s) * 2 + c] = snr_map(cfg, sim, kChannels[c]).snr;
      }
    }
  }

  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t c = 0; c < 2; ++c) {
      for (const auto& region : regions) {
        std::vector<double> per_seed;
        for (std::size_t s = 0; s < seeds; ++s) {
          const auto& map = maps[(l * seeds + s) * 2 + c];
          double sum = 0.0;
          for (std::size_t p = 0; p < map.size(); ++p) {
            if (region.member.values()[p]) sum += map.values()[p];
          }
          const double value = region.pixels ? sum / static_cast<double>(region.pixels) : 0.0;
          per_seed.push_back(value);
          result.samples.push_back({result.levels_db[l], kChannels[c], region.name, cfg.seeds[s], value});
        }
        result.rows.push_back(
            {result.levels_db[l], kChannels[c], region.name, mean_of(per_seed), sample_std(per_seed), seeds});
      }
    }
  }

  for (std::size_t c = 0; c < 2; ++c) {
    for (const auto& region : regions) {
      SweepKnee knee;
      knee.channel = kChannels[c];
      knee.region = region.name;
      knee.baseline_snr = result.row(dsp::kNoNoiseDb, kChannels[c], region.name).mean_snr;
      for (std::size_t l = 1; l < levels; ++l) {
        const double mean = result.row(result.levels_db[l], kChannels[c], region.name).mean_snr;
        if (!knee.knee_db && snr_drop_db(knee.baseline_snr, mean) > 3.0) knee.knee_db = result.levels_db[l];
        if (!knee.floor_db && mean <= 1.0) knee.floor_db = result.levels_db[l];
      }
      result.knees.push_back(std::move(knee));
    }
  }

  if (!options.out_dir.empty()) {
    io::ArtifactWriter writer(options.out_dir);
    {
      std::vector<io::CsvRow> rows;
      for (const auto& r : result.rows) {
        rows.push_back({r.noise_db, channel_str(r.channel), r.region, r.mean_snr, r.std_snr,
                        static_cast<std::int64_t>(r.seeds)});
      }
      const std::vector<std::string> header{"noise_db", "channel", "region", "mean_snr", "std_snr", "seeds"};
      writer.write_csv("sweep.csv", header, rows);
    }
    {
      std::vector<io::CsvRow> rows;
      for (const auto& k : result.knees) {
        rows.push_back({channel_str(k.channel), k.region, k.baseline_snr, optional_db(k.knee_db),
                        optional_db(k.floor_db)});
      }
      const std::vector<std::string> header{"channel", "region", "baseline_snr", "knee_db", "floor_db"};
      writer.write_csv("knees.csv", header, rows);
    }
    {
      std::vector<io::CsvRow> rows;
      for (const auto& s : result.samples) {
        rows.push_back({s.noise_db, channel_str(s.channel), s.region, static_cast<std::int64_t>(s.seed), s.snr});
      }
      const std::vector<std::string> header{"noise_db", "channel", "region", "seed", "snr"};
      writer.write_csv("samples.csv", header, rows);
    }
    {
      std::vector<io::CsvRow> rows;
      for (std::size_t l = 0; l < levels; ++l) {
        for (std::size_t c = 0; c < 2; ++c) {
          append_snr_rows(rows, kChannels[c], result.levels_db[l], maps[(l * seeds) * 2 + c]);
        }
      }
      writer.write_csv("snr_pixels.csv", snr_header(), rows);
    }
    result.manifest = writer.write_manifest(cfg.seeds);
    result.artifacts = writer.artifacts();
  }
  return result;
}

double snr_drop_db(double before, double after) {
  if (!(before > 0.0)) return 0.0;
  if (!(after > 0.0)) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(before / after);
}

const JammingCondition& JammingReport::condition(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return c;
  }
  throw DomainError("no jamming condition named " + name);
}

JammingReport run_jamming_experiment(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto scene = scene::build_scene(cfg.scene);
  const auto clean =
      noise_at_level(noise_at_level(resolved_noise(cfg.noise, cfg.scene), SweepKind::Led, dsp::kNoNoiseDb),
                     SweepKind::Jam, dsp::kNoNoiseDb);
  auto matched = noise_at_level(clean, SweepKind::Jam, cfg.jamming.jam_db);
  auto mismatched = matched;
  mismatched.jam_detuning_rad = detuning_for_half_phase(cfg.crystal, cfg.jamming.mismatch_half_phase_rad);

  JammingReport report;
  report.conditions.push_back({"clean", clean, dsp::kNoNoiseDb, {}, {}});
  report.conditions.push_back(
      {"led", noise_at_level(clean, SweepKind::Led, cfg.jamming.led_db), cfg.jamming.led_db, {}, {}});
  report.conditions.push_back({"jam_matched", matched, cfg.jamming.jam_db, {}, {}});
  report.conditions.push_back({"jam_mismatched", mismatched, cfg.jamming.jam_db, {}, {}});

  const std::uint64_t seed = cfg.seeds.front();
  for (auto& condition : report.conditions) {
    const scan::ScanSimulator sim(scene, cfg.source, cfg.scan, condition.noise, cfg.crystal, seed);
    condition.ref = snr_map(cfg, sim, Channel::Reference);
    condition.probe = snr_map(cfg, sim, Channel::Probe);
  }

  const auto& clean_snr = report.conditions[0].ref.snr;
  auto affected = [&](const Grid<double>& jammed) {
    Grid<std::uint8_t> mask(jammed.width(), jammed.height(), 0);
    for (std::size_t p = 0; p < mask.size(); ++p) {
      const double before = clean_snr.values()[p];
      mask.values()[p] = before > kDetectableSnr && snr_drop_db(before, jammed.values()[p]) > 3.0 ? 1 : 0;
    }
    return mask;
  };
  report.affected_matched = affected(report.conditions[2].ref.snr);
  report.affected_mismatched = affected(report.conditions[3].ref.snr);

  if (!options.out_dir.empty()) {
    io::ArtifactWriter writer(options.out_dir);
    for (const auto& c : report.conditions) {
      writer.write_pgm("visibility_" + c.name + "_ref.pgm", io::visibility_to_frame(c.ref.visibility));
      writer.write_pgm("visibility_" + c.name + "_probe.pgm", io::visibility_to_frame(c.probe.visibility));
      std::vector<io::CsvRow> rows;
      append_snr_rows(rows, Channel::Reference, c.noise_db, c.ref.snr);
      append_snr_rows(rows, Channel::Probe, c.noise_db, c.probe.snr);
      writer.write_csv("snr_" + c.name + ".csv", snr_header(), rows);
    }
    writer.write_pgm("affected_jam_matched.pgm", mask_to_frame(report.affected_matched));
    writer.write_pgm("affected_jam_mismatched.pgm", mask_to_frame(report.affected_mismatched));
    report.manifest = writer.write_manifest(cfg.seeds);
    report.artifacts = writer.artifacts();
  }
  return report;
}

}  // namespace quic::experiments
