#include "quic/scan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quic/error.hpp"
#include "quic/parallel.hpp"

namespace quic::scan {
namespace {

double fringe_phase(double scan_z_mm, double depth_mm, double lambda_nm) {
  // Mirror displacement dz changes the round trip by 2 dz.
  return 2.0 * (2.0 * optics::kPi / (lambda_nm * 1e-6)) * (scan_z_mm - depth_mm);
}

double fringe_sum(const scene::Scene& scene, const optics::SourceSpec& source, double scan_z_mm,
                  Pixel pixel, double lambda_nm) {
  const auto coherence = optics::CoherenceModel::from_envelope_fwhm(source.envelope_fwhm_mm);
  const double weight = 1.0 / static_cast<double>(scene.surfaces().size());
  const double lateral = scene.lateral_factor(pixel.x, pixel.y);
  double total = 0.0;
  for (const auto& surface : scene.surfaces()) {
    const double gamma =
        optics::coherence_gamma(optics::path_delay_to_tau(scan_z_mm - surface.depth_mm), coherence);
    const optics::PhaseState phases{surface.phase(pixel.x, pixel.y),
                                    fringe_phase(scan_z_mm, surface.depth_mm, lambda_nm), 0.0};
    total += weight * optics::reference_intensity(
                          source, gamma, surface.reflectivity(pixel.x, pixel.y) * lateral, phases);
  }
  return total;
}

void require_pixel(const scene::Scene& scene, Pixel pixel) {
  if (pixel.x < 0 || pixel.y < 0 || pixel.x >= scene.width() || pixel.y >= scene.height()) {
    throw DomainError("pixel (" + std::to_string(pixel.x) + ", " + std::to_string(pixel.y) +
                      ") outside the camera");
  }
}

}  // namespace

std::string_view channel_name(Channel channel) {
  return channel == Channel::Reference ? "ref" : "probe";
}

std::int64_t ScanConfig::steps_for_length(double length_mm, double step_nm) {
  if (!(length_mm > 0.0) || !(step_nm > 0.0)) throw DomainError("scan length and step must be positive");
  return static_cast<std::int64_t>(std::ceil(length_mm * 1e6 / step_nm - 1e-9));
}

void ScanConfig::validate(const optics::SourceSpec& source) const {
  if (!(step_nm > 0.0)) throw DomainError("scan step must be positive");
  if (num_steps < 2) throw DomainError("scan needs at least two steps");
  if (!(exposure_ms > 0.0)) throw DomainError("exposure must be positive");
  if (!(counts_per_intensity > 0.0)) throw DomainError("counts_per_intensity must be positive");
  if (!std::isfinite(start_mm)) throw DomainError("scan start must be finite");
  const double nyquist_nm = source.lambda_ref_nm / 4.0;
  if (!(step_nm < nyquist_nm)) {
    throw PhysicsError("scan step " + std::to_string(step_nm) +
                       " nm undersamples the reference fringe (must be < lambda_ref/4 = " +
                       std::to_string(nyquist_nm) + " nm)");
  }
}

void NoiseSpec::validate() const {
  if (!(led_power_density >= 0.0)) throw DomainError("led_power_density must be non-negative");
  if (!(jam_power_uw >= 0.0)) throw DomainError("jam_power_uw must be non-negative");
  if (!(jam_detuning_rad >= 0.0)) throw DomainError("jam_detuning_rad must be non-negative");
  if (!(jam_angle_per_pixel_rad >= 0.0)) throw DomainError("jam_angle_per_pixel_rad must be non-negative");
  if (!(dark_counts_per_ms >= 0.0)) throw DomainError("dark_counts_per_ms must be non-negative");
  if (full_well <= 0 || full_well > 65535) throw DomainError("full_well must lie in [1, 65535]");
  if (!(probe_power_nw > 0.0)) throw DomainError("probe_power_nw must be positive");
  if (!(led_nw_per_density >= 0.0)) throw DomainError("led_nw_per_density must be non-negative");
}

std::span<const std::uint16_t> FrameStack::trace(Channel channel, Pixel pixel) const {
  if (pixel.x < 0 || pixel.y < 0 || pixel.x >= width || pixel.y >= height) {
    throw DomainError("pixel outside the frame stack");
  }
  const auto& counts = channel == Channel::Reference ? ref_counts : probe_counts;
  const std::size_t n = num_steps();
  const std::size_t p = static_cast<std::size_t>(pixel.y) * static_cast<std::size_t>(width) +
                        static_cast<std::size_t>(pixel.x);
  return std::span<const std::uint16_t>(counts).subspan(p * n, n);
}

Grid<std::uint16_t> FrameStack::frame(Channel channel, std::size_t scan_index) const {
  if (scan_index >= num_steps()) throw DomainError("scan index out of range");
  Grid<std::uint16_t> out(width, height);
  const auto& counts = channel == Channel::Reference ? ref_counts : probe_counts;
  const std::size_t n = num_steps();
  for (std::size_t p = 0; p < out.size(); ++p) out.values()[p] = counts[p * n + scan_index];
  return out;
}

double expected_reference_frame(const scene::Scene& scene, const optics::SourceSpec& source,
                                double scan_z_mm, Pixel pixel) {
  require_pixel(scene, pixel);
  return fringe_sum(scene, source, scan_z_mm, pixel, source.lambda_ref_nm);
}

double led_intensity(const optics::SourceSpec& source, const NoiseSpec& noise) {
  return source.eta * source.eta * noise.led_power_nw() / noise.probe_power_nw;
}

double direct_jam_intensity(const optics::SourceSpec& source, const NoiseSpec& noise) {
  if (!noise.jam_probe) return 0.0;
  return source.eta * source.eta * noise.jam_power_nw() / noise.probe_power_nw;
}

double expected_probe_frame(const scene::Scene& scene, const optics::SourceSpec& source,
                            double scan_z_mm, Pixel pixel, const NoiseSpec& noise) {
  require_pixel(scene, pixel);
  return fringe_sum(scene, source, scan_z_mm, pixel, source.lambda_probe_nm) +
         led_intensity(source, noise) + direct_jam_intensity(source, noise);
}

double jam_angle(const NoiseSpec& noise, Pixel pixel) {
  if (!noise.jam_pixel) throw DomainError("jam_pixel is not set");
  const double dx = pixel.x - (*noise.jam_pixel)[0];
  const double dy = pixel.y - (*noise.jam_pixel)[1];
  const double lateral = noise.jam_angle_per_pixel_rad * std::hypot(dx, dy);
  return std::hypot(lateral, noise.jam_detuning_rad);
}

double jam_reference_noise(const NoiseSpec& noise, Pixel pixel, const optics::PhaseMatchSpec& crystal) {
  if (!noise.jam_reference || noise.jam_power_uw == 0.0) return 0.0;
  const double dk = optics::phase_mismatch(jam_angle(noise, pixel), crystal);
  return optics::stimulated_pdc_gain(dk, crystal, noise.jam_power_uw);
}

std::int64_t apply_shot_noise_and_saturation(double expected, const ScanConfig& cfg,
                                             const NoiseSpec& noise, rng::CellStream& stream) {
  const double mean = (expected * cfg.counts_per_intensity + noise.dark_counts_per_ms) * cfg.exposure_ms;
  std::int64_t count = 0;
  if (cfg.shot_noise) {
    count = rng::poisson(stream, mean);
  } else if (mean > 0.0) {
    count = mean >= static_cast<double>(noise.full_well) ? noise.full_well : std::llround(mean);
  }
  return std::clamp<std::int64_t>(count, 0, noise.full_well);
}

std::uint64_t cell_key(std::uint64_t seed, Channel channel, std::int64_t scan_index,
                       std::size_t pixel_index) {
  return rng::stream_key(seed, channel == Channel::Reference ? 0x7265665fULL : 0x70726f62ULL,
                         static_cast<std::uint64_t>(scan_index), pixel_index);
}

ScanSimulator::ScanSimulator(const scene::Scene& scene, const optics::SourceSpec& source,
                             const ScanConfig& cfg, const NoiseSpec& noise,
                             const optics::PhaseMatchSpec& crystal, std::uint64_t seed)
    : scene_(scene), source_(source), cfg_(cfg), noise_(noise), crystal_(crystal), seed_(seed) {
  source_.validate();
  cfg_.validate(source_);
  noise_.validate();
  crystal_.validate();
  if (!noise_.jam_pixel) {
    noise_.jam_pixel = std::array<double, 2>{static_cast<double>(scene_.width() / 2),
                                             static_cast<double>(scene_.height() / 2)};
  }

  const auto coherence = optics::CoherenceModel::from_envelope_fwhm(source_.envelope_fwhm_mm);
  const auto n = static_cast<std::size_t>(cfg_.num_steps);
  auto build = [&](double lambda_nm) {
    std::vector<FringeTable> out;
    for (const auto& surface : scene_.surfaces()) {
      FringeTable t;
      t.gamma_cos.resize(n);
      t.gamma_sin.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double z = cfg_.position_mm(static_cast<std::int64_t>(i));
        const double gamma =
            optics::coherence_gamma(optics::path_delay_to_tau(z - surface.depth_mm), coherence);
        const double theta = fringe_phase(z, surface.depth_mm, lambda_nm);
        t.gamma_cos[i] = gamma * std::cos(theta);
        t.gamma_sin[i] = gamma * std::sin(theta);
      }
      out.push_back(std::move(t));
    }
    return out;
  };
  ref_tables_ = build(source_.lambda_ref_nm);
  probe_tables_ = build(source_.lambda_probe_nm);
}

std::vector<double> ScanSimulator::positions_mm() const {
  std::vector<double> z(static_cast<std::size_t>(cfg_.num_steps));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = cfg_.position_mm(static_cast<std::int64_t>(i));
  return z;
}

void ScanSimulator::expected_trace(Channel channel, Pixel pixel, std::span<double> out,
                                   std::int64_t first) const {
  require_pixel(scene_, pixel);
  if (first < 0 || first + static_cast<std::int64_t>(out.size()) > cfg_.num_steps) {
    throw DomainError("trace range outside the scan");
  }

  const double eta2 = source_.eta * source_.eta;
  const auto& surfaces = scene_.surfaces();
  const double weight = 1.0 / static_cast<double>(surfaces.size());
  const double lateral = scene_.lateral_factor(pixel.x, pixel.y);

  double background = 0.0;
  if (channel == Channel::Reference) {
    background = jam_reference_noise(noise_, pixel, crystal_);
  } else {
    background = led_intensity(source_, noise_) + direct_jam_intensity(source_, noise_);
  }
  std::fill(out.begin(), out.end(), eta2 + background);

  const auto& fringe = tables(channel);
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const double amplitude = eta2 * weight * surfaces[s].reflectivity(pixel.x, pixel.y) * lateral;
    if (amplitude == 0.0) continue;
    const double phi = surfaces[s].phase(pixel.x, pixel.y);
    const double c = amplitude * std::cos(phi);
    const double sn = amplitude * std::sin(phi);
    const double* gc = fringe[s].gamma_cos.data() + first;
    const double* gs = fringe[s].gamma_sin.data() + first;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * gc[i] - sn * gs[i];
  }
}

void ScanSimulator::counts_trace(Channel channel, Pixel pixel, std::span<std::uint16_t> out,
                                 std::int64_t first) const {
  std::vector<double> expected(out.size());
  expected_trace(channel, pixel, expected, first);
  const std::size_t pixel_index = static_cast<std::size_t>(pixel.y) * static_cast<std::size_t>(scene_.width()) +
                                  static_cast<std::size_t>(pixel.x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    rng::CellStream stream(cell_key(seed_, channel, first + static_cast<std::int64_t>(i), pixel_index));
    out[i] = static_cast<std::uint16_t>(apply_shot_noise_and_saturation(expected[i], cfg_, noise_, stream));
  }
}

std::size_t ScanSimulator::stack_bytes(const scene::Scene& scene, const ScanConfig& cfg) {
  const auto steps = static_cast<std::size_t>(std::max<std::int64_t>(cfg.num_steps, 0));
  return 2 * scene.pixel_count() * steps * sizeof(std::uint16_t) + steps * sizeof(double);
}

FrameStack ScanSimulator::simulate(std::size_t memory_budget) const {
  const std::size_t bytes = stack_bytes(scene_, cfg_);
  if (bytes > memory_budget) {
    throw ResourceError("frame stack needs " + std::to_string(bytes) + " bytes, budget is " +
                        std::to_string(memory_budget) + " bytes");
  }
  FrameStack stack;
  stack.width = scene_.width();
  stack.height = scene_.height();
  stack.positions_mm = positions_mm();
  stack.source = source_;
  stack.scan = cfg_;
  stack.noise = noise_;
  stack.seed = seed_;
  const std::size_t n = stack.positions_mm.size();
  const std::size_t pixels = scene_.pixel_count();
  stack.ref_counts.resize(pixels * n);
  stack.probe_counts.resize(pixels * n);

  parallel_for(pixels, [&](std::size_t p) {
    const Pixel pixel{static_cast<int>(p % static_cast<std::size_t>(stack.width)),
                      static_cast<int>(p / static_cast<std::size_t>(stack.width))};
    counts_trace(Channel::Reference, pixel, std::span<std::uint16_t>(stack.ref_counts).subspan(p * n, n));
    counts_trace(Channel::Probe, pixel, std::span<std::uint16_t>(stack.probe_counts).subspan(p * n, n));
  });
  return stack;
}

FrameStack simulate_scan(const scene::Scene& scene, const optics::SourceSpec& source,
                         const ScanConfig& cfg, const NoiseSpec& noise, std::uint64_t seed,
                         const optics::PhaseMatchSpec& crystal, std::size_t memory_budget) {
  return ScanSimulator(scene, source, cfg, noise, crystal, seed).simulate(memory_budget);
}

}  // namespace quic::scan
