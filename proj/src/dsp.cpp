#include "quic/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "quic/error.hpp"
#include "quic/parallel.hpp"

namespace quic::dsp {
namespace {

constexpr double kTwoPi = 2.0 * optics::kPi;
constexpr std::size_t kResyncInterval = 1024;

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// FFTW plans keyed by transform size. Planning is not thread-safe; execution
// with the new-array interface is.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan r2c(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(n, plan);
    return plan;
  }

  ~FftPlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

// Taper weights are reused across the many windows of a sweep.
std::shared_ptr<const std::vector<double>> cached_taper(Taper taper, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::size_t>, std::shared_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{static_cast<int>(taper), n}];
  if (!slot) slot = std::make_shared<const std::vector<double>>(taper_weights(taper, n));
  return slot;
}

}  // namespace

void StftConfig::validate() const {
  if (!(window_um > 0.0)) throw DomainError("STFT window must be positive");
  if (!(hop_um > 0.0)) throw DomainError("STFT hop must be positive");
  if (!(band_lo > 0.0 && band_lo < band_hi)) {
    throw DomainError("spectral band requires 0 < band_lo < band_hi");
  }
  if (zero_pad < 1) throw DomainError("zero_pad must be at least 1");
  if (window_um * band_lo < 8.0) {
    throw DomainError("STFT window must span at least 8 fringe periods at band_lo");
  }
}

double Interferogram::step_mm() const {
  if (positions_mm.size() < 2) throw DomainError("interferogram needs at least two samples");
  return (positions_mm.back() - positions_mm.front()) / static_cast<double>(positions_mm.size() - 1);
}

void Interferogram::validate() const {
  if (positions_mm.size() != counts.size()) throw DomainError("positions and counts differ in length");
  const double step = step_mm();
  if (!(step > 0.0)) throw DomainError("positions must be strictly increasing");
  for (std::size_t i = 1; i < positions_mm.size(); ++i) {
    const double d = positions_mm[i] - positions_mm[i - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step) {
      throw DomainError("positions must be uniformly spaced and strictly increasing");
    }
  }
}

WindowGeometry WindowGeometry::make(const StftConfig& cfg, double step_mm) {
  cfg.validate();
  if (!(step_mm > 0.0)) throw DomainError("scan step must be positive");
  WindowGeometry g;
  g.step_um = step_mm * 1e3;
  const long long n = std::llround(cfg.window_um / g.step_um);
  if (n < 8) throw DomainError("STFT window holds fewer than 8 samples");
  g.window_samples = static_cast<std::size_t>(n);
  g.fft_size = g.window_samples * static_cast<std::size_t>(cfg.zero_pad);
  g.bin_spacing = 1.0 / (static_cast<double>(g.fft_size) * g.step_um);
  if (!(cfg.band_hi < 0.5 / g.step_um)) {
    throw DomainError("band_hi exceeds the sampling Nyquist frequency");
  }
  return g;
}

std::vector<double> taper_weights(Taper taper, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (taper == Taper::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

StftEngine::StftEngine(const StftConfig& cfg, double step_mm, std::size_t trace_length)
    : cfg_(cfg), geometry_(WindowGeometry::make(cfg, step_mm)), trace_length_(trace_length) {
  const std::size_t n = geometry_.window_samples;
  if (n > trace_length_) throw DomainError("STFT window is longer than the trace");

  for (std::size_t k = 0;; ++k) {
    const auto s = static_cast<std::size_t>(std::llround(static_cast<double>(k) * cfg_.hop_um / geometry_.step_um));
    if (s + n > trace_length_) break;
    starts_.push_back(s);
  }

  const double df = geometry_.bin_spacing;
  bin_lo_ = static_cast<std::int64_t>(std::ceil(cfg_.band_lo / df - 1e-9));
  bin_hi_ = static_cast<std::int64_t>(std::floor(cfg_.band_hi / df + 1e-9));
  if (bin_lo_ > bin_hi_) throw DomainError("spectral band contains no frequency bins");
  side_ = cfg_.taper == Taper::Hann ? cfg_.zero_pad : 0;

  const std::size_t m = geometry_.fft_size;
  table_re_.resize(m);
  table_im_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = kTwoPi * static_cast<double>(k) / static_cast<double>(m);
    table_re_[k] = std::cos(a);
    table_im_[k] = -std::sin(a);
  }

  const auto w = taper_weights(cfg_.taper, n);
  taper_sum_ = std::accumulate(w.begin(), w.end(), 0.0);
  const auto bins = static_cast<std::size_t>(bin_hi_ - bin_lo_ + 1);
  taper_re_.assign(bins, 0.0);
  taper_im_.assign(bins, 0.0);
  const auto mi = static_cast<std::int64_t>(m);
  for (std::size_t b = 0; b < bins; ++b) {
    const std::int64_t j = bin_lo_ + static_cast<std::int64_t>(b);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto idx = static_cast<std::size_t>(positive_mod(j * static_cast<std::int64_t>(t), mi));
      re += w[t] * table_re_[idx];
      im += w[t] * table_im_[idx];
    }
    taper_re_[b] = re;
    taper_im_[b] = im;
  }

  // Largest number of windows open at once (started, not yet finished).
  std::size_t started = 0;
  for (std::size_t k = 0; k < starts_.size(); ++k) {
    while (started < starts_.size() && starts_[started] <= starts_[k] + n) ++started;
    ring_capacity_ = std::max(ring_capacity_, started - k);
  }
  ring_capacity_ = std::max<std::size_t>(ring_capacity_, 1);
}

std::vector<double> StftEngine::center_offsets_mm() const {
  std::vector<double> out(starts_.size());
  const double first = 0.5 * static_cast<double>(geometry_.window_samples - 1) * geometry_.step_um;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (first + static_cast<double>(k) * cfg_.hop_um) * 1e-3;
  }
  return out;
}

std::vector<double> StftEngine::visibility(std::span<const double> counts) const {
  if (counts.size() != trace_length_) throw DomainError("trace length does not match the STFT engine");

  const std::size_t n_win = geometry_.window_samples;
  const auto m = static_cast<std::int64_t>(geometry_.fft_size);
  const std::size_t in_band = static_cast<std::size_t>(bin_hi_ - bin_lo_ + 1);
  const std::size_t nf = in_band + 2 * static_cast<std::size_t>(side_);
  const std::int64_t first_bin = bin_lo_ - side_;

  std::vector<double> ph_re(nf), ph_im(nf), rot_re(nf), rot_im(nf), acc_re(nf, 0.0), acc_im(nf, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto idx = static_cast<std::size_t>(positive_mod(first_bin + static_cast<std::int64_t>(f), m));
    rot_re[f] = table_re_[idx];
    rot_im[f] = table_im_[idx];
  }
  std::vector<double> ring_re(ring_capacity_ * nf), ring_im(ring_capacity_ * nf), ring_dc(ring_capacity_);
  std::vector<double> d_re(nf), d_im(nf);
  std::vector<double> out(starts_.size(), 0.0);

  double dc = 0.0;
  const std::size_t windows = starts_.size();
  std::size_t next_start = 0;
  std::size_t next_end = 0;

  auto finish_window = [&](std::size_t k) {
    const std::size_t slot = k % ring_capacity_;
    const double mean = (dc - ring_dc[slot]) / static_cast<double>(n_win);
    if (!(mean > 0.0)) throw DomainError("STFT window has zero mean");
    const auto s = static_cast<std::int64_t>(starts_[k]);
    const double* rr = ring_re.data() + slot * nf;
    const double* ri = ring_im.data() + slot * nf;
    for (std::size_t f = 0; f < nf; ++f) {
      const double a = acc_re[f] - rr[f];
      const double b = acc_im[f] - ri[f];
      const auto idx = static_cast<std::size_t>(positive_mod((first_bin + static_cast<std::int64_t>(f)) * s, m));
      // multiply by exp(+2 pi i j s / M) = conj(table)
      const double c = table_re_[idx];
      const double sn = -table_im_[idx];
      d_re[f] = a * c - b * sn;
      d_im[f] = a * sn + b * c;
    }
    double best = 0.0;
    const auto side = static_cast<std::size_t>(side_);
    for (std::size_t b = 0; b < in_band; ++b) {
      double xr;
      double xi;
      if (cfg_.taper == Taper::Hann) {
        xr = 0.5 * d_re[b + side] - 0.25 * (d_re[b] + d_re[b + 2 * side]);
        xi = 0.5 * d_im[b + side] - 0.25 * (d_im[b] + d_im[b + 2 * side]);
      } else {
        xr = d_re[b];
        xi = d_im[b];
      }
      xr -= mean * taper_re_[b];
      xi -= mean * taper_im_[b];
      best = std::max(best, xr * xr + xi * xi);
    }
    out[k] = std::clamp(2.0 * std::sqrt(best) / (mean * taper_sum_), 0.0, 1.0);
  };

  for (std::size_t i = 0; i <= trace_length_; ++i) {
    while (next_start < windows && starts_[next_start] == i) {
      const std::size_t slot = next_start % ring_capacity_;
      std::copy(acc_re.begin(), acc_re.end(), ring_re.begin() + static_cast<std::ptrdiff_t>(slot * nf));
      std::copy(acc_im.begin(), acc_im.end(), ring_im.begin() + static_cast<std::ptrdiff_t>(slot * nf));
      ring_dc[slot] = dc;
      ++next_start;
    }
    while (next_end < windows && starts_[next_end] + n_win == i) {
      finish_window(next_end);
      ++next_end;
    }
    if (i == trace_length_ || next_end == windows) break;

    if (i % kResyncInterval == 0) {
      const auto ii = static_cast<std::int64_t>(i);
      for (std::size_t f = 0; f < nf; ++f) {
        const auto idx = static_cast<std::size_t>(positive_mod((first_bin + static_cast<std::int64_t>(f)) * ii, m));
        ph_re[f] = table_re_[idx];
        ph_im[f] = table_im_[idx];
      }
    }

    const double x = counts[i];
    dc += x;
    double* __restrict pr = ph_re.data();
    double* __restrict pi = ph_im.data();
    double* __restrict ar = acc_re.data();
    double* __restrict ai = acc_im.data();
    const double* __restrict qr = rot_re.data();
    const double* __restrict qi = rot_im.data();
    for (std::size_t f = 0; f < nf; ++f) {
      ar[f] += x * pr[f];
      ai[f] += x * pi[f];
      const double nr = pr[f] * qr[f] - pi[f] * qi[f];
      const double ni = pr[f] * qi[f] + pi[f] * qr[f];
      pr[f] = nr;
      pi[f] = ni;
    }
  }
  return out;
}

Interferogram pixel_trace(const scan::FrameStack& stack, Channel channel, Pixel pixel) {
  const auto counts = stack.trace(channel, pixel);
  Interferogram trace;
  trace.positions_mm = stack.positions_mm;
  trace.counts.assign(counts.begin(), counts.end());
  trace.channel = channel;
  return trace;
}

VisibilityCurve stft_visibility(const Interferogram& trace, const StftConfig& cfg) {
  trace.validate();
  const StftEngine engine(cfg, trace.step_mm(), trace.counts.size());
  VisibilityCurve curve;
  curve.visibility = engine.visibility(trace.counts);
  curve.positions_mm = engine.center_offsets_mm();
  for (double& z : curve.positions_mm) z += trace.positions_mm.front();
  return curve;
}

std::vector<double> window_spectrum(std::span<const double> counts, std::size_t start, const StftConfig& cfg,
                                    const WindowGeometry& geometry, double* window_mean) {
  const std::size_t n = geometry.window_samples;
  const std::size_t m = geometry.fft_size;
  if (start + n > counts.size()) throw DomainError("spectrum window extends past the trace");

  const auto seg = counts.subspan(start, n);
  const double mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(n);
  if (window_mean) *window_mean = mean;

  const auto taper = cached_taper(cfg.taper, n);
  const auto& w = *taper;
  std::vector<double> in(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) in[i] = w[i] * (seg[i] - mean);
  std::vector<fftw_complex> out(m / 2 + 1);
  fftw_execute_dft_r2c(FftPlanCache::instance().r2c(m), in.data(), out.data());

  std::vector<double> mags(out.size());
  for (std::size_t j = 0; j < out.size(); ++j) mags[j] = std::sqrt(out[j][0] * out[j][0] + out[j][1] * out[j][1]);
  return mags;
}

std::vector<SurfaceEstimate> find_surface_peaks(const VisibilityCurve& curve, const PeakConfig& cfg) {
  if (cfg.max_surfaces < 1) throw DomainError("max_surfaces must be at least 1");
  const auto& v = curve.visibility;
  const auto& z = curve.positions_mm;
  const std::size_t n = v.size();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v[i] > cfg.threshold)) continue;
    const bool left_ok = i == 0 || v[i] >= v[i - 1];
    const bool right_ok = i + 1 == n || v[i] > v[i + 1];
    if (left_ok && right_ok) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });

  std::vector<std::size_t> accepted;
  for (std::size_t c : candidates) {
    if (static_cast<int>(accepted.size()) >= cfg.max_surfaces) break;
    const bool separated = std::all_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return std::abs(z[a] - z[c]) >= cfg.min_separation_mm;
    });
    if (separated) accepted.push_back(c);
  }

  std::vector<SurfaceEstimate> out;
  for (std::size_t p : accepted) {
    const double half = 0.5 * v[p];
    std::size_t lo = p;
    while (lo > 0 && v[lo - 1] >= half) --lo;
    std::size_t hi = p;
    while (hi + 1 < n && v[hi + 1] >= half) ++hi;
    double weight = 0.0;
    double moment = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      weight += v[i];
      moment += v[i] * z[i];
    }
    out.push_back({moment / weight, v[p], z[lo], z[hi]});
  }
  std::sort(out.begin(), out.end(),
            [](const SurfaceEstimate& a, const SurfaceEstimate& b) { return a.position_mm < b.position_mm; });
  return out;
}

double curve_fwhm(const VisibilityCurve& curve) {
  const auto& v = curve.visibility;
  const auto& z = curve.positions_mm;
  if (v.empty()) return std::nan("");
  const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double half = 0.5 * v[peak];
  if (!(half > 0.0)) return std::nan("");

  std::size_t lo = peak;
  while (lo > 0 && v[lo - 1] >= half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < v.size() && v[hi + 1] >= half) ++hi;
  if (lo == 0 || hi + 1 == v.size()) return std::nan("");

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (v[inside] - half) / (v[inside] - v[outside]);
    return z[inside] + t * (z[outside] - z[inside]);
  };
  return crossing(hi, hi + 1) - crossing(lo, lo - 1);
}

SnrReport spectral_snr(const Interferogram& trace, const StftConfig& cfg, double signal_window_center_mm) {
  trace.validate();
  const auto geometry = WindowGeometry::make(cfg, trace.step_mm());
  const std::size_t n = geometry.window_samples;
  if (n > trace.counts.size()) throw DomainError("STFT window is longer than the trace");
  const double offset = (signal_window_center_mm - trace.positions_mm.front()) / trace.step_mm() -
                        0.5 * static_cast<double>(n - 1);
  const long long start = std::llround(offset);
  if (start < 0 || static_cast<std::size_t>(start) + n > trace.counts.size()) {
    throw DomainError("signal window lies outside the scan");
  }

  double mean = 0.0;
  const auto mags = window_spectrum(trace.counts, static_cast<std::size_t>(start), cfg, geometry, &mean);
  const double df = geometry.bin_spacing;
  const auto top = static_cast<std::int64_t>(mags.size()) - 1;
  const auto lo = static_cast<std::int64_t>(std::ceil(cfg.band_lo / df - 1e-9));
  const auto hi = std::min(top, static_cast<std::int64_t>(std::floor(cfg.band_hi / df + 1e-9)));
  const auto ext_lo = static_cast<std::int64_t>(std::ceil(0.5 * cfg.band_lo / df - 1e-9));
  const auto ext_hi = std::min(top, static_cast<std::int64_t>(std::floor(2.0 * cfg.band_hi / df + 1e-9)));

  SnrReport report;
  report.channel = trace.channel;
  std::int64_t peak = lo;
  for (std::int64_t j = lo; j <= hi; ++j) {
    if (mags[static_cast<std::size_t>(j)] > mags[static_cast<std::size_t>(peak)]) peak = j;
  }
  report.signal = mags[static_cast<std::size_t>(peak)];
  report.peak_frequency = geometry.frequency(peak);

  std::vector<double> baseline;
  for (std::int64_t j = ext_lo; j <= ext_hi; ++j) {
    if (std::abs(j - peak) <= 3) continue;
    baseline.push_back(mags[static_cast<std::size_t>(j)]);
  }
  report.baseline = median_of(std::move(baseline));

  if (report.signal == 0.0) {
    report.snr = 0.0;
  } else if (report.baseline == 0.0) {
    report.snr = std::numeric_limits<double>::infinity();
  } else {
    report.snr = report.signal / report.baseline;
  }
  const auto taper = cached_taper(cfg.taper, n);
  const double wsum = std::accumulate(taper->begin(), taper->end(), 0.0);
  report.visibility = mean > 0.0 ? std::clamp(2.0 * report.signal / (mean * wsum), 0.0, 1.0) : 0.0;
  return report;
}

double noise_level_db(double p_noise, double p_probe) {
  if (!(p_probe > 0.0)) throw DomainError("probe power must be positive");
  if (!(p_noise >= 0.0)) throw DomainError("noise power must be non-negative");
  if (p_noise == 0.0) return kNoNoiseDb;
  return 10.0 * std::log10(p_noise / p_probe);
}

PixelPeaks analyze_pixel(const StftEngine& engine, std::span<const double> counts, double start_mm,
                         const PeakConfig& peaks) {
  PixelPeaks out;
  try {
    VisibilityCurve curve;
    curve.visibility = engine.visibility(counts);
    curve.positions_mm = engine.center_offsets_mm();
    for (double& z : curve.positions_mm) z += start_mm;
    out.peaks = find_surface_peaks(curve, peaks);
  } catch (const Error&) {
    out.failed = true;
  }
  return out;
}

DepthMaps assemble_depth_maps(int width, int height, std::span<const PixelPeaks> pixels,
                              const PeakConfig& peaks) {
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DomainError("pixel count does not match the map dimensions");
  }
  DepthMaps maps;
  maps.failed = Grid<std::uint8_t>(width, height, 0);

  std::vector<double> all;
  for (const auto& p : pixels) {
    for (const auto& e : p.peaks) all.push_back(e.position_mm);
  }
  std::sort(all.begin(), all.end());

  // Split the sorted positions wherever the gap exceeds half the minimum
  // separation; each run is one surface candidate.
  struct Cluster {
    std::size_t count;
    double center;
  };
  std::vector<Cluster> clusters;
  const double gap = 0.5 * peaks.min_separation_mm;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i + 1;
    while (j < all.size() && all[j] - all[j - 1] <= gap) ++j;
    std::vector<double> run(all.begin() + static_cast<std::ptrdiff_t>(i), all.begin() + static_cast<std::ptrdiff_t>(j));
    clusters.push_back({j - i, median_of(std::move(run))});
    i = j;
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.count > b.count; });
  if (static_cast<int>(clusters.size()) > peaks.max_surfaces) clusters.resize(static_cast<std::size_t>(peaks.max_surfaces));
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.center < b.center; });

  for (const auto& c : clusters) {
    maps.surfaces.push_back({c.center, Grid<double>(width, height, 0.0), Grid<double>(width, height, std::nan(""))});
  }

  for (std::size_t p = 0; p < pixels.size(); ++p) {
    const int x = static_cast<int>(p % static_cast<std::size_t>(width));
    const int y = static_cast<int>(p / static_cast<std::size_t>(width));
    if (pixels[p].failed) {
      maps.failed(x, y) = 1;
      continue;
    }
    for (const auto& e : pixels[p].peaks) {
      if (maps.surfaces.empty()) break;
      std::size_t best = 0;
      for (std::size_t s = 1; s < maps.surfaces.size(); ++s) {
        if (std::abs(e.position_mm - maps.surfaces[s].expected_position_mm) <
            std::abs(e.position_mm - maps.surfaces[best].expected_position_mm)) {
          best = s;
        }
      }
      auto& surface = maps.surfaces[best];
      if (e.visibility_peak > surface.visibility(x, y)) {
        surface.visibility(x, y) = e.visibility_peak;
        surface.position_mm(x, y) = e.position_mm;
      }
    }
  }
  return maps;
}

DepthMaps reconstruct_depth_maps(const scan::FrameStack& stack, Channel channel, const StftConfig& cfg,
                                 const PeakConfig& peaks) {
  const std::size_t n = stack.num_steps();
  if (n < 2) throw DomainError("frame stack needs at least two scan positions");
  const double step = (stack.positions_mm.back() - stack.positions_mm.front()) / static_cast<double>(n - 1);
  const StftEngine engine(cfg, step, n);
  const std::size_t pixels = static_cast<std::size_t>(stack.width) * static_cast<std::size_t>(stack.height);
  std::vector<PixelPeaks> results(pixels);
  parallel_for(pixels, [&](std::size_t p) {
    const Pixel pixel{static_cast<int>(p % static_cast<std::size_t>(stack.width)),
                      static_cast<int>(p / static_cast<std::size_t>(stack.width))};
    const auto counts = stack.trace(channel, pixel);
    const std::vector<double> trace(counts.begin(), counts.end());
    results[p] = analyze_pixel(engine, trace, stack.positions_mm.front(), peaks);
  });
  return assemble_depth_maps(stack.width, stack.height, results, peaks);
}

}  // namespace quic::dsp
