#include "quic/scenario.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

#include "quic/error.hpp"
#include "quic/writers.hpp"

namespace quic::scenario {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "must be finite");
  return d;
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw SchemaError(path, "integer out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  return v.get<std::int64_t>();
}

int as_int(const json& v, const std::string& path) {
  const auto i = as_integer(v, path);
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    throw SchemaError(path, "integer out of range");
  }
  return static_cast<int>(i);
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw SchemaError(path, "seeds must be non-negative");
  throw SchemaError(path, "expected an unsigned integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

std::pair<double, double> as_band(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(path, "expected [band_lo, band_hi]");
  const double lo = as_number(v[0], indexed(path, 0));
  const double hi = as_number(v[1], indexed(path, 1));
  if (!(lo < hi)) throw SchemaError(path, "band_lo must be below band_hi");
  return {lo, hi};
}

Grid<double> as_grid(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw SchemaError(path, "expected a non-empty array of rows");
  const std::size_t height = v.size();
  std::size_t width = 0;
  for (std::size_t y = 0; y < height; ++y) {
    if (!v[y].is_array() || v[y].empty()) throw SchemaError(indexed(path, y), "expected a non-empty row");
    if (y == 0) width = v[y].size();
    if (v[y].size() != width) throw SchemaError(indexed(path, y), "rows must have equal length");
  }
  Grid<double> grid(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      grid(static_cast<int>(x), static_cast<int>(y)) = as_number(v[y][x], indexed(indexed(path, y), x));
    }
  }
  return grid;
}

/// Object view that records which keys were read so the leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(const json& value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const std::string& path() const noexcept { return path_; }
  std::string field(const std::string& key) const { return join(path_, key); }

  const json* get(const std::string& key) {
    known_.insert(key);
    const auto it = value_.find(key);
    return it == value_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) out = as_number(*v, field(key));
  }
  void integer(const std::string& key, std::int64_t& out) {
    if (const json* v = get(key)) out = as_integer(*v, field(key));
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = get(key)) out = as_int(*v, field(key));
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) out = as_bool(*v, field(key));
  }

  void finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!known_.count(it.key())) throw SchemaError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& value_;
  std::string path_;
  std::set<std::string> known_;
};

void read_source(const json& v, optics::SourceSpec& source) {
  Section s(v, "source");
  s.number("lambda_pump_nm", source.lambda_pump_nm);
  s.number("lambda_ref_nm", source.lambda_ref_nm);
  s.number("lambda_probe_nm", source.lambda_probe_nm);
  s.number("eta", source.eta);
  s.number("envelope_fwhm_mm", source.envelope_fwhm_mm);
  s.finish();
}

scene::SurfaceSpec read_surface(const json& v, const std::string& path) {
  Section s(v, path);
  scene::SurfaceSpec surface;
  if (!s.has("depth_mm")) throw SchemaError(s.field("depth_mm"), "required");
  s.number("depth_mm", surface.depth_mm);
  s.number("reflectivity", surface.reflectivity);
  s.number("phase_rad", surface.phase_rad);
  if (const json* g = s.get("glyph")) {
    const auto name = as_string(*g, s.field("glyph"));
    const auto glyph = scene::glyph_from_name(name);
    if (!glyph) throw SchemaError(s.field("glyph"), "unknown glyph '" + name + "'");
    surface.glyph = *glyph;
  }
  s.number("glyph_scale", surface.glyph_scale);
  if (const json* m = s.get("reflectivity_map")) {
    if (!m->is_null()) surface.reflectivity_map = as_grid(*m, s.field("reflectivity_map"));
  }
  if (const json* m = s.get("phase_map")) {
    if (!m->is_null()) surface.phase_map = as_grid(*m, s.field("phase_map"));
  }
  s.finish();
  return surface;
}

scene::SceneSpec read_scene(const json& v) {
  Section s(v, "scene");
  int width = 64;
  int height = 64;
  s.integer("width", width);
  s.integer("height", height);
  if (width <= 0) throw SchemaError("scene.width", "must be positive");
  if (height <= 0) throw SchemaError("scene.height", "must be positive");

  scene::SceneSpec spec;
  const json* preset_name = s.get("preset");
  const json* surfaces = s.get("surfaces");
  if (preset_name && surfaces) throw SchemaError("scene.surfaces", "cannot be combined with scene.preset");
  if (preset_name) {
    const auto name = as_string(*preset_name, "scene.preset");
    if (name == "two_plates") {
      double front = 1.0;
      double separation = 2.0;
      s.number("front_depth_mm", front);
      s.number("separation_mm", separation);
      spec = scene::two_plate_scene(width, height, front, separation);
    } else if (name == "uniform") {
      double depth = 1.0;
      double reflectivity = 1.0;
      s.number("depth_mm", depth);
      s.number("reflectivity", reflectivity);
      spec = scene::uniform_scene(width, height, depth, reflectivity);
    } else {
      throw SchemaError("scene.preset", "unknown scene preset '" + name + "'");
    }
  } else if (surfaces) {
    if (!surfaces->is_array()) throw SchemaError("scene.surfaces", "expected an array");
    spec.width = width;
    spec.height = height;
    for (std::size_t i = 0; i < surfaces->size(); ++i) {
      spec.surfaces.push_back(read_surface((*surfaces)[i], indexed("scene.surfaces", i)));
    }
  } else {
    throw SchemaError("scene", "needs either surfaces or a preset");
  }
  if (const json* l = s.get("lateral_coherence_fwhm_px")) {
    if (!l->is_null()) spec.lateral_coherence_fwhm_px = as_number(*l, "scene.lateral_coherence_fwhm_px");
  }
  s.finish();
  return spec;
}

void read_scan(const json& v, scan::ScanConfig& cfg) {
  Section s(v, "scan");
  s.number("start_mm", cfg.start_mm);
  s.number("step_nm", cfg.step_nm);
  if (s.has("length_mm") && s.has("num_steps")) {
    throw SchemaError("scan.num_steps", "give either length_mm or num_steps, not both");
  }
  if (const json* l = s.get("length_mm")) {
    const double length = as_number(*l, "scan.length_mm");
    if (!(length > 0.0)) throw SchemaError("scan.length_mm", "must be positive");
    if (!(cfg.step_nm > 0.0)) throw SchemaError("scan.step_nm", "must be positive");
    cfg.num_steps = scan::ScanConfig::steps_for_length(length, cfg.step_nm);
  }
  s.integer("num_steps", cfg.num_steps);
  s.number("exposure_ms", cfg.exposure_ms);
  s.number("counts_per_intensity", cfg.counts_per_intensity);
  s.boolean("shot_noise", cfg.shot_noise);
  s.finish();
}

void read_noise(const json& v, scan::NoiseSpec& noise) {
  Section s(v, "noise");
  // Calibration first: the dB shorthands depend on it.
  s.number("probe_power_nw", noise.probe_power_nw);
  s.number("led_nw_per_density", noise.led_nw_per_density);
  if (s.has("led_db") && s.has("led_power_density")) {
    throw SchemaError("noise.led_db", "give either led_db or led_power_density, not both");
  }
  if (s.has("jam_db") && s.has("jam_power_uw")) {
    throw SchemaError("noise.jam_db", "give either jam_db or jam_power_uw, not both");
  }
  s.number("led_power_density", noise.led_power_density);
  s.number("jam_power_uw", noise.jam_power_uw);
  if (const json* d = s.get("led_db")) {
    if (!(noise.led_nw_per_density > 0.0)) throw SchemaError("noise.led_nw_per_density", "must be positive");
    noise.led_power_density = experiments::led_density_for_db(noise, as_number(*d, "noise.led_db"));
  }
  if (const json* d = s.get("jam_db")) {
    noise.jam_power_uw = experiments::jam_power_for_db(noise, as_number(*d, "noise.jam_db"));
  }
  if (const json* p = s.get("jam_pixel")) {
    if (p->is_null()) {
      noise.jam_pixel.reset();
    } else {
      if (!p->is_array() || p->size() != 2) throw SchemaError("noise.jam_pixel", "expected [x, y]");
      noise.jam_pixel = std::array<double, 2>{as_number((*p)[0], "noise.jam_pixel[0]"),
                                              as_number((*p)[1], "noise.jam_pixel[1]")};
    }
  }
  s.number("jam_detuning_rad", noise.jam_detuning_rad);
  s.number("jam_angle_per_pixel_rad", noise.jam_angle_per_pixel_rad);
  if (const json* c = s.get("jam_channels")) {
    if (!c->is_array()) throw SchemaError("noise.jam_channels", "expected an array of channel names");
    noise.jam_probe = false;
    noise.jam_reference = false;
    for (std::size_t i = 0; i < c->size(); ++i) {
      const auto name = as_string((*c)[i], indexed("noise.jam_channels", i));
      if (name == "probe") {
        noise.jam_probe = true;
      } else if (name == "reference") {
        noise.jam_reference = true;
      } else {
        throw SchemaError(indexed("noise.jam_channels", i), "unknown channel '" + name + "'");
      }
    }
  }
  s.number("dark_counts_per_ms", noise.dark_counts_per_ms);
  s.integer("full_well", noise.full_well);
  s.finish();
}

void read_crystal(const json& v, optics::PhaseMatchSpec& crystal) {
  Section s(v, "crystal");
  s.number("length_mm", crystal.crystal_length_mm);
  s.number("dk_per_radian", crystal.dk_per_radian);
  s.number("gain_at_match", crystal.gain_at_match);
  s.finish();
}

dsp::Taper as_taper(const json& v, const std::string& path) {
  const auto name = as_string(v, path);
  if (name == "hann") return dsp::Taper::Hann;
  if (name == "rectangular") return dsp::Taper::Rectangular;
  throw SchemaError(path, "unknown taper '" + name + "' (hann or rectangular)");
}

void read_channel_dsp(Section& s, dsp::StftConfig& cfg) {
  s.number("window_um", cfg.window_um);
  s.number("hop_um", cfg.hop_um);
  if (const json* t = s.get("taper")) cfg.taper = as_taper(*t, s.field("taper"));
  s.integer("zero_pad", cfg.zero_pad);
}

void read_dsp(const json& v, dsp::StftConfig& ref, dsp::StftConfig& probe) {
  Section s(v, "dsp");
  dsp::StftConfig shared = ref;
  read_channel_dsp(s, shared);
  for (dsp::StftConfig* cfg : {&ref, &probe}) {
    cfg->window_um = shared.window_um;
    cfg->hop_um = shared.hop_um;
    cfg->taper = shared.taper;
    cfg->zero_pad = shared.zero_pad;
  }
  if (const json* b = s.get("ref_band")) std::tie(ref.band_lo, ref.band_hi) = as_band(*b, "dsp.ref_band");
  if (const json* b = s.get("probe_band")) std::tie(probe.band_lo, probe.band_hi) = as_band(*b, "dsp.probe_band");
  for (const auto& [key, cfg] : {std::pair{"ref", &ref}, std::pair{"probe", &probe}}) {
    if (const json* c = s.get(key)) {
      Section sub(*c, s.field(key));
      read_channel_dsp(sub, *cfg);
      if (const json* b = sub.get("band")) std::tie(cfg->band_lo, cfg->band_hi) = as_band(*b, sub.field("band"));
      sub.finish();
    }
  }
  s.finish();
}

void read_peaks(const json& v, dsp::PeakConfig& peaks) {
  Section s(v, "peaks");
  s.integer("max_surfaces", peaks.max_surfaces);
  s.number("min_separation_mm", peaks.min_separation_mm);
  s.number("threshold", peaks.threshold);
  s.finish();
}

std::optional<experiments::SweepSpec> read_sweep(const json& v) {
  if (v.is_null()) return std::nullopt;
  Section s(v, "sweep");
  experiments::SweepSpec sweep;
  if (const json* k = s.get("kind")) {
    const auto name = as_string(*k, "sweep.kind");
    if (name == "led") {
      sweep.kind = experiments::SweepKind::Led;
    } else if (name == "jam") {
      sweep.kind = experiments::SweepKind::Jam;
    } else {
      throw SchemaError("sweep.kind", "unknown sweep kind '" + name + "' (led or jam)");
    }
  }
  const json* levels = s.get("levels_db");
  if (!levels) throw SchemaError("sweep.levels_db", "required");
  if (!levels->is_array()) throw SchemaError("sweep.levels_db", "expected an array");
  for (std::size_t i = 0; i < levels->size(); ++i) {
    sweep.levels_db.push_back(as_number((*levels)[i], indexed("sweep.levels_db", i)));
  }
  s.finish();
  return sweep;
}

void read_jamming(const json& v, experiments::JammingSpec& jamming) {
  Section s(v, "jamming");
  s.number("jam_db", jamming.jam_db);
  s.number("led_db", jamming.led_db);
  s.number("mismatch_half_phase_rad", jamming.mismatch_half_phase_rad);
  s.finish();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::string parse_message(const std::string& what) {
  // "[json.exception.parse_error.101] parse error at line 1, column 2: syntax error ..."
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

ordered_json grid_json(const Grid<double>& grid) {
  ordered_json rows = ordered_json::array();
  for (int y = 0; y < grid.height(); ++y) {
    ordered_json row = ordered_json::array();
    for (int x = 0; x < grid.width(); ++x) row.push_back(grid(x, y));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json dsp_json(const dsp::StftConfig& cfg) {
  return {{"window_um", cfg.window_um},
          {"hop_um", cfg.hop_um},
          {"taper", cfg.taper == dsp::Taper::Hann ? "hann" : "rectangular"},
          {"zero_pad", cfg.zero_pad},
          {"band", {cfg.band_lo, cfg.band_hi}}};
}

}  // namespace

std::optional<ScenarioConfig> preset(std::string_view name) {
  if (name == "paper_ranging") return experiments::paper_ranging_scenario();
  if (name == "led_sweep") return experiments::led_sweep_scenario();
  if (name == "jam_sweep") return experiments::jam_sweep_scenario();
  if (name == "jamming") return experiments::jamming_scenario();
  return std::nullopt;
}

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(parse_message(e.what()), line, column);
  }

  Section top(root, "");
  ScenarioConfig cfg;
  bool have_scene = false;
  if (const json* p = top.get("preset")) {
    const auto name = as_string(*p, "preset");
    auto base = preset(name);
    if (!base) throw SchemaError("preset", "unknown preset '" + name + "'");
    cfg = std::move(*base);
    have_scene = true;
  }
  if (const json* v = top.get("source")) read_source(*v, cfg.source);
  if (const json* v = top.get("scene")) {
    cfg.scene = read_scene(*v);
    have_scene = true;
  }
  if (!have_scene) throw SchemaError("scene", "required");
  if (const json* v = top.get("scan")) read_scan(*v, cfg.scan);
  if (const json* v = top.get("noise")) read_noise(*v, cfg.noise);
  if (const json* v = top.get("crystal")) read_crystal(*v, cfg.crystal);
  if (const json* v = top.get("dsp")) read_dsp(*v, cfg.ref_dsp, cfg.probe_dsp);
  if (const json* v = top.get("peaks")) read_peaks(*v, cfg.peaks);
  if (const json* v = top.get("sweep")) cfg.sweep = read_sweep(*v);
  if (const json* v = top.get("seeds")) {
    if (!v->is_array()) throw SchemaError("seeds", "expected an array of unsigned integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < v->size(); ++i) cfg.seeds.push_back(as_seed((*v)[i], indexed("seeds", i)));
  }
  if (const json* v = top.get("jamming")) read_jamming(*v, cfg.jamming);
  top.integer("snr_surface", cfg.snr_surface);
  top.finish();

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(io::read_file(path)); }

std::string serialize_scenario(const ScenarioConfig& cfg) {
  ordered_json root;
  root["source"] = {{"lambda_pump_nm", cfg.source.lambda_pump_nm},
                    {"lambda_ref_nm", cfg.source.lambda_ref_nm},
                    {"lambda_probe_nm", cfg.source.lambda_probe_nm},
                    {"eta", cfg.source.eta},
                    {"envelope_fwhm_mm", cfg.source.envelope_fwhm_mm}};

  ordered_json scene;
  scene["width"] = cfg.scene.width;
  scene["height"] = cfg.scene.height;
  ordered_json surfaces = ordered_json::array();
  for (const auto& s : cfg.scene.surfaces) {
    ordered_json surface{{"depth_mm", s.depth_mm},
                         {"reflectivity", s.reflectivity},
                         {"phase_rad", s.phase_rad},
                         {"glyph", std::string(scene::glyph_name(s.glyph))},
                         {"glyph_scale", s.glyph_scale}};
    if (s.reflectivity_map) surface["reflectivity_map"] = grid_json(*s.reflectivity_map);
    if (s.phase_map) surface["phase_map"] = grid_json(*s.phase_map);
    surfaces.push_back(std::move(surface));
  }
  scene["surfaces"] = std::move(surfaces);
  scene["lateral_coherence_fwhm_px"] =
      cfg.scene.lateral_coherence_fwhm_px ? ordered_json(*cfg.scene.lateral_coherence_fwhm_px) : ordered_json();
  root["scene"] = std::move(scene);

  root["scan"] = {{"start_mm", cfg.scan.start_mm},
                  {"step_nm", cfg.scan.step_nm},
                  {"num_steps", cfg.scan.num_steps},
                  {"exposure_ms", cfg.scan.exposure_ms},
                  {"counts_per_intensity", cfg.scan.counts_per_intensity},
                  {"shot_noise", cfg.scan.shot_noise}};

  const auto& n = cfg.noise;
  ordered_json channels = ordered_json::array();
  if (n.jam_probe) channels.push_back("probe");
  if (n.jam_reference) channels.push_back("reference");
  root["noise"] = {{"probe_power_nw", n.probe_power_nw},
                   {"led_nw_per_density", n.led_nw_per_density},
                   {"led_power_density", n.led_power_density},
                   {"jam_power_uw", n.jam_power_uw},
                   {"jam_pixel", n.jam_pixel ? ordered_json{(*n.jam_pixel)[0], (*n.jam_pixel)[1]} : ordered_json()},
                   {"jam_detuning_rad", n.jam_detuning_rad},
                   {"jam_angle_per_pixel_rad", n.jam_angle_per_pixel_rad},
                   {"jam_channels", channels},
                   {"dark_counts_per_ms", n.dark_counts_per_ms},
                   {"full_well", n.full_well}};

  root["crystal"] = {{"length_mm", cfg.crystal.crystal_length_mm},
                     {"dk_per_radian", cfg.crystal.dk_per_radian},
                     {"gain_at_match", cfg.crystal.gain_at_match}};
  root["dsp"] = {{"ref", dsp_json(cfg.ref_dsp)}, {"probe", dsp_json(cfg.probe_dsp)}};
  root["peaks"] = {{"max_surfaces", cfg.peaks.max_surfaces},
                   {"min_separation_mm", cfg.peaks.min_separation_mm},
                   {"threshold", cfg.peaks.threshold}};
  if (cfg.sweep) {
    root["sweep"] = {{"kind", std::string(experiments::sweep_kind_name(cfg.sweep->kind))},
                     {"levels_db", cfg.sweep->levels_db}};
  } else {
    root["sweep"] = nullptr;
  }
  root["seeds"] = cfg.seeds;
  root["jamming"] = {{"jam_db", cfg.jamming.jam_db},
                     {"led_db", cfg.jamming.led_db},
                     {"mismatch_half_phase_rad", cfg.jamming.mismatch_half_phase_rad}};
  root["snr_surface"] = cfg.snr_surface;
  return root.dump(2) + "\n";
}

std::pair<int, int> parse_pixels(std::string_view text) {
  const auto x = text.find('x');
  auto parse = [&](std::string_view part) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value <= 0) {
      throw SchemaError("pixels", "expected WxH with positive integers, got '" + std::string(text) + "'");
    }
    return value;
  };
  if (x == std::string_view::npos) {
    throw SchemaError("pixels", "expected WxH with positive integers, got '" + std::string(text) + "'");
  }
  return {parse(text.substr(0, x)), parse(text.substr(x + 1))};
}

void apply_overrides(ScenarioConfig& cfg, const Overrides& overrides) {
  if (overrides.seed) {
    const std::size_t count = std::max<std::size_t>(cfg.seeds.size(), 1);
    cfg.seeds.clear();
    for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(*overrides.seed + i);
  }
  if (overrides.pixels) {
    cfg.scene.width = overrides.pixels->first;
    cfg.scene.height = overrides.pixels->second;
  }
  cfg.validate();
}

}  // namespace quic::scenario
