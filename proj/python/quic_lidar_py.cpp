#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "quic/dsp.hpp"
#include "quic/error.hpp"
#include "quic/experiments.hpp"
#include "quic/optics.hpp"
#include "quic/scan.hpp"
#include "quic/scenario.hpp"
#include "quic/scene.hpp"

namespace py = pybind11;
using namespace quic;
namespace ex = quic::experiments;

namespace {

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

template <typename T>
py::array_t<T> grid_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

scan::Channel channel_from(const std::string& name) {
  if (name == "ref" || name == "reference") return scan::Channel::Reference;
  if (name == "probe") return scan::Channel::Probe;
  throw DomainError("channel must be 'ref' or 'probe', got '" + name + "'");
}

dsp::StftConfig stft_config(double window_um, double hop_um, double band_lo, double band_hi,
                            const std::string& taper, int zero_pad) {
  dsp::StftConfig cfg;
  cfg.window_um = window_um;
  cfg.hop_um = hop_um;
  cfg.band_lo = band_lo;
  cfg.band_hi = band_hi;
  if (taper == "hann") {
    cfg.taper = dsp::Taper::Hann;
  } else if (taper == "rectangular") {
    cfg.taper = dsp::Taper::Rectangular;
  } else {
    throw DomainError("taper must be 'hann' or 'rectangular'");
  }
  cfg.zero_pad = zero_pad;
  return cfg;
}

dsp::Interferogram interferogram(std::vector<double> positions_mm, std::vector<double> counts) {
  dsp::Interferogram t;
  t.positions_mm = std::move(positions_mm);
  t.counts = std::move(counts);
  return t;
}

py::dict surface_dict(const dsp::SurfaceEstimate& s) {
  py::dict d;
  d["position_mm"] = s.position_mm;
  d["visibility_peak"] = s.visibility_peak;
  d["window_lo_mm"] = s.window_lo_mm;
  d["window_hi_mm"] = s.window_hi_mm;
  return d;
}

py::list artifact_list(const std::vector<io::Artifact>& artifacts) {
  py::list out;
  for (const auto& a : artifacts) out.append(py::make_tuple(a.path, a.bytes, a.sha256));
  return out;
}

py::dict channel_dict(const ex::ChannelRanging& r) {
  py::dict d;
  d["channel"] = std::string(scan::channel_name(r.channel));
  py::list surfaces;
  for (const auto& s : r.surfaces) {
    py::dict e;
    e["index"] = s.index;
    e["expected_position_mm"] = s.expected_position_mm;
    e["mean_position_mm"] = s.mean_position_mm;
    e["std_position_mm"] = s.std_position_mm;
    e["pixels"] = s.pixels;
    surfaces.append(e);
  }
  d["surfaces"] = surfaces;
  py::list visibility;
  py::list position;
  for (const auto& m : r.maps.surfaces) {
    visibility.append(grid_array(m.visibility));
    position.append(grid_array(m.position_mm));
  }
  d["visibility_maps"] = visibility;
  d["position_maps"] = position;
  d["inspected_pixel"] = py::make_tuple(r.inspected.x, r.inspected.y);
  d["curve_positions_mm"] = to_array(r.inspected_curve.positions_mm);
  d["curve_visibility"] = to_array(r.inspected_curve.visibility);
  d["envelope_fwhm_mm"] = r.envelope_fwhm_mm;
  d["failed_pixels"] = r.failed_pixels;
  return d;
}

ex::RunOptions run_options(const std::optional<std::filesystem::path>& out_dir, bool probe) {
  ex::RunOptions o;
  if (out_dir) o.out_dir = *out_dir;
  o.probe = probe;
  return o;
}

}  // namespace

PYBIND11_MODULE(_quic_lidar, m) {
  m.doc() = "Quantum-induced-coherence LiDAR simulator and analysis";

  auto base = py::register_exception<Error>(m, "QuicError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<PhysicsError>(m, "PhysicsError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());

  // optics
  m.def("coherence_gamma", [](double tau_s, double envelope_fwhm_mm) {
    return optics::coherence_gamma(tau_s, optics::CoherenceModel::from_envelope_fwhm(envelope_fwhm_mm));
  }, py::arg("tau_s"), py::arg("envelope_fwhm_mm") = 0.4);
  m.def("path_delay_to_tau", [](double dz_mm) { return optics::path_delay_to_tau(dz_mm); }, py::arg("delta_z_mm"));
  m.def("reference_intensity",
        [](double gamma, double r_p, double phi_probe, double phi_ref, double phi_pump, double eta) {
          optics::SourceSpec s;
          s.eta = eta;
          return optics::reference_intensity(s, gamma, r_p, {phi_probe, phi_ref, phi_pump});
        },
        py::arg("gamma"), py::arg("r_p"), py::arg("phi_probe") = 0.0, py::arg("phi_ref") = 0.0,
        py::arg("phi_pump") = 0.0, py::arg("eta") = 0.1);
  m.def("visibility", &optics::visibility, py::arg("r_p"), py::arg("gamma"));
  m.def("qi_coincidence_signal", &optics::qi_coincidence_signal, py::arg("r_p"), py::arg("eta") = 0.1);
  m.def("fringe_spatial_frequency", &optics::fringe_spatial_frequency, py::arg("lambda_nm"));
  m.def("stimulated_pdc_gain",
        [](double dk, double jam_power_uw, double crystal_length_mm, double gain_at_match) {
          optics::PhaseMatchSpec spec;
          spec.crystal_length_mm = crystal_length_mm;
          spec.gain_at_match = gain_at_match;
          return optics::stimulated_pdc_gain(dk, spec, jam_power_uw);
        },
        py::arg("delta_k_per_um"), py::arg("jam_power_uw"), py::arg("crystal_length_mm") = 20.0,
        py::arg("gain_at_match") = 4e-5);
  m.def("check_energy_conservation", [](double pump, double ref, double probe) {
    optics::SourceSpec s;
    s.lambda_pump_nm = pump;
    s.lambda_ref_nm = ref;
    s.lambda_probe_nm = probe;
    return optics::check_energy_conservation(s);
  }, py::arg("lambda_pump_nm"), py::arg("lambda_ref_nm"), py::arg("lambda_probe_nm"));

  // dsp
  m.def("stft_visibility",
        [](std::vector<double> positions, std::vector<double> counts, double window_um, double hop_um,
           double band_lo, double band_hi, const std::string& taper, int zero_pad) {
          const auto curve = dsp::stft_visibility(interferogram(std::move(positions), std::move(counts)),
                                                  stft_config(window_um, hop_um, band_lo, band_hi, taper, zero_pad));
          return py::make_tuple(to_array(curve.positions_mm), to_array(curve.visibility));
        },
        py::arg("positions_mm"), py::arg("counts"), py::arg("window_um") = 100.0, py::arg("hop_um") = 1.0,
        py::arg("band_lo") = 2.0, py::arg("band_hi") = 2.4, py::arg("taper") = "hann", py::arg("zero_pad") = 4);
  m.def("find_surface_peaks",
        [](std::vector<double> positions, std::vector<double> visibility, int max_surfaces, double min_sep,
           double threshold) {
          dsp::PeakConfig cfg{max_surfaces, min_sep, threshold};
          py::list out;
          for (const auto& s : dsp::find_surface_peaks({std::move(positions), std::move(visibility)}, cfg)) {
            out.append(surface_dict(s));
          }
          return out;
        },
        py::arg("positions_mm"), py::arg("visibility"), py::arg("max_surfaces") = 2,
        py::arg("min_separation_mm") = 0.5, py::arg("threshold") = 0.05);
  m.def("curve_fwhm", [](std::vector<double> positions, std::vector<double> visibility) {
    return dsp::curve_fwhm({std::move(positions), std::move(visibility)});
  }, py::arg("positions_mm"), py::arg("visibility"));
  m.def("spectral_snr",
        [](std::vector<double> positions, std::vector<double> counts, double center_mm, double window_um,
           double band_lo, double band_hi) {
          const auto r = dsp::spectral_snr(interferogram(std::move(positions), std::move(counts)),
                                           stft_config(window_um, 1.0, band_lo, band_hi, "hann", 4), center_mm);
          py::dict d;
          d["snr"] = r.snr;
          d["signal"] = r.signal;
          d["baseline"] = r.baseline;
          d["peak_frequency"] = r.peak_frequency;
          d["visibility"] = r.visibility;
          return d;
        },
        py::arg("positions_mm"), py::arg("counts"), py::arg("center_mm"), py::arg("window_um") = 100.0,
        py::arg("band_lo") = 2.0, py::arg("band_hi") = 2.4);
  m.def("noise_level_db", &dsp::noise_level_db, py::arg("p_noise"), py::arg("p_probe"));

  // scenarios
  py::class_<ex::ScenarioConfig>(m, "Scenario")
      .def_static("parse", &scenario::parse_scenario, py::arg("text"))
      .def_static("load", &scenario::load_scenario, py::arg("path"))
      .def_static("preset", [](const std::string& name) {
        auto cfg = scenario::preset(name);
        if (!cfg) throw SchemaError("preset", "unknown preset '" + name + "'");
        return *cfg;
      }, py::arg("name"))
      .def("to_json", &scenario::serialize_scenario)
      .def("validate", &ex::ScenarioConfig::validate)
      .def("with_overrides",
           [](ex::ScenarioConfig cfg, std::optional<std::uint64_t> seed, std::optional<std::string> pixels) {
             scenario::Overrides o;
             o.seed = seed;
             if (pixels) o.pixels = scenario::parse_pixels(*pixels);
             scenario::apply_overrides(cfg, o);
             return cfg;
           },
           py::arg("seed") = py::none(), py::arg("pixels") = py::none())
      .def_property_readonly("width", [](const ex::ScenarioConfig& c) { return c.scene.width; })
      .def_property_readonly("height", [](const ex::ScenarioConfig& c) { return c.scene.height; })
      .def_property_readonly("num_steps", [](const ex::ScenarioConfig& c) { return c.scan.num_steps; })
      .def_property_readonly("seeds", [](const ex::ScenarioConfig& c) { return c.seeds; })
      .def_property_readonly("surface_depths_mm", [](const ex::ScenarioConfig& c) {
        std::vector<double> d;
        for (const auto& s : c.scene.surfaces) d.push_back(s.depth_mm);
        return d;
      })
      .def("__eq__", [](const ex::ScenarioConfig& a, const ex::ScenarioConfig& b) { return a == b; });

  // simulation and experiments
  m.def("simulate_pixel",
        [](const ex::ScenarioConfig& cfg, const std::string& channel, int x, int y, std::optional<std::uint64_t> seed) {
          const auto scene = scene::build_scene(cfg.scene);
          const scan::ScanSimulator sim(scene, cfg.source, cfg.scan, cfg.noise, cfg.crystal,
                                        seed.value_or(cfg.seeds.front()));
          std::vector<std::uint16_t> counts(static_cast<std::size_t>(cfg.scan.num_steps));
          sim.counts_trace(channel_from(channel), {x, y}, counts);
          return py::make_tuple(to_array(sim.positions_mm()), to_array(counts));
        },
        py::arg("scenario"), py::arg("channel"), py::arg("x"), py::arg("y"), py::arg("seed") = py::none());

  m.def("run_ranging",
        [](const ex::ScenarioConfig& cfg, std::optional<std::filesystem::path> out_dir, bool probe) {
          ex::RangingReport report;
          {
            py::gil_scoped_release release;
            report = ex::run_ranging_experiment(cfg, run_options(out_dir, probe));
          }
          py::dict d;
          d["ref"] = channel_dict(report.ref);
          d["probe"] = report.probe ? py::object(channel_dict(*report.probe)) : py::object(py::none());
          d["artifacts"] = artifact_list(report.artifacts);
          d["manifest"] = report.manifest;
          return d;
        },
        py::arg("scenario"), py::arg("out_dir") = py::none(), py::arg("probe") = true);

  m.def("run_noise_sweep",
        [](const ex::ScenarioConfig& cfg, std::optional<std::filesystem::path> out_dir) {
          ex::SweepResult result;
          {
            py::gil_scoped_release release;
            result = ex::run_noise_sweep(cfg, run_options(out_dir, true));
          }
          py::list rows;
          for (const auto& r : result.rows) {
            py::dict e;
            e["noise_db"] = r.noise_db;
            e["channel"] = std::string(scan::channel_name(r.channel));
            e["region"] = r.region;
            e["mean_snr"] = r.mean_snr;
            e["std_snr"] = r.std_snr;
            e["seeds"] = r.seeds;
            rows.append(e);
          }
          py::list knees;
          for (const auto& k : result.knees) {
            py::dict e;
            e["channel"] = std::string(scan::channel_name(k.channel));
            e["region"] = k.region;
            e["baseline_snr"] = k.baseline_snr;
            e["knee_db"] = k.knee_db;
            e["floor_db"] = k.floor_db;
            knees.append(e);
          }
          py::dict d;
          d["kind"] = std::string(ex::sweep_kind_name(result.kind));
          d["levels_db"] = result.levels_db;
          d["rows"] = rows;
          d["knees"] = knees;
          d["artifacts"] = artifact_list(result.artifacts);
          d["manifest"] = result.manifest;
          return d;
        },
        py::arg("scenario"), py::arg("out_dir") = py::none());

  m.def("run_jamming",
        [](const ex::ScenarioConfig& cfg, std::optional<std::filesystem::path> out_dir) {
          ex::JammingReport report;
          {
            py::gil_scoped_release release;
            report = ex::run_jamming_experiment(cfg, run_options(out_dir, true));
          }
          py::dict conditions;
          for (const auto& c : report.conditions) {
            py::dict e;
            e["noise_db"] = c.noise_db;
            e["ref_snr"] = grid_array(c.ref.snr);
            e["probe_snr"] = grid_array(c.probe.snr);
            e["ref_visibility"] = grid_array(c.ref.visibility);
            e["probe_visibility"] = grid_array(c.probe.visibility);
            conditions[py::str(c.name)] = e;
          }
          py::dict d;
          d["conditions"] = conditions;
          d["affected_matched"] = grid_array(report.affected_matched);
          d["affected_mismatched"] = grid_array(report.affected_mismatched);
          d["artifacts"] = artifact_list(report.artifacts);
          d["manifest"] = report.manifest;
          return d;
        },
        py::arg("scenario"), py::arg("out_dir") = py::none());
}
