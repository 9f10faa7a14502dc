#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "quic/error.hpp"
#include "quic/experiments.hpp"
#include "quic/scenario.hpp"
#include "quic/writers.hpp"

namespace {

using namespace quic;
namespace ex = quic::experiments;

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string pixels;
  std::string frames;
  bool quiet = false;
};

int exit_code(const std::string& code) {
  if (code == "E_PARSE") return 3;
  if (code == "E_SCHEMA") return 4;
  if (code == "E_PHYSICS") return 5;
  if (code == "E_IO") return 6;
  if (code == "E_RESOURCE") return 7;
  if (code == "E_DOMAIN") return 8;
  return 1;
}

std::string single_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

int fail(const std::string& code, const std::string& message, int status) {
  std::cerr << "error[" << code << "] " << single_line(message) << "\n";
  return status;
}

ex::ScenarioConfig load(const Options& opt) {
  auto cfg = scenario::load_scenario(opt.scenario);
  scenario::Overrides overrides;
  overrides.seed = opt.seed;
  if (!opt.pixels.empty()) overrides.pixels = scenario::parse_pixels(opt.pixels);
  scenario::apply_overrides(cfg, overrides);
  return cfg;
}

std::string fmt(double v) { return io::format_number(v); }

void print_ranging(const ex::RangingReport& report) {
  for (const ex::ChannelRanging* r : {&report.ref, report.probe ? &*report.probe : nullptr}) {
    if (!r) continue;
    std::cout << scan::channel_name(r->channel) << ": " << r->surfaces.size() << " surface(s), envelope FWHM "
              << fmt(r->envelope_fwhm_mm) << " mm, " << r->failed_pixels << " failed pixel(s)\n";
    for (const auto& s : r->surfaces) {
      std::cout << "  surface " << s.index << ": " << fmt(s.mean_position_mm) << " mm +/- "
                << fmt(s.std_position_mm * 1e3) << " um over " << s.pixels << " pixels\n";
    }
  }
}

int run(const std::string& command, const Options& opt) {
  const auto cfg = load(opt);
  ex::RunOptions run;
  run.out_dir = opt.out;

  if (command == "validate") {
    if (!opt.quiet) {
      std::cout << "ok: " << cfg.scene.width << "x" << cfg.scene.height << " pixels, "
                << cfg.scene.surfaces.size() << " surface(s), " << cfg.scan.num_steps << " scan steps, "
                << cfg.seeds.size() << " seed(s)\n";
    }
  } else if (command == "simulate") {
    const auto scene = scene::build_scene(cfg.scene);
    const auto stack = scan::simulate_scan(scene, cfg.source, cfg.scan, cfg.noise, cfg.seeds.front(), cfg.crystal);
    io::ArtifactWriter writer(opt.out);
    ex::write_frame_stack(writer, stack);
    writer.write_manifest(cfg.seeds);
    if (!opt.quiet) std::cout << "wrote " << writer.artifacts().size() << " artifacts to " << opt.out << "\n";
  } else if (command == "analyze") {
    const auto report = opt.frames.empty()
                            ? ex::run_ranging_experiment(cfg, run)
                            : ex::analyze_frame_stack(cfg, ex::read_frame_stack(opt.frames, cfg), run);
    if (!opt.quiet) print_ranging(report);
  } else if (command == "sweep") {
    const auto result = ex::run_noise_sweep(cfg, run);
    if (!opt.quiet) {
      for (const auto& k : result.knees) {
        std::cout << scan::channel_name(k.channel) << "/" << k.region << ": baseline SNR " << fmt(k.baseline_snr)
                  << ", knee " << (k.knee_db ? fmt(*k.knee_db) + " dB" : "none") << ", floor "
                  << (k.floor_db ? fmt(*k.floor_db) + " dB" : "none") << "\n";
      }
    }
  } else if (command == "jam") {
    const auto report = ex::run_jamming_experiment(cfg, run);
    if (!opt.quiet) {
      std::size_t matched = 0;
      std::size_t mismatched = 0;
      for (auto v : report.affected_matched.values()) matched += v;
      for (auto v : report.affected_mismatched.values()) mismatched += v;
      std::cout << "jam-affected reference pixels: matched " << matched << ", mismatched " << mismatched << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-induced-coherence LiDAR simulator"};
  app.require_subcommand(1, 1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    sub->add_option("--seed", opt.seed, "Seed override; seeds become S, S+1, ...");
    sub->add_option("--pixels", opt.pixels, "Camera size override, WxH");
    sub->add_flag("--quiet", opt.quiet, "Suppress the summary on stdout");
    if (needs_out) sub->add_option("--out", opt.out, "Output directory")->required();
  };
  add_common(app.add_subcommand("validate", "Check a scenario without simulating"), false);
  add_common(app.add_subcommand("simulate", "Write the per-position camera frames"), true);
  auto* analyze = app.add_subcommand("analyze", "Ranging and depth maps");
  add_common(analyze, true);
  analyze->add_option("--frames", opt.frames, "Analyze frames written by 'simulate' instead of simulating");
  add_common(app.add_subcommand("sweep", "Noise sweep with SNR knee and floor"), true);
  add_common(app.add_subcommand("jam", "Jamming experiment images and masks"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("E_USAGE", e.what(), 2);
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const quic::Error& e) {
    return fail(e.code(), e.what(), exit_code(e.code()));
  } catch (const std::exception& e) {
    return fail("E_INTERNAL", e.what(), 1);
  }
}
