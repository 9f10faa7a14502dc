#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "quic/experiments.hpp"

namespace quic::scenario {

using experiments::ScenarioConfig;

/// Parses a JSON scenario. Missing keys take the default values; a top-level
/// "preset" (paper_ranging, led_sweep, jam_sweep, jamming) supplies the base
/// that the remaining keys override.
///
/// Throws ParseError (with line and column) for malformed JSON, SchemaError
/// (with a dotted field path) for unknown keys, wrong types or out-of-range
/// values and PhysicsError for physically inconsistent configurations.
ScenarioConfig parse_scenario(std::string_view text);

ScenarioConfig load_scenario(const std::string& path);

/// JSON text that parses back to an equal configuration.
std::string serialize_scenario(const ScenarioConfig& cfg);

std::optional<ScenarioConfig> preset(std::string_view name);

struct Overrides {
  std::optional<std::uint64_t> seed;       // seeds become seed, seed + 1, ...
  std::optional<std::pair<int, int>> pixels;
};

/// Parses "WxH". Throws SchemaError on malformed input.
std::pair<int, int> parse_pixels(std::string_view text);

/// Applies command-line overrides and re-validates.
void apply_overrides(ScenarioConfig& cfg, const Overrides& overrides);

}  // namespace quic::scenario
