#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quic/grid.hpp"

namespace quic::io {

/// Locale-independent decimal rendering with 9 significant digits.
/// Non-finite values render as "inf", "-inf" or "nan".
std::string format_number(double value);

using CsvCell = std::variant<double, std::int64_t, std::string>;
using CsvRow = std::vector<CsvCell>;

/// Header line plus one line per row, '\n' terminated. Throws DomainError if
/// a row's width differs from the header.
std::string render_csv(std::span<const std::string> header, std::span<const CsvRow> rows);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
std::string encode_pgm(const Grid<std::uint16_t>& frame);
Grid<std::uint16_t> decode_pgm(std::string_view bytes);

/// Maps visibility in [0, 1] onto the full 16-bit range.
Grid<std::uint16_t> visibility_to_frame(const Grid<double>& visibility);

std::string sha256_hex(std::string_view bytes);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

struct Artifact {
  std::string path;  // relative to the output root, '/' separated
  std::size_t bytes = 0;
  std::string sha256;
};

/// Writes artifacts under one root directory and records a content hash for
/// each. `write_manifest` emits `manifest.txt` with lines sorted by path.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<Artifact>& artifacts() const noexcept { return artifacts_; }

  void write(const std::string& relative_path, std::string_view bytes);
  void write_csv(const std::string& relative_path, std::span<const std::string> header,
                 std::span<const CsvRow> rows);
  void write_pgm(const std::string& relative_path, const Grid<std::uint16_t>& frame);

  /// Returns the manifest text that was written.
  std::string write_manifest(std::span<const std::uint64_t> seeds);

 private:
  std::filesystem::path root_;
  std::vector<Artifact> artifacts_;
};

/// Manifest text for a set of artifacts: a versioned header, the seed record
/// and one `<sha256>  <bytes>  <path>` line per artifact, sorted by path.
std::string render_manifest(std::vector<Artifact> artifacts, std::span<const std::uint64_t> seeds);

}  // namespace quic::io
