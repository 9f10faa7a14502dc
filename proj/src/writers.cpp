#include "quic/writers.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "quic/error.hpp"

namespace quic::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 9);
  return std::string(buf.data(), result.ptr);
}

std::string render_csv(std::span<const std::string> header, std::span<const CsvRow> rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw DomainError("CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& cell) {
            using T = std::decay_t<decltype(cell)>;
            if constexpr (std::is_same_v<T, double>) {
              out += format_number(cell);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out += std::to_string(cell);
            } else {
              out += cell;
            }
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string encode_pgm(const Grid<std::uint16_t>& frame) {
  std::string out = "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n65535\n";
  out.reserve(out.size() + 2 * frame.size());
  for (std::uint16_t v : frame.values()) {
    out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xFF);
  }
  return out;
}

Grid<std::uint16_t> decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t begin = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return std::string(bytes.substr(begin, pos - begin));
  };
  if (next_token() != "P5") throw DomainError("not a binary PGM (P5) image");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw DomainError("malformed PGM header");
  }
  if (maxval != 65535) throw DomainError("only 16-bit PGM (maxval 65535) is supported");
  ++pos;  // single whitespace before the raster
  Grid<std::uint16_t> frame(width, height);
  if (bytes.size() < pos + 2 * frame.size()) throw DomainError("truncated PGM raster");
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const auto hi = static_cast<unsigned char>(bytes[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
    frame.values()[i] = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return frame;
}

Grid<std::uint16_t> visibility_to_frame(const Grid<double>& visibility) {
  Grid<std::uint16_t> out(visibility.width(), visibility.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = visibility.values()[i];
    const double clipped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    out.values()[i] = static_cast<std::uint16_t>(std::lround(clipped * 65535.0));
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("E_HASH", "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ArtifactWriter::ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

void ArtifactWriter::write(const std::string& relative_path, std::string_view bytes) {
  write_file(root_ / relative_path, bytes);
  artifacts_.push_back({relative_path, bytes.size(), sha256_hex(bytes)});
}

void ArtifactWriter::write_csv(const std::string& relative_path, std::span<const std::string> header,
                               std::span<const CsvRow> rows) {
  write(relative_path, render_csv(header, rows));
}

void ArtifactWriter::write_pgm(const std::string& relative_path, const Grid<std::uint16_t>& frame) {
  write(relative_path, encode_pgm(frame));
}

std::string render_manifest(std::vector<Artifact> artifacts, std::span<const std::uint64_t> seeds) {
  std::sort(artifacts.begin(), artifacts.end(),
            [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
  std::ostringstream out;
  out << "# quic_lidar manifest v1\n";
  out << "# seed " << (seeds.empty() ? 0 : seeds.front()) << "\n";
  out << "# seeds";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : " ") << seeds[i];
  out << "\n";
  for (const auto& a : artifacts) out << a.sha256 << "  " << a.bytes << "  " << a.path << "\n";
  return out.str();
}

std::string ArtifactWriter::write_manifest(std::span<const std::uint64_t> seeds) {
  const std::string text = render_manifest(artifacts_, seeds);
  write_file(root_ / "manifest.txt", text);
  return text;
}

}  // namespace quic::io
