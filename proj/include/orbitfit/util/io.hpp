#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace orbitfit::util {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see partial files.
void write_text(const std::filesystem::path& path, std::string_view contents);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

/// printf-style "%.<decimals>f" with "-0.000000" normalized to "0.000000".
std::string fixed(double value, int decimals = 6);
/// Shortest text that parses back to the same double ("%.17g").
std::string exact(double value);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace orbitfit::util
