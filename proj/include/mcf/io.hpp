#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcf::io {

// Shortest round-trip decimal representation (byte-deterministic output).
std::string fmt(double x);

// FNV-1a 64-bit, hex string.
std::string fnv1a_hex(const std::string& data);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& content);

}  // namespace mcf::io
