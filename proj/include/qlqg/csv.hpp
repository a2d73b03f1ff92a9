#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Small CSV and file helpers. Floats are printed with 17 significant
// digits so values round-trip exactly and reruns are byte-comparable.
namespace qlqg::csv {

std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_table(const Table& t, const std::string& path);
Table read_table(const std::string& path);

// FNV-1a 64-bit content hash, used by the CLI artifact manifest.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace qlqg::csv
