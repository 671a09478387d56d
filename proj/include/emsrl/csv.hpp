#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emsrl::csv {

struct Row {
  std::size_t line;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// Reads every non-blank line of a comma-separated file. Fields are trimmed.
// Throws DataFileError when the file cannot be opened.
std::vector<Row> read(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line);

// Strict numeric parse of the whole field; nullopt on any trailing garbage.
std::optional<double> to_double(std::string_view field);

// Shortest round-tripping decimal representation.
std::string fmt(double v);

}  // namespace emsrl::csv
