#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "epigraph/error.hpp"

namespace epigraph::csv {

// Minimal reader for the unquoted CSV files this project writes.
inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Reads the header and returns the data rows; the header must match exactly.
inline std::vector<std::vector<std::string>> read(std::istream& in,
                                                  const std::vector<std::string>& header) {
  std::string line;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next()) throw FormatError("CSV input is empty");
  if (split(line) != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw FormatError("unexpected CSV header '" + line + "', expected '" + want + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (next()) {
    auto fields = split(line);
    if (fields.size() != header.size()) {
      throw FormatError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()) + ": '" + line + "'");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + s + "'");
  }
}

inline long to_long(const std::string& s) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("not an integer: '" + s + "'");
  }
}

}  // namespace epigraph::csv
