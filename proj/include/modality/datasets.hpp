#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modality/sample.hpp"

namespace modality {

//! Catalog entry for one bundled dataset. The checksum is pinned at
//! ingestion so silent file drift fails loudly.
struct DatasetDescriptor {
  std::string name;
  std::size_t n = 0;
  std::string units;
  std::string source;
  std::string checksum_fnv1a64;
  std::vector<std::string> columns;
  std::string note;
};

struct LoadedDataset {
  Sample sample;
  std::map<std::string, std::vector<std::string>> annotations;  // column -> cells
  const DatasetDescriptor* descriptor = nullptr;
};

inline const std::vector<DatasetDescriptor>& dataset_catalog() {
  static const std::vector<DatasetDescriptor> catalog{
      {"acidity", 155, "log ANC (log ueq/L)",
       "Acid-neutralising capacity of 155 lakes in North-Central Wisconsin "
       "(Crawford et al. 1992; Crawford 1994)",
       "810ad087e53fb1bd",
       {"value"},
       "Log-scale series; see data/README for provenance details."},
      {"chondrite", 22, "% silica",
       "Percentage of silica in 22 chondrite meteors (Good & Gaskins 1980, Table 2)",
       "67f5619df92dfaa1",
       {"value"},
       ""},
      {"enzyme", 245, "enzymatic activity",
       "Blood enzymatic activity for an enzyme involved in the metabolism of "
       "carcinogenic substances, 245 individuals (Bechtel et al. 1993)",
       "af47ef42e8e203c6",
       {"value"},
       "See data/README for provenance details."},
      {"galaxy", 82, "km/s",
       "Velocities of 82 galaxies from the unfilled survey of the Corona "
       "Borealis region (Postman, Huchra & Geller 1986; Roeder 1990)",
       "5fd2bb4c3b82dfcc",
       {"value"},
       "Uses Roeder's original 78th value 26690 rather than the 26960 misprint."},
      {"geyser", 571, "minutes",
       "Waiting time between the starts of successive eruptions of the Old "
       "Faithful geyser (October 1980: Hardle's Table 3 edition, 272 values; "
       "August 1985: Azzalini & Bowman 1990, 299 values)",
       "98a94946a80f2c80",
       {"value", "period"},
       "October 1980 period follows the 272-observation Hardle edition."},
      {"stamps", 485, "mm",
       "Thickness of 485 used white wove stamps of the 1872 Hidalgo issue of "
       "Mexico (Izenman & Sommer 1988)",
       "cbfa4f61a78fb589",
       {"value", "watermark", "overprint"},
       "29 of 485 rows carry a watermark; see data/README for provenance."},
  };
  return catalog;
}

namespace detail {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

//! Directory holding the bundled data files: the MODALITY_DATA_DIR
//! environment variable when set, otherwise the build-time default.
inline std::string dataset_root() {
  if (const char* env = std::getenv("MODALITY_DATA_DIR"); env && *env) return env;
#ifdef MODALITY_SOURCE_DATA_DIR
  return MODALITY_SOURCE_DATA_DIR;
#else
  return "data";
#endif
}

inline const DatasetDescriptor& dataset_descriptor(std::string_view name) {
  for (const auto& d : dataset_catalog())
    if (d.name == name) return d;
  throw std::invalid_argument("unknown dataset: " + std::string(name));
}

//! Parses dataset CSV content (a `value` column plus annotations).
inline LoadedDataset parse_dataset_csv(const std::string& bytes, const DatasetDescriptor& desc) {
  std::stringstream ss(bytes);
  std::string line;
  if (!std::getline(ss, line)) throw std::runtime_error("empty dataset content: " + desc.name);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  std::size_t value_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == "value") value_col = c;
  if (value_col == header.size())
    throw std::runtime_error("dataset has no value column: " + desc.name);

  LoadedDataset out;
  std::vector<double> values;
  for (const auto& col : header)
    if (col != "value") out.annotations[col] = {};
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged row in dataset: " + desc.name);
    values.push_back(std::stod(cells[value_col]));
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != value_col) out.annotations[header[c]].push_back(cells[c]);
  }
  if (values.size() != desc.n)
    throw std::runtime_error("dataset row count mismatch for " + desc.name + ": expected " +
                             std::to_string(desc.n) + ", found " + std::to_string(values.size()));
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[i - 1])
      throw std::runtime_error("dataset rows must be sorted by value: " + desc.name);
  out.sample = Sample::from_values(std::move(values));
  out.descriptor = &desc;
  return out;
}

//! Loads a bundled dataset, verifying the pinned checksum and row count.
inline LoadedDataset load_dataset(std::string_view name, std::string_view root = {}) {
  const DatasetDescriptor& desc = dataset_descriptor(name);
  const std::string dir = root.empty() ? dataset_root() : std::string(root);
  const std::string path = dir + "/" + desc.name + ".csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset file not found: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::string checksum = detail::to_hex64(detail::fnv1a64(bytes));
  if (checksum != desc.checksum_fnv1a64)
    throw std::runtime_error("dataset checksum mismatch for " + desc.name + ": expected " +
                             desc.checksum_fnv1a64 + ", file has " + checksum);
  return parse_dataset_csv(bytes, desc);
}

//! Serialises a loaded dataset back to its CSV form (used by round-trip
//! checks and by the CLI when exporting).
inline std::string serialize_dataset(const LoadedDataset& d) {
  std::string out = "value";
  std::vector<std::string> extra;
  for (const auto& [col, cells] : d.annotations) extra.push_back(col);
  for (const auto& col : extra) out += "," + col;
  out += "\n";
  const auto vals = d.sample.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, vals[i]);
    out.append(buf, p);
    for (const auto& col : extra) out += "," + d.annotations.at(col)[i];
    out += "\n";
  }
  return out;
}

}  // namespace modality
