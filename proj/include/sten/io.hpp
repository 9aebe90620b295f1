#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sten/grid.hpp"
#include "sten/stress_tensor.hpp"

namespace sten {

// Shortest round-trip decimal formatting ("%.17g"); all CSV/JSON output goes
// through here so identical runs produce identical bytes.
std::string format_double(double x);

// FNV-1a 64-bit, hex-encoded; used for config hashes embedded in reports.
std::string fnv1a_hex(std::string_view data);

// Write-then-rename so readers never observe partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  void save(const std::filesystem::path& path) const;  // atomic
  const std::string& content() const { return body_; }

 private:
  std::size_t columns_;
  std::string body_;
};

// Field snapshots: flat little-endian binary (<base>.fld) with a JSON
// sidecar (<base>.json) describing dims, extents, spacing, and layout.
// Values are 64-bit floats, one node per column group, component index
// fastest.
void write_field_snapshot(const GridField& f, const std::filesystem::path& base);
GridField read_field_snapshot(const std::filesystem::path& base);

// Tensor snapshots store the upper triangle per node (documented in the
// sidecar) since the tensor is symmetric by construction.
void write_tensor_snapshot(const TensorField& t, const std::filesystem::path& base);
TensorField read_tensor_snapshot(const std::filesystem::path& base);

// CSV export of a 1D/2D axis-aligned slice: fixed[axis] >= 0 pins that axis
// to a node index; free axes export coordinates plus all components.
void export_csv_slice(const GridField& f, const std::filesystem::path& path,
                      const std::array<int, kMaxDim>& fixed);

}  // namespace sten
