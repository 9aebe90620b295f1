#include "sten/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace sten {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DomainError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) body_ += ',';
    body_ += header[k];
  }
  body_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw ShapeError("csv row width mismatch");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) body_ += ',';
    body_ += format_double(values[k]);
  }
  body_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ShapeError("csv row width mismatch");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) body_ += ',';
    body_ += cells[k];
  }
  body_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text_atomic(path, body_); }

namespace {

constexpr char kFieldMagic[8] = {'S', 'T', 'E', 'N', 'F', 'L', 'D', '1'};
constexpr char kTensorMagic[8] = {'S', 'T', 'E', 'N', 'T', 'E', 'N', '1'};

struct RawHeader {
  char magic[8];
  std::uint32_t dim = 0;
  std::uint32_t components = 0;  // per node
  std::uint32_t boundary = 0;
  std::uint32_t reserved = 0;
  std::uint64_t extents[3] = {0, 0, 0};  // cells per axis
  double origin[3] = {0, 0, 0};
  double spacing = 0.0;
};

void write_binary(const std::filesystem::path& path, const RawHeader& hdr,
                  const Eigen::MatrixXd& values) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open for writing: " + tmp.string());
    out.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(sizeof(double) * values.size()));
    if (!out) throw DomainError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

RawHeader read_header(std::ifstream& in, const char* magic, const std::filesystem::path& path) {
  RawHeader hdr;
  in.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
  if (!in) throw DomainError("truncated snapshot: " + path.string());
  if (std::memcmp(hdr.magic, magic, 8) != 0)
    throw DomainError("bad snapshot magic: " + path.string());
  return hdr;
}

json grid_meta(const Grid& g, Boundary bc, int components) {
  json meta;
  meta["format"] = "sten-snapshot";
  meta["dim"] = g.dim;
  meta["components_per_node"] = components;
  meta["boundary"] = bc == Boundary::kPeriodic ? "periodic" : "dirichlet";
  meta["extents"] = std::vector<int>(g.cells.begin(), g.cells.begin() + g.dim);
  std::vector<double> origin(g.origin.data(), g.origin.data() + g.dim);
  meta["origin"] = origin;
  meta["spacing"] = g.spacing;
  meta["endianness"] = "little";
  meta["value_type"] = "float64";
  meta["layout"] = "node-major, component index fastest";
  return meta;
}

Grid grid_from_header(const RawHeader& hdr) {
  const int dim = static_cast<int>(hdr.dim);
  Vec origin(dim);
  std::array<int, kMaxDim> cells{};
  for (int a = 0; a < dim; ++a) {
    origin[a] = hdr.origin[a];
    cells[a] = static_cast<int>(hdr.extents[a]);
  }
  return Grid::make(dim, origin, hdr.spacing, cells);
}

}  // namespace

void write_field_snapshot(const GridField& f, const std::filesystem::path& base) {
  f.validate();
  RawHeader hdr;
  std::memcpy(hdr.magic, kFieldMagic, 8);
  hdr.dim = static_cast<std::uint32_t>(f.grid.dim);
  hdr.components = static_cast<std::uint32_t>(f.dim_u());
  hdr.boundary = f.boundary == Boundary::kPeriodic ? 1 : 0;
  for (int a = 0; a < f.grid.dim; ++a) {
    hdr.extents[a] = static_cast<std::uint64_t>(f.grid.cells[a]);
    hdr.origin[a] = f.grid.origin[a];
  }
  hdr.spacing = f.grid.spacing;
  std::filesystem::path fld = base;
  fld += ".fld";
  write_binary(fld, hdr, f.values);
  std::filesystem::path meta_path = base;
  meta_path += ".json";
  write_text_atomic(meta_path, grid_meta(f.grid, f.boundary, f.dim_u()).dump(2) + "\n");
}

GridField read_field_snapshot(const std::filesystem::path& base) {
  std::filesystem::path fld = base;
  fld += ".fld";
  std::ifstream in(fld, std::ios::binary);
  if (!in) throw DomainError("cannot open snapshot: " + fld.string());
  RawHeader hdr = read_header(in, kFieldMagic, fld);
  GridField f;
  f.grid = grid_from_header(hdr);
  f.boundary = hdr.boundary == 1 ? Boundary::kPeriodic : Boundary::kDirichlet;
  f.values.resize(hdr.components, f.grid.num_nodes());
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(sizeof(double) * f.values.size()));
  if (!in) throw DomainError("truncated snapshot: " + fld.string());
  f.validate();  // rejects NaN-corrupted data
  return f;
}

void write_tensor_snapshot(const TensorField& t, const std::filesystem::path& base) {
  const int n = t.grid.dim;
  const int upper = n * (n + 1) / 2;
  Eigen::MatrixXd packed(upper, t.grid.num_nodes());
  for (Index node = 0; node < t.grid.num_nodes(); ++node) {
    int k = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) packed(k++, node) = t.entries(i + n * j, node);
  }
  RawHeader hdr;
  std::memcpy(hdr.magic, kTensorMagic, 8);
  hdr.dim = static_cast<std::uint32_t>(n);
  hdr.components = static_cast<std::uint32_t>(upper);
  hdr.boundary = t.boundary == Boundary::kPeriodic ? 1 : 0;
  for (int a = 0; a < n; ++a) {
    hdr.extents[a] = static_cast<std::uint64_t>(t.grid.cells[a]);
    hdr.origin[a] = t.grid.origin[a];
  }
  hdr.spacing = t.grid.spacing;
  std::filesystem::path fld = base;
  fld += ".ten";
  write_binary(fld, hdr, packed);

  json meta = grid_meta(t.grid, t.boundary, upper);
  meta["tensor"] = "symmetric upper triangle, column order (i<=j): (0,0),(0,1),(1,1),...";
  if (t.epsilon) meta["epsilon"] = *t.epsilon;
  std::filesystem::path meta_path = base;
  meta_path += ".json";
  write_text_atomic(meta_path, meta.dump(2) + "\n");
}

TensorField read_tensor_snapshot(const std::filesystem::path& base) {
  std::filesystem::path fld = base;
  fld += ".ten";
  std::ifstream in(fld, std::ios::binary);
  if (!in) throw DomainError("cannot open snapshot: " + fld.string());
  RawHeader hdr = read_header(in, kTensorMagic, fld);
  TensorField t;
  t.grid = grid_from_header(hdr);
  t.boundary = hdr.boundary == 1 ? Boundary::kPeriodic : Boundary::kDirichlet;
  const int n = t.grid.dim;
  const int upper = n * (n + 1) / 2;
  if (static_cast<int>(hdr.components) != upper)
    throw DomainError("tensor snapshot component count mismatch");
  Eigen::MatrixXd packed(upper, t.grid.num_nodes());
  in.read(reinterpret_cast<char*>(packed.data()),
          static_cast<std::streamsize>(sizeof(double) * packed.size()));
  if (!in) throw DomainError("truncated snapshot: " + fld.string());

  std::filesystem::path meta_path = base;
  meta_path += ".json";
  std::ifstream meta_in(meta_path);
  if (meta_in) {
    json meta = json::parse(meta_in, nullptr, /*allow_exceptions=*/false);
    if (!meta.is_discarded() && meta.contains("epsilon"))
      t.epsilon = meta["epsilon"].get<double>();
  }

  t.entries.resize(n * n, t.grid.num_nodes());
  for (Index node = 0; node < t.grid.num_nodes(); ++node) {
    int k = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) {
        t.entries(i + n * j, node) = packed(k, node);
        t.entries(j + n * i, node) = packed(k, node);
        ++k;
      }
  }
  if (!t.entries.allFinite()) throw DomainError("tensor snapshot contains non-finite values");
  return t;
}

void export_csv_slice(const GridField& f, const std::filesystem::path& path,
                      const std::array<int, kMaxDim>& fixed) {
  const Grid& g = f.grid;
  std::vector<int> free_axes;
  for (int a = 0; a < g.dim; ++a) {
    if (fixed[a] < 0)
      free_axes.push_back(a);
    else if (fixed[a] > g.cells[a])
      throw DomainError("slice index out of range");
  }
  if (free_axes.empty() || free_axes.size() > 2)
    throw ConfigError("csv slice must leave one or two axes free");

  std::vector<std::string> header;
  for (int a : free_axes) header.push_back("x" + std::to_string(a + 1));
  for (int c = 0; c < f.dim_u(); ++c) header.push_back("u" + std::to_string(c + 1));
  CsvWriter csv(std::move(header));

  int idx[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a)
    if (fixed[a] >= 0) idx[a] = fixed[a];

  const int n0 = g.nodes_along(free_axes[0]);
  const int n1 = free_axes.size() == 2 ? g.nodes_along(free_axes[1]) : 1;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      idx[free_axes[0]] = i;
      if (free_axes.size() == 2) idx[free_axes[1]] = j;
      const Index node = idx[0] * g.stride(0) + (g.dim > 1 ? idx[1] * g.stride(1) : 0) +
                         (g.dim > 2 ? idx[2] * g.stride(2) : 0);
      std::vector<double> row;
      const Vec pos = g.position(idx[0], idx[1], idx[2]);
      for (int a : free_axes) row.push_back(pos[a]);
      for (int c = 0; c < f.dim_u(); ++c) row.push_back(f.values(c, node));
      csv.row(row);
    }
  csv.save(path);
}

}  // namespace sten
