#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pairlearn/common.hpp"
#include "pairlearn/kernels.hpp"

namespace pairlearn::io {

using kernels::KernelMatrix;
using kernels::LabelMatrix;

enum class MatrixKind { label, kernel, feature };

/// A parsed CSV matrix: row ids, column ids, values. The format is a
/// mandatory header whose first cell is blank or "id" and whose remaining
/// cells are column ids; each row starts with its row id. Comma separated,
/// '.' decimal point, no quoting.
struct CsvMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Matrix values;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_number(const std::string& s, std::size_t row, std::size_t col) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  while (ptr < end && (*ptr == ' ' || *ptr == '\t')) ++ptr;
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::ParseError, "cannot parse number '" + s + "' at row " +
                                    std::to_string(row) + ", column " + std::to_string(col));
  return value;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoFailure, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << content;
  require(out.good(), ErrorCode::IoFailure, "write to '" + path + "' failed");
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// FNV-1a hash of a file's bytes, as provenance checksum.
inline std::string file_checksum(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline CsvMatrix parse_matrix_csv(const std::string& content, const std::string& origin) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(content);
  while (std::getline(in, line)) lines.push_back(line);
  require(!lines.empty(), ErrorCode::ParseError, origin + ": empty file");

  // Strip a UTF-8 BOM if present.
  if (lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    lines[0].erase(0, 3);

  auto header = detail::split_line(lines[0]);
  require(header.size() >= 2, ErrorCode::ParseError, origin + ": header needs at least one column id");
  require(header[0].empty() || header[0] == "id", ErrorCode::ParseError,
          origin + ": first header cell must be blank or 'id', got '" + header[0] + "'");

  CsvMatrix out;
  out.col_ids.assign(header.begin() + 1, header.end());
  const std::size_t ncols = out.col_ids.size();

  std::vector<double> data;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty() || lines[r] == "\r") continue;
    auto fields = detail::split_line(lines[r]);
    require(fields.size() == ncols + 1, ErrorCode::ParseError,
            origin + ": row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                " fields, expected " + std::to_string(ncols + 1));
    out.row_ids.push_back(fields[0]);
    for (std::size_t c = 0; c < ncols; ++c)
      data.push_back(detail::parse_number(fields[c + 1], r + 1, c + 2));
  }
  require(!out.row_ids.empty(), ErrorCode::ParseError, origin + ": no data rows");
  kernels::detail::check_unique(out.row_ids, origin + " row ids");
  kernels::detail::check_unique(out.col_ids, origin + " column ids");

  out.values.resize(static_cast<Index>(out.row_ids.size()), static_cast<Index>(ncols));
  for (Index i = 0; i < out.values.rows(); ++i)
    for (Index j = 0; j < out.values.cols(); ++j)
      out.values(i, j) = data[static_cast<std::size_t>(i) * ncols + static_cast<std::size_t>(j)];
  require_finite(out.values, origin);
  return out;
}

/// Read a matrix CSV. Kernel kind additionally requires matching row and
/// column ids and symmetry within tolerance; the matrix is symmetrized. The
/// PSD check happens on the kernel's (single) eigendecomposition.
inline CsvMatrix read_matrix_csv(const std::string& path, MatrixKind kind) {
  CsvMatrix m = parse_matrix_csv(detail::read_file(path), path);
  if (kind == MatrixKind::kernel) {
    require(m.row_ids == m.col_ids, ErrorCode::NonSquareKernel,
            path + ": kernel row ids must equal column ids in the same order");
    KernelMatrix k = kernels::make_kernel_matrix(m.row_ids, m.values);  // symmetrize + checks
    m.values = k.gram;
  }
  return m;
}

inline KernelMatrix read_kernel_csv(const std::string& path) {
  CsvMatrix m = read_matrix_csv(path, MatrixKind::kernel);
  return kernels::make_kernel_matrix(std::move(m.row_ids), std::move(m.values));
}

inline LabelMatrix read_label_csv(const std::string& path) {
  CsvMatrix m = read_matrix_csv(path, MatrixKind::label);
  return kernels::make_label_matrix(std::move(m.row_ids), std::move(m.col_ids),
                                    std::move(m.values));
}

inline std::string matrix_csv_string(const std::vector<std::string>& row_ids,
                                     const std::vector<std::string>& col_ids, const Matrix& m) {
  require(static_cast<Index>(row_ids.size()) == m.rows() &&
              static_cast<Index>(col_ids.size()) == m.cols(),
          ErrorCode::DimensionMismatch, "matrix_csv_string: id counts do not match shape");
  std::string out = "id";
  for (const auto& c : col_ids) out += "," + c;
  out += "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    out += row_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m.cols(); ++j) out += "," + detail::format_number(m(i, j));
    out += "\n";
  }
  return out;
}

inline void write_matrix_csv(const std::string& path, const std::vector<std::string>& row_ids,
                             const std::vector<std::string>& col_ids, const Matrix& m) {
  detail::write_file(path, matrix_csv_string(row_ids, col_ids, m));
}

inline void write_matrix_csv(const std::string& path, const LabelMatrix& y) {
  write_matrix_csv(path, y.instance_ids, y.task_ids, y.values);
}

inline void write_matrix_csv(const std::string& path, const KernelMatrix& k) {
  write_matrix_csv(path, k.ids, k.ids, k.gram);
}

// ---------------------------------------------------------------------------
// Dataset bundle
// ---------------------------------------------------------------------------

struct Provenance {
  std::string path;
  std::string checksum;
};

/// A label matrix with its instance and task kernels permuted into the label
/// id order.
struct DatasetBundle {
  LabelMatrix y;
  KernelMatrix k;
  KernelMatrix g;
  std::vector<Provenance> provenance;
  int dropped_instance_entries = 0;
  int dropped_task_entries = 0;
};

namespace detail {

inline KernelMatrix permute_kernel(const KernelMatrix& k, const std::vector<std::string>& order,
                                   const char* what, int* dropped) {
  std::unordered_map<std::string, Index> pos;
  for (Index i = 0; i < k.size(); ++i) pos.emplace(k.ids[static_cast<std::size_t>(i)], i);
  std::vector<Index> perm;
  perm.reserve(order.size());
  for (const auto& id : order) {
    auto it = pos.find(id);
    require(it != pos.end(), ErrorCode::MissingId,
            std::string(what) + " kernel is missing id '" + id + "'");
    perm.push_back(it->second);
  }
  const Index n = static_cast<Index>(order.size());
  Matrix gram(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      gram(i, j) = k.gram(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  if (dropped) *dropped = static_cast<int>(k.size() - n);
  KernelMatrix out;
  out.ids = order;
  out.gram = std::move(gram);
  return out;
}

}  // namespace detail

/// Permute K and G into Y's id order; extraneous kernel entries are dropped
/// with a count. Idempotent.
inline DatasetBundle align_bundle(LabelMatrix y, const KernelMatrix& k, const KernelMatrix& g) {
  DatasetBundle bundle;
  bundle.k = detail::permute_kernel(k, y.instance_ids, "instance", &bundle.dropped_instance_entries);
  bundle.g = detail::permute_kernel(g, y.task_ids, "task", &bundle.dropped_task_entries);
  bundle.y = std::move(y);
  return bundle;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { json, csv };

struct GridRecord {
  double lambda_d = 0.0;
  double lambda_t = 0.0;
  std::optional<double> lambda;  // null for models without a joint lambda
  double score = 0.0;
};

struct Report {
  std::string model;
  std::string setting;  // "A" | "B" | "C" | "D"
  std::string metric;
  std::vector<GridRecord> grid;
  GridRecord best;
  double timing_seconds = 0.0;
  int m = 0;
  int q = 0;
  std::vector<std::string> provenance;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json record_json(const GridRecord& r) {
  ordered_json j;
  j["lambda_d"] = r.lambda_d;
  j["lambda_t"] = r.lambda_t;
  if (r.lambda)
    j["lambda"] = *r.lambda;
  else
    j["lambda"] = nullptr;
  j["score"] = r.score;
  return j;
}

inline GridRecord record_from_json(const ordered_json& j) {
  GridRecord r;
  r.lambda_d = j.at("lambda_d").get<double>();
  r.lambda_t = j.at("lambda_t").get<double>();
  if (!j.at("lambda").is_null()) r.lambda = j.at("lambda").get<double>();
  r.score = j.at("score").get<double>();
  return r;
}

}  // namespace detail

inline std::string report_json(const Report& r) {
  detail::ordered_json j;
  j["model"] = r.model;
  j["setting"] = r.setting;
  j["metric"] = r.metric;
  j["grid"] = detail::ordered_json::array();
  for (const auto& rec : r.grid) j["grid"].push_back(detail::record_json(rec));
  j["best"] = detail::record_json(r.best);
  j["timing_seconds"] = r.timing_seconds;
  j["dataset"] = {{"m", r.m}, {"q", r.q}, {"provenance", r.provenance}};
  return j.dump(2) + "\n";
}

inline std::string report_csv(const Report& r) {
  std::string out = "lambda_d,lambda_t,lambda,score,best\n";
  auto emit = [&](const GridRecord& rec, bool best) {
    out += detail::format_number(rec.lambda_d) + "," + detail::format_number(rec.lambda_t) + ",";
    if (rec.lambda) out += detail::format_number(*rec.lambda);
    out += "," + detail::format_number(rec.score) + "," + (best ? std::string("1") : std::string("0")) + "\n";
  };
  for (const auto& rec : r.grid) {
    const bool is_best = rec.lambda_d == r.best.lambda_d && rec.lambda_t == r.best.lambda_t &&
                         rec.lambda == r.best.lambda;
    emit(rec, is_best);
  }
  if (r.grid.empty()) emit(r.best, true);
  return out;
}

inline void write_report(const Report& r, const std::string& path, ReportFormat format) {
  detail::write_file(path, format == ReportFormat::json ? report_json(r) : report_csv(r));
}

inline Report parse_report_json(const std::string& content) {
  detail::ordered_json j;
  try {
    j = detail::ordered_json::parse(content);
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, std::string("invalid report JSON: ") + e.what());
  }
  Report r;
  try {
    r.model = j.at("model").get<std::string>();
    r.setting = j.at("setting").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    for (const auto& rec : j.at("grid")) r.grid.push_back(detail::record_from_json(rec));
    r.best = detail::record_from_json(j.at("best"));
    r.timing_seconds = j.at("timing_seconds").get<double>();
    r.m = j.at("dataset").at("m").get<int>();
    r.q = j.at("dataset").at("q").get<int>();
    for (const auto& p : j.at("dataset").at("provenance"))
      r.provenance.push_back(p.get<std::string>());
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, std::string("report JSON missing fields: ") + e.what());
  }
  return r;
}

inline Report read_report(const std::string& path) {
  return parse_report_json(detail::read_file(path));
}

}  // namespace pairlearn::io
