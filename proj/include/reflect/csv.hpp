#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <reflect/errors.hpp>
#include <reflect/path.hpp>
#include <reflect/routing.hpp>

namespace reflect::csv {

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && !field.empty();
}

inline double parse_double_or_throw(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(field, v)) {
    std::ostringstream os;
    os << "csv: line " << line_no << ": cannot parse number from '" << field << "'";
    throw ValidationError(os.str());
  }
  return v;
}

/// Reads all nonempty lines as rows of comma-separated fields. A first line
/// whose leading field is not a number is treated as a header and returned
/// separately.
struct RawTable {
  std::vector<std::string> header;  // empty if none
  std::vector<std::vector<double>> rows;
  std::size_t first_data_line = 1;
};

inline RawTable read_table(std::istream& in) {
  RawTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    auto fields = split_fields(stripped);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!parse_double(fields[0], probe)) {
        t.header = std::move(fields);
        t.first_data_line = line_no + 1;
        continue;
      }
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double_or_throw(f, line_no));
    if (!t.rows.empty() && row.size() != t.rows.front().size()) {
      std::ostringstream os;
      os << "csv: line " << line_no << ": expected " << t.rows.front().size() << " fields, got "
         << row.size();
      throw ValidationError(os.str());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace detail

/// Path file: header "t,x1,...,xn", one row per grid point.
inline void write_path(std::ostream& out, const VectorPath& X) {
  out << 't';
  for (int i = 1; i <= X.dim(); ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t k = 0; k < X.points(); ++k) {
    out << format_double(X.grid()[k]);
    for (int i = 0; i < X.dim(); ++i) out << ',' << format_double(X.value(k, i));
    out << '\n';
  }
}

inline VectorPath read_path(std::istream& in) {
  const auto t = detail::read_table(in);
  if (t.rows.empty()) throw ValidationError("csv: path file has no data rows");
  const std::size_t cols = t.rows.front().size();
  if (cols < 2) throw ValidationError("csv: path file needs a time column plus at least one coordinate");
  std::vector<double> times;
  times.reserve(t.rows.size());
  for (const auto& r : t.rows) times.push_back(r[0]);
  auto grid = std::make_shared<const TimeGrid>(std::move(times));
  PathMatrix values(t.rows.size(), cols - 1);
  for (std::size_t k = 0; k < t.rows.size(); ++k)
    for (std::size_t i = 1; i < cols; ++i) values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - 1)) = t.rows[k][i];
  return VectorPath(std::move(grid), std::move(values));
}

/// Solution file: header "t,w1,...,wn,l1,...,ln".
inline void write_solution(std::ostream& out, const VectorPath& W, const VectorPath& L) {
  if (W.dim() != L.dim() || W.points() != L.points())
    throw ValidationError("csv: W and L must share shape");
  out << 't';
  for (int i = 1; i <= W.dim(); ++i) out << ",w" << i;
  for (int i = 1; i <= W.dim(); ++i) out << ",l" << i;
  out << '\n';
  for (std::size_t k = 0; k < W.points(); ++k) {
    out << format_double(W.grid()[k]);
    for (int i = 0; i < W.dim(); ++i) out << ',' << format_double(W.value(k, i));
    for (int i = 0; i < L.dim(); ++i) out << ',' << format_double(L.value(k, i));
    out << '\n';
  }
}

struct SolutionPaths {
  VectorPath W;
  VectorPath L;
};

inline SolutionPaths read_solution(std::istream& in) {
  const auto t = detail::read_table(in);
  if (t.rows.empty()) throw ValidationError("csv: solution file has no data rows");
  const std::size_t cols = t.rows.front().size();
  if (cols < 3 || (cols - 1) % 2 != 0)
    throw ValidationError("csv: solution file needs columns t, w1..wn, l1..ln");
  const std::size_t n = (cols - 1) / 2;
  std::vector<double> times;
  times.reserve(t.rows.size());
  for (const auto& r : t.rows) times.push_back(r[0]);
  auto grid = std::make_shared<const TimeGrid>(std::move(times));
  PathMatrix Wv(t.rows.size(), n), Lv(t.rows.size(), n);
  for (std::size_t k = 0; k < t.rows.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      Wv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = t.rows[k][1 + i];
      Lv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = t.rows[k][1 + n + i];
    }
  return SolutionPaths{VectorPath(grid, std::move(Wv)), VectorPath(grid, std::move(Lv))};
}

/// Square matrix as bare comma-separated rows (optional header ignored).
inline void write_matrix(std::ostream& out, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

inline Matrix read_matrix(std::istream& in) {
  const auto t = detail::read_table(in);
  if (t.rows.empty()) throw ValidationError("csv: matrix file has no data rows");
  const std::size_t n = t.rows.size();
  if (t.rows.front().size() != n)
    throw ValidationError("csv: matrix must be square (rows == columns)");
  Matrix M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
  return M;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace reflect::csv
