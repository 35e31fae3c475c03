#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "edlab/errors.hpp"
#include "edlab/format.hpp"
#include "edlab/time_series.hpp"

namespace edlab {

/// Two-column CSV with an arbitrary header pair. LF line endings on
/// every platform; values printed with shortest round-trip precision.
inline void emit_two_column_csv(const std::string& col_a, const std::string& col_b,
                                const std::vector<double>& a, const std::vector<double>& b,
                                const std::filesystem::path& path) {
  if (a.empty()) throw OutputError("refusing to write empty CSV to '" + path.string() + "'");
  if (a.size() != b.size())
    throw OutputError("column length mismatch writing '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out << col_a << ',' << col_b << '\n';
  for (std::size_t i = 0; i < a.size(); ++i)
    out << format_double(a[i]) << ',' << format_double(b[i]) << '\n';
  out.flush();
  if (!out) throw OutputError("write failed for '" + path.string() + "'");
}

inline void emit_csv(const TimeSeries& series, const std::filesystem::path& path) {
  emit_two_column_csv("t", "value", series.times, series.values, path);
}

}  // namespace edlab
