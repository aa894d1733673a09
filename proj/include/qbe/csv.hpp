#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qbe/errors.hpp"

namespace qbe {

/// Minimal CSV writer. Floating-point cells are printed with 17 significant
/// digits so reruns can be compared byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw validation_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void row_nums(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(num(v));
    row(s);
  }

 private:
  std::ofstream out_;
};

}  // namespace qbe
