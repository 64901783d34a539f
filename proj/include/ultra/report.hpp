#pragma once

// Deterministic text reports and CSV emission. Reports are ordered sections
// of key-value pairs and tables rendered with fixed key order and 12
// significant digits; two runs with identical inputs produce byte-identical
// output. CSV uses 17 significant digits (lossless binary64 round-trip),
// '.' decimal point, a header row, and LF line endings.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace ultra {

inline std::string format_sig(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

class Report {
 public:
  void section(const std::string& name) { lines_.push_back("[" + name + "]"); }
  void kv(const std::string& key, const std::string& value) {
    lines_.push_back(key + " = " + value);
  }
  void kv(const std::string& key, const char* value) {
    lines_.push_back(key + " = " + std::string(value));
  }
  void kv(const std::string& key, double value) {
    lines_.push_back(key + " = " + format_sig(value, 12));
  }
  void kv(const std::string& key, int value) {
    lines_.push_back(key + " = " + std::to_string(value));
  }
  void kv(const std::string& key, bool value) {
    lines_.push_back(key + " = " + (value ? "yes" : "no"));
  }

  void table(const std::string& name, const std::vector<std::string>& columns) {
    std::string head = "table " + name + ":";
    for (std::size_t i = 0; i < columns.size(); ++i)
      head += (i ? ", " : " ") + columns[i];
    lines_.push_back(head);
  }
  void row(const std::vector<std::string>& cells) {
    std::string line = " ";
    for (const auto& c : cells) line += " " + c;
    lines_.push_back(line);
  }
  void row(const std::vector<double>& cells) {
    std::string line = " ";
    for (double c : cells) line += " " + format_sig(c, 12);
    lines_.push_back(line);
  }
  void blank() { lines_.push_back(""); }

  void render(std::ostream& out) const {
    for (const auto& l : lines_) out << l << "\n";
  }

 private:
  std::vector<std::string> lines_;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << format_sig(cells[i], 17);
    out_ << "\n";
  }

 private:
  std::ostream& out_;
};

}  // namespace ultra
