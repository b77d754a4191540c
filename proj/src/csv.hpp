#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>

namespace vpl::cli {

/// Shortest round-trip decimal formatting.
inline std::string num(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// CSV file whose first line records the resolved configuration.
class CsvFile {
 public:
  CsvFile(const std::string& path, const std::string& config_line,
          const std::string& header) {
    os_.open(path);
    if (!os_) throw std::runtime_error("cannot open output file: " + path);
    os_ << "# " << config_line << '\n' << header << '\n';
  }

  void row(const std::string& line) { os_ << line << '\n'; }

  template <typename... T>
  void row_nums(T... vals) {
    bool first = true;
    ((os_ << (first ? (first = false, "") : ",") << num(static_cast<double>(vals))), ...);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

}  // namespace vpl::cli
