#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace deepbarrier {

/// Minimal CSV emitter. Doubles are written with 17 significant digits so
/// files round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> columns);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(const std::string& v);
  /// Ends the current row; throws if the field count is wrong.
  void end_row();

 private:
  void sep();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t field_ = 0;
};

std::string format_double(double v);

}  // namespace deepbarrier
