#include "deepbarrier/csv.hpp"

#include "deepbarrier/errors.hpp"

#include <cmath>
#include <cstdio>

namespace deepbarrier {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns) : out_(out), columns_(columns.size()) {
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::sep() {
  if (field_ >= columns_) throw ValidationError("too many CSV fields in row");
  if (field_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (field_ != columns_) throw ValidationError("CSV row has the wrong number of fields");
  out_ << '\n';
  field_ = 0;
}

}  // namespace deepbarrier
