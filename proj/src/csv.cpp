#include "frheston/csv.hpp"

#include <cmath>
#include <cstdio>

namespace frh::csv {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Writer::header(std::initializer_list<std::string_view> cols) {
  for (auto c : cols) field(c);
  end_row();
}

void Writer::sep() {
  if (row_started_) os_ << ',';
  row_started_ = true;
}

Writer& Writer::field(std::string_view s) {
  sep();
  os_ << s;
  return *this;
}

Writer& Writer::field(double v) {
  sep();
  os_ << num(v);
  return *this;
}

Writer& Writer::field(long long v) {
  sep();
  os_ << v;
  return *this;
}

Writer& Writer::field(unsigned long long v) {
  sep();
  os_ << v;
  return *this;
}

void Writer::end_row() {
  os_ << '\n';
  row_started_ = false;
}

}  // namespace frh::csv
