#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace frh::csv {

// Decimal, 17 significant digits: round-trips every binary64 value.
std::string num(double v);

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<std::string_view> cols);
  Writer& field(std::string_view s);
  Writer& field(double v);
  Writer& field(long long v);
  Writer& field(unsigned long long v);
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  Writer& field(unsigned v) { return field(static_cast<unsigned long long>(v)); }
  Writer& field(long v) { return field(static_cast<long long>(v)); }
  Writer& field(unsigned long v) { return field(static_cast<unsigned long long>(v)); }
  void end_row();

 private:
  void sep();
  std::ostream& os_;
  bool row_started_ = false;
};

}  // namespace frh::csv
