#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

// Byte-stable emission of result files. All floats go through one
// fixed-significant-digit formatter and all writers end lines with LF,
// so identical resolved configurations produce identical bytes.
namespace nclab::report {

inline constexpr int json_digits = 17;  // round-trips any double
inline constexpr int csv_digits = 9;    // plot-ready, keeps files lean

// %.*g, then a ".0" tail when the text would otherwise read as an integer,
// so a field stays recognizably floating point ("2" becomes "2.0").
std::string format_double(double value, int digits);

// Minimal JSON document builder. Object keys keep insertion order; dump()
// is pretty-printed with two-space indents and a trailing newline.
class Json {
 public:
  Json() = default;  // null

  static Json boolean(bool v);
  static Json integer(std::int64_t v);
  static Json unsigned_integer(std::uint64_t v);
  static Json number(double v);
  static Json string(std::string v);
  static Json array();
  static Json object();

  // array append; returns *this for chaining
  Json& push(Json v);
  Json& push(double v) { return push(number(v)); }
  Json& push(const std::string& v) { return push(string(v)); }

  // object field append, insertion order kept
  Json& set(const std::string& key, Json v);
  Json& set(const std::string& key, bool v) { return set(key, boolean(v)); }
  Json& set(const std::string& key, int v) {
    return set(key, integer(static_cast<std::int64_t>(v)));
  }
  Json& set(const std::string& key, std::int64_t v) { return set(key, integer(v)); }
  Json& set(const std::string& key, std::uint64_t v) {
    return set(key, unsigned_integer(v));
  }
  Json& set(const std::string& key, double v) { return set(key, number(v)); }
  Json& set(const std::string& key, const char* v) {
    return set(key, string(std::string(v)));
  }
  Json& set(const std::string& key, const std::string& v) {
    return set(key, string(v));
  }

  std::string dump() const;

 private:
  enum class Kind { Null, Bool, Int, UInt, Double, String, Array, Object };

  Kind kind_ = Kind::Null;
  bool b_ = false;
  std::int64_t i_ = 0;
  std::uint64_t u_ = 0;
  double d_ = 0.0;
  std::string s_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> fields_;

  void write(std::string& out, int indent) const;
};

// CSV table with a fixed header. Cells holding a comma, quote, or newline
// are quoted; everything this artifact emits is plain, so quoting is a
// safety net rather than a feature.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  Csv& add_row(std::vector<std::string> cells);  // arity must match header

  std::string dump() const;

  static std::string cell(double v);
  static std::string cell(std::int64_t v);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Binary-mode whole-file write (keeps LF endings everywhere).
// Throws IoError when the path cannot be created or written.
void write_file(const std::string& path, const std::string& content);

}  // namespace nclab::report
