#include "nclab/report.hpp"

#include <cstdio>
#include <fstream>

#include "nclab/errors.hpp"

namespace nclab::report {

std::string format_double(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  std::string s(buf);
  // '.' fractional, 'e' exponent, 'n'/'i' cover nan and inf spellings
  for (char c : s)
    if (c == '.' || c == 'e' || c == 'n' || c == 'i') return s;
  return s + ".0";
}

namespace {

void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (char raw : s) {
    const auto c = static_cast<unsigned char>(raw);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char b[8];
          std::snprintf(b, sizeof b, "\\u%04x", c);
          out += b;
        } else {
          out += raw;
        }
    }
  }
  out += '"';
}

void pad(std::string& out, int indent) { out.append(static_cast<std::size_t>(indent), ' '); }

}  // namespace

Json Json::boolean(bool v) {
  Json j;
  j.kind_ = Kind::Bool;
  j.b_ = v;
  return j;
}

Json Json::integer(std::int64_t v) {
  Json j;
  j.kind_ = Kind::Int;
  j.i_ = v;
  return j;
}

Json Json::unsigned_integer(std::uint64_t v) {
  Json j;
  j.kind_ = Kind::UInt;
  j.u_ = v;
  return j;
}

Json Json::number(double v) {
  Json j;
  j.kind_ = Kind::Double;
  j.d_ = v;
  return j;
}

Json Json::string(std::string v) {
  Json j;
  j.kind_ = Kind::String;
  j.s_ = std::move(v);
  return j;
}

Json Json::array() {
  Json j;
  j.kind_ = Kind::Array;
  return j;
}

Json Json::object() {
  Json j;
  j.kind_ = Kind::Object;
  return j;
}

Json& Json::push(Json v) {
  if (kind_ != Kind::Array) throw InvalidInputError("json push target is not an array");
  items_.push_back(std::move(v));
  return *this;
}

Json& Json::set(const std::string& key, Json v) {
  if (kind_ != Kind::Object) throw InvalidInputError("json set target is not an object");
  fields_.emplace_back(key, std::move(v));
  return *this;
}

void Json::write(std::string& out, int indent) const {
  switch (kind_) {
    case Kind::Null:
      out += "null";
      return;
    case Kind::Bool:
      out += b_ ? "true" : "false";
      return;
    case Kind::Int:
      out += std::to_string(i_);
      return;
    case Kind::UInt:
      out += std::to_string(u_);
      return;
    case Kind::Double:
      out += format_double(d_, json_digits);
      return;
    case Kind::String:
      escape_into(out, s_);
      return;
    case Kind::Array: {
      if (items_.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        pad(out, indent + 2);
        items_[i].write(out, indent + 2);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      pad(out, indent);
      out += ']';
      return;
    }
    case Kind::Object: {
      if (fields_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (std::size_t i = 0; i < fields_.size(); ++i) {
        pad(out, indent + 2);
        escape_into(out, fields_[i].first);
        out += ": ";
        fields_[i].second.write(out, indent + 2);
        if (i + 1 < fields_.size()) out += ',';
        out += '\n';
      }
      pad(out, indent);
      out += '}';
      return;
    }
  }
}

std::string Json::dump() const {
  std::string out;
  write(out, 0);
  out += '\n';
  return out;
}

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InvalidInputError("csv needs at least one column");
}

Csv& Csv::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw InvalidInputError("csv row arity does not match the header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string Csv::cell(double v) { return format_double(v, csv_digits); }

std::string Csv::cell(std::int64_t v) { return std::to_string(v); }

namespace {

void append_csv_field(std::string& out, const std::string& field) {
  const bool needs_quotes =
      field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_csv_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    append_csv_field(out, cells[i]);
  }
  out += '\n';
}

}  // namespace

std::string Csv::dump() const {
  std::string out;
  append_csv_line(out, header_);
  for (const auto& row : rows_) append_csv_line(out, row);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (f.fail()) throw IoError("write failed: " + path);
}

}  // namespace nclab::report
