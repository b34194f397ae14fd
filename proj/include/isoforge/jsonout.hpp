#ifndef ISOFORGE_JSONOUT_HPP
#define ISOFORGE_JSONOUT_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace isoforge {

// Byte-deterministic JSON emitter: callers insert keys in sorted order and all
// floats are rendered with 12 significant digits.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return raw("{"); }
  JsonWriter& end_object() {
    strip_comma();
    return raw("},");
  }
  JsonWriter& begin_array() { return raw("["); }
  JsonWriter& end_array() {
    strip_comma();
    return raw("],");
  }
  JsonWriter& key(const std::string& k) {
    out_ += '"';
    out_ += k;
    out_ += "\":";
    return *this;
  }
  JsonWriter& value(double v) {
    char buf[48];
    if (std::isinf(v))
      std::snprintf(buf, sizeof buf, "\"%sinf\"", v > 0 ? "" : "-");
    else if (std::isnan(v))
      std::snprintf(buf, sizeof buf, "\"nan\"");
    else
      std::snprintf(buf, sizeof buf, "%.12g", v);
    out_ += buf;
    out_ += ',';
    return *this;
  }
  JsonWriter& value(int v) { return value((long long)v); }
  JsonWriter& value(size_t v) { return value((long long)v); }
  JsonWriter& value(long long v) {
    out_ += std::to_string(v);
    out_ += ',';
    return *this;
  }
  JsonWriter& value(bool v) {
    out_ += v ? "true" : "false";
    out_ += ',';
    return *this;
  }
  JsonWriter& value(const std::string& v) {
    out_ += '"';
    for (char c : v) {
      if (c == '"' || c == '\\') out_ += '\\';
      out_ += c;
    }
    out_ += "\",";
    return *this;
  }
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& value(const std::vector<double>& v) {
    begin_array();
    for (double x : v) value(x);
    return end_array();
  }
  std::string str() const {
    std::string s = out_;
    while (!s.empty() && s.back() == ',') s.pop_back();
    return s;
  }

 private:
  JsonWriter& raw(const std::string& s) {
    out_ += s;
    return *this;
  }
  void strip_comma() {
    if (!out_.empty() && out_.back() == ',') out_.pop_back();
  }
  std::string out_;
};

}  // namespace isoforge

#endif
