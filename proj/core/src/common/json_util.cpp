#include "common/json_util.hpp"

#include <algorithm>
#include <cmath>

namespace gradekit::detail {

void locate(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& column) {
  line = 1;
  column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 0;
    std::size_t column = 0;
    locate(text, e.byte, line, column);
    std::string reason = e.what();
    // nlohmann prefixes "[json.exception.parse_error.101] parse error at line L, column C: "
    if (const auto colon = reason.find(": "); colon != std::string::npos) reason = reason.substr(colon + 2);
    throw ParseError(what + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + reason, line,
                     column);
  }
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string string_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::string optional_string_field(const Json& obj, const char* key, const std::string& where,
                                  const std::string& fallback) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw ParseError(where + ": field \"" + key + "\" must be a string");
  return it->get<std::string>();
}

long long integer_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<long long>(d);
  }
  throw ParseError(where + ": field \"" + key + "\" must be an integer");
}

double number_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number()) throw ParseError(where + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

bool bool_field(const Json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(where + ": field \"" + key + "\" must be true or false");
  return it->get<bool>();
}

}  // namespace gradekit::detail
