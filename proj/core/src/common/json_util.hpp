#pragma once

#include <json.hpp>
#include <string>

#include "gradekit/error.hpp"

namespace gradekit::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Parses `text`; syntax errors become ParseError("<what>: ...", line, column).
Json parse_json(const std::string& text, const std::string& what);

/// Line/column (1-based) of a 1-based byte offset into text.
void locate(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& column);

/// Typed field access with messages naming `where` (e.g. "questions[3]").
const Json& field(const Json& obj, const char* key, const std::string& where);
std::string string_field(const Json& obj, const char* key, const std::string& where);
std::string optional_string_field(const Json& obj, const char* key, const std::string& where,
                                  const std::string& fallback = {});
long long integer_field(const Json& obj, const char* key, const std::string& where);
double number_field(const Json& obj, const char* key, const std::string& where);
bool bool_field(const Json& obj, const char* key, const std::string& where, bool fallback);

}  // namespace gradekit::detail
