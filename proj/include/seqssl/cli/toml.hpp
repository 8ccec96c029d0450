#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "seqssl/common.hpp"

namespace seqssl::toml {

// Minimal TOML subset: [section] tables one level deep, bare or quoted keys,
// string/integer/float/boolean scalars and flat arrays, '#' comments. That
// covers experiment config files; nested tables and dates are rejected with
// a line-numbered error.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, int64_t, double, bool, Array> data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_int() const { return std::holds_alternative<int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  const std::string& as_string() const;
  int64_t as_int() const;
  double as_number() const;  // accepts int or float
  bool as_bool() const;
  const Array& as_array() const;
};

// table name ("" for top level) -> key -> value
using Document = std::map<std::string, std::map<std::string, Value>>;

Document parse(const std::string& text);
Document parse_file(const std::string& path);

// "key = value" fragment parser, reused for env and CLI overrides.
Value parse_scalar(const std::string& text);

}  // namespace seqssl::toml
