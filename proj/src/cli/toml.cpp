#include "seqssl/cli/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace seqssl::toml {

const std::string& Value::as_string() const {
  require(is_string(), "toml: expected a string value");
  return std::get<std::string>(data);
}

int64_t Value::as_int() const {
  require(is_int(), "toml: expected an integer value");
  return std::get<int64_t>(data);
}

double Value::as_number() const {
  if (is_int()) return static_cast<double>(std::get<int64_t>(data));
  require(is_float(), "toml: expected a number");
  return std::get<double>(data);
}

bool Value::as_bool() const {
  require(is_bool(), "toml: expected a boolean value");
  return std::get<bool>(data);
}

const Array& Value::as_array() const {
  require(is_array(), "toml: expected an array value");
  return std::get<Array>(data);
}

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("toml: line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }

  void skip_ws_comment_to_eol() {
    skip_ws();
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos;
    }
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    take();
  }
};

std::string parse_basic_string(Cursor& c) {
  std::string out;
  c.take();  // opening quote
  while (true) {
    if (c.eof()) c.fail("unterminated string");
    char ch = c.take();
    if (ch == '"') break;
    if (ch == '\\') {
      if (c.eof()) c.fail("unterminated escape");
      const char esc = c.take();
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: c.fail(std::string("unsupported escape '\\") + esc + "'");
      }
    } else {
      out += ch;
    }
  }
  return out;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  c.take();  // '['
  Array items;
  while (true) {
    c.skip_ws();
    while (c.peek() == '\n') {
      c.take();
      c.skip_ws();
    }
    if (c.peek() == ']') {
      c.take();
      break;
    }
    items.push_back(parse_value(c));
    c.skip_ws();
    while (c.peek() == '\n') {
      c.take();
      c.skip_ws();
    }
    if (c.peek() == ',') {
      c.take();
    } else if (c.peek() != ']') {
      c.fail("expected ',' or ']' in array");
    }
  }
  return Value{items};
}

Value parse_scalar_token(Cursor& c) {
  std::string tok;
  while (!c.eof()) {
    const char ch = c.peek();
    if (ch == '\n' || ch == ',' || ch == ']' || ch == '#' || ch == ' ' || ch == '\t') break;
    tok += c.take();
  }
  if (tok.empty()) c.fail("empty value");
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};

  bool looks_float = false;
  for (char ch : tok) {
    if (ch == '.' || ch == 'e' || ch == 'E') looks_float = true;
  }
  if (!looks_float) {
    int64_t iv = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
    if (res.ec == std::errc{} && res.ptr == tok.data() + tok.size()) return Value{iv};
  }
  try {
    size_t used = 0;
    const double dv = std::stod(tok, &used);
    if (used == tok.size()) return Value{dv};
  } catch (...) {
  }
  c.fail("cannot parse value '" + tok + "'");
}

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.peek() == '"') return Value{parse_basic_string(c)};
  if (c.peek() == '[') return parse_array(c);
  return parse_scalar_token(c);
}

std::string parse_key(Cursor& c) {
  c.skip_ws();
  if (c.peek() == '"') return parse_basic_string(c);
  std::string key;
  while (!c.eof()) {
    const char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') {
      key += c.take();
    } else {
      break;
    }
  }
  if (key.empty()) c.fail("expected a key");
  return key;
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  Cursor c{text};
  std::string table;

  while (!c.eof()) {
    c.skip_ws();
    if (c.eof()) break;
    const char ch = c.peek();
    if (ch == '\n') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      c.take();
      if (c.peek() == '[') c.fail("arrays of tables are not supported");
      table = parse_key(c);
      c.skip_ws();
      if (c.peek() == '.') c.fail("nested tables are not supported");
      if (c.peek() != ']') c.fail("expected ']'");
      c.take();
      c.skip_ws_comment_to_eol();
      continue;
    }
    const std::string key = parse_key(c);
    c.skip_ws();
    if (c.peek() == '.') c.fail("dotted keys are not supported");
    if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.take();
    Value v = parse_value(c);
    c.skip_ws_comment_to_eol();
    require(doc[table].emplace(key, std::move(v)).second,
            "toml: duplicate key '" + key + "' in table '" + table + "'");
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Value parse_scalar(const std::string& text) {
  Cursor c{text};
  Value v = parse_value(c);
  c.skip_ws();
  require(c.eof() || c.peek() == '\n', "toml: trailing characters in value '" + text + "'");
  return v;
}

}  // namespace seqssl::toml
