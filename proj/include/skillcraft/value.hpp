// Dynamic value model shared by the script interpreter, the simulated
// backends and every file/wire format: null, bool, number (one 64-bit float
// type, integer-exact up to 2^53), UTF-8 string, list, and insertion-ordered
// record. Canonical serialization is byte-stable so that payload sizes,
// caches and traces reproduce exactly.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace skillcraft {

class Value;

// Ordered string-keyed map. Lookups are linear; records in this domain are
// small (a handful of fields per tool payload).
class Record {
 public:
  using Item = std::pair<std::string, Value>;

  Record() = default;
  Record(std::initializer_list<Item> items) : items_(items) {}

  const Value* find(std::string_view key) const;
  Value* find(std::string_view key);
  // Updates in place if the key exists, appends otherwise.
  void set(std::string_view key, Value v);
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  const std::vector<Item>& items() const { return items_; }
  std::vector<Item>& items() { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  bool operator==(const Record& o) const;

 private:
  std::vector<Item> items_;
};

class Value {
 public:
  using List = std::vector<Value>;

  Value() : v_(nullptr) {}
  Value(std::nullptr_t) : v_(nullptr) {}
  Value(bool b) : v_(b) {}
  Value(double d) : v_(d) {}
  Value(int i) : v_(static_cast<double>(i)) {}
  Value(long long i) : v_(static_cast<double>(i)) {}
  Value(std::size_t i) : v_(static_cast<double>(i)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(std::string_view s) : v_(std::string(s)) {}
  Value(List l) : v_(std::move(l)) {}
  Value(Record r) : v_(std::move(r)) {}

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_list() const { return std::holds_alternative<List>(v_); }
  bool is_record() const { return std::holds_alternative<Record>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  double as_number() const { return std::get<double>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const List& as_list() const { return std::get<List>(v_); }
  List& as_list() { return std::get<List>(v_); }
  const Record& as_record() const { return std::get<Record>(v_); }
  Record& as_record() { return std::get<Record>(v_); }

  const char* type_name() const {
    switch (v_.index()) {
      case 0: return "null";
      case 1: return "boolean";
      case 2: return "number";
      case 3: return "string";
      case 4: return "list";
      default: return "record";
    }
  }

  bool operator==(const Value& o) const { return v_ == o.v_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

 private:
  std::variant<std::nullptr_t, bool, double, std::string, List, Record> v_;
};

inline const Value* Record::find(std::string_view key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

inline Value* Record::find(std::string_view key) {
  for (auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

inline void Record::set(std::string_view key, Value v) {
  if (Value* slot = find(key)) {
    *slot = std::move(v);
  } else {
    items_.emplace_back(std::string(key), std::move(v));
  }
}

inline bool Record::operator==(const Record& o) const { return items_ == o.items_; }

// ---------------------------------------------------------------------------
// Canonical serialization

namespace detail {

inline bool integer_exact(double d) {
  return std::isfinite(d) && d == std::trunc(d) && std::fabs(d) <= 9007199254740992.0;  // 2^53
}

inline void append_number(std::string& out, double d) {
  if (d == 0.0) {  // normalizes -0
    out += '0';
    return;
  }
  if (integer_exact(d)) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(d));
    out.append(buf, r.ptr);
    return;
  }
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, d);  // shortest round-trip form
  out.append(buf, r.ptr);
}

inline void append_quoted(std::string& out, std::string_view s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

}  // namespace detail

inline void serialize_value(const Value& v, std::string& out) {
  if (v.is_null()) {
    out += "null";
  } else if (v.is_bool()) {
    out += v.as_bool() ? "true" : "false";
  } else if (v.is_number()) {
    detail::append_number(out, v.as_number());
  } else if (v.is_string()) {
    detail::append_quoted(out, v.as_string());
  } else if (v.is_list()) {
    out += '[';
    bool first = true;
    for (const auto& item : v.as_list()) {
      if (!first) out += ", ";
      first = false;
      serialize_value(item, out);
    }
    out += ']';
  } else {
    out += '{';
    bool first = true;
    for (const auto& [k, item] : v.as_record().items()) {
      if (!first) out += ", ";
      first = false;
      detail::append_quoted(out, k);
      out += ": ";
      serialize_value(item, out);
    }
    out += '}';
  }
}

inline std::string serialize(const Value& v) {
  std::string out;
  serialize_value(v, out);
  return out;
}

// Byte length of the canonical form; this is the unit all payload-size and
// token accounting is based on.
inline std::size_t serialized_size(const Value& v) { return serialize(v).size(); }

// ---------------------------------------------------------------------------
// JSON parsing (accepts any standard JSON, not just the canonical subset)

namespace detail {

inline Value from_ordered_json(const nlohmann::ordered_json& j) {
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::null: return Value();
    case nlohmann::ordered_json::value_t::boolean: return Value(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
      return Value(static_cast<double>(j.get<std::int64_t>()));
    case nlohmann::ordered_json::value_t::number_unsigned:
      return Value(static_cast<double>(j.get<std::uint64_t>()));
    case nlohmann::ordered_json::value_t::number_float: return Value(j.get<double>());
    case nlohmann::ordered_json::value_t::string: return Value(j.get<std::string>());
    case nlohmann::ordered_json::value_t::array: {
      Value::List items;
      items.reserve(j.size());
      for (const auto& item : j) items.push_back(from_ordered_json(item));
      return Value(std::move(items));
    }
    case nlohmann::ordered_json::value_t::object: {
      Record rec;
      for (auto it = j.begin(); it != j.end(); ++it)
        rec.items().emplace_back(it.key(), from_ordered_json(it.value()));
      return Value(std::move(rec));
    }
    default: return Value();
  }
}

}  // namespace detail

inline std::optional<Value> parse_json(std::string_view text) {
  auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return detail::from_ordered_json(j);
}

inline Value parse_json_or_throw(std::string_view text, const std::string& what) {
  auto v = parse_json(text);
  if (!v) throw std::runtime_error("invalid JSON in " + what);
  return *v;
}

}  // namespace skillcraft
