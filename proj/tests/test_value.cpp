#include <catch2/catch_amalgamated.hpp>

#include "skillcraft/value.hpp"

using namespace skillcraft;

TEST_CASE("canonical serialization of scalars") {
  CHECK(serialize(Value()) == "null");
  CHECK(serialize(Value(true)) == "true");
  CHECK(serialize(Value(false)) == "false");
  CHECK(serialize(Value(0.0)) == "0");
  CHECK(serialize(Value(-0.0)) == "0");
  CHECK(serialize(Value(3.0)) == "3");
  CHECK(serialize(Value(-17.0)) == "-17");
  CHECK(serialize(Value(0.5)) == "0.5");
  CHECK(serialize(Value(9007199254740992.0)) == "9007199254740992");  // 2^53
  CHECK(serialize(Value("hi")) == "\"hi\"");
  CHECK(serialize(Value("a\"b\\c\nd")) == "\"a\\\"b\\\\c\\nd\"");
}

TEST_CASE("records preserve insertion order") {
  Record r;
  r.set("zebra", Value(1));
  r.set("apple", Value(2));
  r.set("mango", Value(3));
  CHECK(serialize(Value(r)) == "{\"zebra\": 1, \"apple\": 2, \"mango\": 3}");

  r.set("apple", Value(9));  // update in place keeps position
  CHECK(serialize(Value(r)) == "{\"zebra\": 1, \"apple\": 9, \"mango\": 3}");
}

TEST_CASE("nested structures") {
  Value v(Record{{"skills", Value(Record{})}});
  CHECK(serialize(v) == "{\"skills\": {}}");

  Value l(Value::List{Value(1), Value("two"), Value()});
  CHECK(serialize(l) == "[1, \"two\", null]");
}

TEST_CASE("json parse round-trips canonical form") {
  const std::string text = "{\"a\": [1, 2.5, \"x\"], \"b\": {\"c\": null, \"d\": true}}";
  auto v = parse_json(text);
  REQUIRE(v.has_value());
  CHECK(serialize(*v) == text);
}

TEST_CASE("json parse accepts non-canonical spacing and preserves key order") {
  auto v = parse_json("{\"z\":1,\"a\":2}");
  REQUIRE(v.has_value());
  CHECK(serialize(*v) == "{\"z\": 1, \"a\": 2}");
}

TEST_CASE("json parse rejects malformed input") {
  CHECK_FALSE(parse_json("{oops").has_value());
  CHECK_FALSE(parse_json("").has_value());
}

TEST_CASE("value equality is deep") {
  auto a = parse_json("{\"x\": [1, {\"y\": 2}]}");
  auto b = parse_json("{\"x\": [1, {\"y\": 2}]}");
  auto c = parse_json("{\"x\": [1, {\"y\": 3}]}");
  REQUIRE(a);
  CHECK(*a == *b);
  CHECK(*a != *c);
}

TEST_CASE("serialized_size counts UTF-8 bytes of the canonical form") {
  Value v(Record{{"k", Value("\xc3\xa9")}});  // é, two bytes
  CHECK(serialized_size(v) == serialize(v).size());
  CHECK(serialize(v) == "{\"k\": \"\xc3\xa9\"}");
}
