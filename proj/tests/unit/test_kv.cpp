#include "ccsp/error.hpp"
#include "ccsp/kv_text.hpp"
#include "doctest.h"

using namespace ccsp;

TEST_SUITE("kv") {
  TEST_CASE("parse and write back") {
    const std::string text =
        "top = 1\n"
        "[run]\n"
        "seed = 7\n"
        "name = a b c\n"
        "[model]\n"
        "dense_dims = 16,16,8,4\n";
    const auto doc = parse_kv(text, "cfg");
    REQUIRE(doc.sections.size() == 3);
    CHECK(doc.find_section("")->get("top") == "1");
    CHECK(doc.find_section("run")->get("name") == "a b c");
    CHECK(doc.find_section("model")->require("dense_dims", "cfg") == "16,16,8,4");
    const auto written = doc.to_string();
    CHECK(parse_kv(written, "again").to_string() == written);
    CHECK(parse_kv(written, "again").find_section("run")->get("seed") == "7");
    CHECK(doc.find_section("absent") == nullptr);
  }

  TEST_CASE("comments and whitespace") {
    const auto doc = parse_kv("# header\n\n[ s ]\n  key   =   value  \n# trailing\n", "cfg");
    const auto* s = doc.find_section("s");
    REQUIRE(s != nullptr);
    CHECK(s->get("key") == "value");
    CHECK_FALSE(s->get("other").has_value());
  }

  TEST_CASE("malformed input reports origin and line") {
    try {
      (void)parse_kv("[ok]\na = 1\nno equals sign\n", "conf.txt");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::data);
      CHECK(std::string(e.what()).find("conf.txt:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_kv("[unterminated\n", "x"), Error);
    const auto doc = parse_kv("[s]\n", "x");
    CHECK_THROWS_AS(doc.find_section("s")->require("k", "x"), Error);
  }

  TEST_CASE("scalar parsers") {
    CHECK(parse_double("2.5e-3", "x") == 0.0025);
    CHECK(parse_int("-42", "x") == -42);
    CHECK(parse_bool("true", "x"));
    CHECK_FALSE(parse_bool("false", "x"));
    CHECK_THROWS_AS(parse_double("1.0abc", "x"), Error);
    CHECK_THROWS_AS(parse_int("3.5", "x"), Error);
    CHECK_THROWS_AS(parse_bool("maybe", "x"), Error);
    CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(trim("  x y \t") == "x y");
  }
}
