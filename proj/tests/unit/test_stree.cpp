#include <random>
#include <set>

#include "doctest.h"
#include "strla/error.hpp"
#include "strla/stree/json.hpp"
#include "strla/stree/path.hpp"
#include "strla/train/gradcheck.hpp"
#include "support.hpp"

using namespace strla;
using namespace strla::stree;

TEST_CASE("train journey parses into the expected tree") {
  Element e = parse_json(support::kTrainJourney);
  REQUIRE(e.kind == Kind::Object);
  REQUIRE(e.members.size() == 3);
  CHECK(e.members[0].name == "time");
  CHECK(e.members[0].value.kind == Kind::Text);
  CHECK(e.members[0].value.text == "12:43");
  const Element& stops = e.members[1].value;
  REQUIRE(stops.kind == Kind::Array);
  REQUIRE(stops.items.size() == 3);
  CHECK(stops.items[0].text == "Manchester");
  CHECK(stops.items[1].text == "Preston");
  CHECK(stops.items[2].text == "Glasgow");
  const Element& train = e.members[2].value;
  REQUIRE(train.kind == Kind::Object);
  CHECK(train.members[0].name == "carriages");
  CHECK(train.members[0].value.kind == Kind::Number);
  CHECK(train.members[0].value.number == 6.0);
  CHECK(train.members[1].value.kind == Kind::Boolean);
  CHECK(train.members[1].value.boolean == Tribool::False);
  CHECK(e.description.empty());
}

TEST_CASE("scalar documents") {
  CHECK(parse_json("true").boolean == Tribool::True);
  CHECK(parse_json(" null ").boolean == Tribool::Null);
  CHECK(parse_json("-1.5e2").number == -150.0);
  CHECK(parse_json(R"("a\u00e9\n")").text == "a\xc3\xa9\n");
  CHECK(parse_json(R"("\ud83d\ude00")").text == "\xf0\x9f\x98\x80");
}

TEST_CASE("malformed input raises a positioned syntax error") {
  try {
    parse_json("{\"a\": [1, }");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.code() == ErrorCode::Syntax);
    CHECK(e.position() == 10);
  }
  for (const char* bad : {"", "[1,]", "{\"a\" 1}", "01", "1.", "tru", "\"abc", "[1] 2", "{\"a\":1,}", "\"\\x\"",
                          "nan", "[", "\"\t\""})
    CHECK_THROWS_AS(parse_json(bad), SyntaxError);
}

TEST_CASE("duplicate member names are kept in order") {
  Element e = parse_json(R"({"a": 1, "a": 2})");
  REQUIRE(e.members.size() == 2);
  CHECK(e.members[0].value.number == 1.0);
  CHECK(e.members[1].value.number == 2.0);
}

TEST_CASE("serialise and reparse gives a structurally equal tree") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Element doc = train::random_document(rng, 4);
    Element back = parse_json(to_json(doc));
    CHECK(structurally_equal(doc, back, 1e-12));
  }
  Element awkward = parse_json(R"({"q\"/\\": [0.1, 1e300, -0.0, 123456789012345678, "\u0001"]})");
  CHECK(structurally_equal(awkward, parse_json(to_json(awkward)), 0.0));
}

TEST_CASE("child paths follow the wrapper rule") {
  Element e = parse_json(support::kTrainJourney);
  auto kids = child_paths(e, {}, false);
  REQUIRE(kids.size() == 3);
  CHECK(kids[2].path.canonical() == "train");
  auto train = child_paths(*kids[2].child, kids[2].path, false);
  CHECK(train[1].path.canonical() == "train/shop");

  auto stops = child_paths(*kids[1].child, kids[1].path, false);
  REQUIRE(stops.size() == 3);
  for (const auto& s : stops) CHECK(s.path.canonical() == "stops");

  auto ordinal = child_paths(*kids[1].child, kids[1].path, true);
  CHECK(ordinal[0].path.canonical() == "stops/1");
  CHECK(ordinal[1].path.canonical() == "stops/2");
  CHECK(ordinal[2].path.canonical() == "stops/3");

  CHECK(child_paths(parse_json("5"), {}, false).empty());
}

TEST_CASE("collect_paths enumerates typed paths") {
  Element e = parse_json(support::kTrainJourney);
  auto paths = collect_paths(e, false);
  std::set<TypedPath> got(paths.begin(), paths.end());
  CHECK(got.count({Kind::Number, "train/carriages"}));
  CHECK(got.count({Kind::Boolean, "train/shop"}));
  CHECK(got.count({Kind::Text, "stops"}));
  CHECK(got.count({Kind::Object, ""}));
  CHECK(got.count({Kind::Array, "stops"}));
  CHECK(got.count({Kind::Text, "time"}));
  CHECK(got.count({Kind::Object, "train"}));
  CHECK(paths.size() == 7);
  CHECK(paths.front() == TypedPath{Kind::Object, ""});

  auto single = collect_paths(parse_json("5"), false);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == TypedPath{Kind::Number, ""});
  auto empty = collect_paths(parse_json("{}"), false);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0] == TypedPath{Kind::Object, ""});

  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    Element doc = train::random_document(rng, 4);
    CHECK(collect_paths(doc, false) == collect_paths(doc, false));
    CHECK(collect_paths(doc, true) == collect_paths(doc, true));
  }
}

TEST_CASE("array items keep the path, members extend it by one segment") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    Element doc = train::random_document(rng, 4);
    std::vector<std::pair<const Element*, ElementPath>> stack{{&doc, {}}};
    while (!stack.empty()) {
      auto [e, p] = stack.back();
      stack.pop_back();
      for (const auto& c : child_paths(*e, p, false)) {
        if (e->kind == Kind::Array) CHECK(c.path == p);
        else CHECK(c.path.segments.size() == p.segments.size() + 1);
        stack.push_back({c.child, c.path});
      }
    }
  }
}

TEST_CASE("canonical paths escape separators injectively") {
  ElementPath a{{"a/b"}};
  ElementPath b{{"a", "b"}};
  CHECK(a.canonical() == "a\\/b");
  CHECK(b.canonical() == "a/b");
  CHECK(a.canonical() != b.canonical());
  ElementPath c{{"x\\", "y"}};
  CHECK(ElementPath::parse(c.canonical()) == c);
  CHECK(ElementPath::parse(a.canonical()) == a);
  CHECK(ElementPath{}.canonical().empty());
  CHECK(append_segment("", "a/b") == a.canonical());
  CHECK(append_segment("a", "b") == "a/b");
}

TEST_CASE("path dictionary ids are dense, stable and fall back per kind") {
  PathDictionary d;
  auto shop = d.intern(Kind::Boolean, "train/shop");
  auto carriages = d.intern(Kind::Number, "train/carriages");
  CHECK(carriages == shop + 1);
  CHECK(d.intern(Kind::Boolean, "train/shop") == shop);
  CHECK(d.lookup(Kind::Boolean, "train/shop") == shop);
  CHECK(d.lookup(Kind::Boolean, "train/shop") == shop);
  // Same path under another kind is a separate group.
  CHECK(d.intern(Kind::Text, "train/shop") != shop);
  d.freeze();
  CHECK(d.lookup(Kind::Number, "never/seen") == d.unknown_group(Kind::Number));
  CHECK(d.unknown_group(Kind::Number) != d.unknown_group(Kind::Text));
  CHECK(d.intern(Kind::Number, "never/seen") == d.unknown_group(Kind::Number));
  CHECK_FALSE(d.contains(Kind::Number, "never/seen"));
  CHECK(d.size() == 3);
}
